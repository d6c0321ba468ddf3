"""
Baseline metaheuristics and published designs written as programs.
"""
import logging

from metadesign.design.program import from_text
from metadesign.design.space import nearest_grid_value, snap_to_grid
from metadesign.errors import ValidationError
from metadesign.models.enums import BaselineKind, ParamKind

log = logging.getLogger(__name__)

GA_CROSSOVER = 0.5
GA_MUTATION = 0.1

# one bit neighbourhood, the smallest n-grid value
NEIGHBOURHOOD = 0.01
TABU_FRACTION = 0.1

BASELINE_TEXT = {
    BaselineKind.ILS: (
        "traverse | fork(2) | event(stagnation_3); "
        "reset_n({n:g}) | forward | once; "
        "pairwise_select | forward | once; "
        "reinitialize | forward | once"
    ),
    BaselineKind.SA: (
        "traverse | forward | once; "
        "reset_n({n:g}) | forward | once; "
        "simulated_annealing_select | forward | once"
    ),
    BaselineKind.TS: (
        "traverse | forward | once; "
        "reset_n({n:g}) | forward | once; "
        "tabu({tabu:g}) | forward | once"
    ),
    BaselineKind.GA: (
        "tournament | forward | once; "
        "cross_uniform({eta_c:g}) | forward | once; "
        "reset_rand({eta_m:g}) | forward | once; "
        "pairwise_select | forward | once"
    ),
}

# Designs reported for the onemax, ising ring and MIVS problems, plus a
# beam-search-like and a restoration-style design.
PUBLISHED = {
    "roulette_fork_local": (
        "roulette_wheel | fork(2) | count(5%FE); "
        "reset_n(0.01) | forward | once; "
        "pairwise_select | forward | once"
    ),
    "roulette_fork_crossover": (
        "roulette_wheel | fork(3) | count(5%FE); "
        "cross_uniform(0.7) | forward | once; "
        "reset_rand(0.1) | forward | once; "
        "pairwise_select | forward | once"
    ),
    "roulette_always": (
        "roulette_wheel | forward | once; "
        "cross_n(0.01) | forward | once; "
        "reset_rand(0.1) | forward | once; "
        "always_select | forward | once"
    ),
    "tournament_fork_restart": (
        "tournament | fork(3) | count(10%FE); "
        "cross_n(0.01) | forward | once; "
        "reset_n(0.01) | forward | once; "
        "pairwise_select | forward | once; "
        "reinitialize | forward | once"
    ),
    "roulette_fork_round_robin": (
        "roulette_wheel | fork(3) | count(10%FE); "
        "cross_uniform(0.9) | forward | once; "
        "reset_rand(0.1) | forward | once; "
        "round_robin_select | forward | once"
    ),
    "beam": (
        "tournament | forward | once; "
        "cross_n(0.01) | forward | once; "
        "reset_n(0.01) | forward | once; "
        "greedy_select | forward | once"
    ),
    "restoration": (
        "traverse | forward | once; "
        "cross_uniform(0.2) | forward | once; "
        "reset_n(0.01) | forward | once; "
        "pairwise_select | forward | once"
    ),
}


def normalize_baseline_kind(kind):
    if isinstance(kind, BaselineKind):
        return kind
    try:
        return BaselineKind(str(kind).upper())
    except ValueError:
        raise ValidationError({"baseline": f"unknown baseline {kind!r}, expected one of "
                                           f"{', '.join(k.value for k in BaselineKind)}"})


def snap_rate(value, name="rate"):
    """
    Grid value for a probability parameter; off-grid values go to the
    nearest grid value with a warning.
    """
    on_grid = snap_to_grid(value, ParamKind.P_GRID)
    if on_grid is not None:
        return on_grid
    nearest = nearest_grid_value(value, ParamKind.P_GRID)
    log.warning(f"{name} {value:g} is not on the grid, using {nearest:g}")
    return nearest


def baseline_text(kind, eta_c=GA_CROSSOVER, eta_m=GA_MUTATION):
    kind = normalize_baseline_kind(kind)
    return BASELINE_TEXT[kind].format(
        n=NEIGHBOURHOOD,
        tabu=TABU_FRACTION,
        eta_c=snap_rate(eta_c, "crossover rate") if kind is BaselineKind.GA else eta_c,
        eta_m=snap_rate(eta_m, "mutation rate") if kind is BaselineKind.GA else eta_m,
    )


def as_program(kind, d=None, eta_c=GA_CROSSOVER, eta_m=GA_MUTATION):
    """
    The canonical program of a baseline. Parameters are fractions of d, so
    the program text does not depend on d.
    """
    return from_text(baseline_text(kind, eta_c, eta_m))


def published_program(name):
    try:
        return from_text(PUBLISHED[name])
    except KeyError:
        raise ValidationError({"published": f"unknown published design {name!r}"})
