"""
Grid search over the GA crossover and mutation rates.
"""
import logging
from dataclasses import dataclass

import numpy as np

from metadesign.baselines.handcoded import run_handcoded
from metadesign.models.enums import BaselineKind

log = logging.getLogger(__name__)

CROSSOVER_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
MUTATION_MULTIPLIERS = (1, 2, 5)
EXTENDED_RATE = 0.05
TUNING_SEEDS = 5


@dataclass(frozen=True)
class GaSetting:
    eta_c: float
    eta_m: float
    mean_best: float

    def as_dict(self):
        return {"eta_c": self.eta_c, "eta_m": self.eta_m, "mean_best": self.mean_best}


def ga_grid(d, extended=False):
    """
    (eta_c, eta_m) pairs in search order: crossover major, mutation minor.
    """
    crossover = CROSSOVER_GRID + ((EXTENDED_RATE,) if extended else ())
    mutation = tuple(m / d for m in MUTATION_MULTIPLIERS) + ((EXTENDED_RATE,) if extended else ())
    return [(c, m) for c in crossover for m in mutation]


def tune_ga(instance, budget, pop_size=50, seeds=TUNING_SEEDS, extended=False, master_seed=0):
    """
    Mean best fitness of every grid setting over `seeds` seeded runs.
    Returns (best, all settings); the first setting in grid order wins ties.
    """
    run_seeds = [np.random.SeedSequence(master_seed, spawn_key=(s,)) for s in range(seeds)]
    settings = []
    for eta_c, eta_m in ga_grid(instance.d, extended):
        bests = [run_handcoded(BaselineKind.GA, instance, budget, pop_size, seed, eta_c=eta_c, eta_m=eta_m,
                               snap=False, trace=False).best_fitness for seed in run_seeds]
        settings.append(GaSetting(eta_c, eta_m, float(np.mean(bests))))
    best = max(settings, key=lambda s: s.mean_best)
    log.info(f"GA tuning on {getattr(instance, 'key', instance)}: eta_c={best.eta_c:g} eta_m={best.eta_m:g} "
             f"mean best {best.mean_best:.4g}")
    return best, settings
