import logging
import os

import numpy as np

from metadesign.design.program import from_text
from metadesign.errors import ObjectNotFound, ValidationError
from metadesign.models.enums import BaselineKind
from metadesign.problems.instance import ProblemError
from metadesign.problems.registry import family_keys, instance_from_key

log = logging.getLogger(__name__)


def problem_keys():
    """
    Names of the problem families, as used in problem keys.
    """
    return list(family_keys())


def baseline_kinds():
    return [kind.value for kind in BaselineKind]


def normalize_problem_strict(key, dim=None, seed=1):
    """
    Build the instance for a problem key, raising ValidationError for an
    unknown key or an invalid dimension.
    """
    if not key:
        raise ValidationError({"problem": "Missing value"})
    try:
        return instance_from_key(str(key).strip(), dim=dim, seed=seed)
    except ProblemError as e:
        raise ValidationError({"problem": str(e)})


def normalize_dims_strict(dims):
    """
    Accepts "50 100", "50,100", [50, 100] or 50 and returns (50, 100).
    """
    if dims is None or dims == "":
        return ()
    if isinstance(dims, (list, tuple)):
        items = dims
    else:
        items = str(dims).replace(",", " ").split()
    try:
        values = tuple(int(d) for d in items)
    except (TypeError, ValueError):
        raise ValidationError({"dims": f"Invalid dimensions {dims!r}"})
    if any(d < 1 for d in values):
        raise ValidationError({"dims": "Dimensions must be positive"})
    return values


def normalize_baseline_kinds_strict(kinds):
    if not kinds:
        return list(BaselineKind)
    if isinstance(kinds, str):
        kinds = kinds.replace(",", " ").split()
    result = []
    for kind in kinds:
        try:
            result.append(BaselineKind(str(kind).upper()))
        except ValueError:
            raise ValidationError({"baselines": f"Unknown baseline {kind!r}"})
    return result


def read_program(data_dict):
    """
    The Program given as `program` text or as a `program_file` path.
    """
    text = data_dict.get("program")
    path = data_dict.get("program_file")
    if not text and not path:
        raise ValidationError({"program": "Missing value"})
    if not text:
        if not os.path.isfile(path):
            raise ObjectNotFound(f"Program file {path} not found")
        with open(path) as f:
            text = f.read()
    return from_text(text.strip())


def run_seed(seed, run_index):
    """
    Integer seed of one evaluation run, derived from the command seed.
    """
    state = np.random.SeedSequence(int(seed), spawn_key=(int(run_index),)).generate_state(1)
    return int(state[0])


def output_path(context, name):
    return os.path.join(context["output_dir"], name)
