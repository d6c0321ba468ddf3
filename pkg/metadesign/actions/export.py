"""
Actions that describe things without running a search: landscape factors,
the vocabulary and programs in JSON form.
"""
import json
import logging

from metadesign import helpers as h
from metadesign.csv import write_features
from metadesign.decorators import with_output_dir
from metadesign.design.program import as_json, validate
from metadesign.design.space import build_vocabulary
from metadesign.landscape.features import TRIALS, compute_factors
from metadesign.trainer.config import parse_bool

log = logging.getLogger(__name__)


def _dump(path, data):
    with open(path, "w") as f:
        json.dump(data, f, indent=2)
    log.info(f"wrote {path}")
    return path


@with_output_dir
def problem_features(context, data_dict):
    """
    The 32 landscape factors of a problem instance, written to features.json
    and as one row of features.csv.
    """
    config = context["config"]
    instance = h.normalize_problem_strict(data_dict.get("problem"))
    seed = data_dict.get("seed")
    seed = config.train.master_seed if seed in (None, "") else int(seed)
    trials = int(data_dict.get("trials") or TRIALS)
    wall_clock = parse_bool(data_dict.get("wall_clock", config.wall_clock_costs))

    vector = compute_factors(instance, seed, trials=trials, wall_clock=wall_clock)
    metadata = dict(vector.metadata)
    if config.zero_wall_ms:
        metadata.pop("wall_seconds", None)
        metadata.pop("ela_meta_seconds", None)
    output = {
        "problem_key": instance.key,
        "seed": seed,
        "factors": vector.as_dict(),
        "metadata": metadata,
    }
    output["csv"] = write_features(h.output_path(context, "features.csv"), [output])
    output["path"] = _dump(h.output_path(context, "features.json"), output)
    return output


@with_output_dir
def vocab_export(context, data_dict):
    vocab = build_vocabulary()
    tokens = vocab.as_dicts()
    return {"tokens": len(tokens), "path": _dump(h.output_path(context, "vocab.json"), tokens)}


@with_output_dir
def program_export(context, data_dict):
    """
    Parse a program and write its JSON form with any validation warnings.
    """
    program = h.read_program(data_dict)
    data = {**as_json(program), "warnings": validate(program)}
    data["path"] = _dump(h.output_path(context, data_dict.get("name") or "program.json"), data)
    return data
