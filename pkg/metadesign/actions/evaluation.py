"""
Actions that run programs and baselines on problem instances.
"""
import json
import logging

import numpy as np
from scipy.stats import ranksums

from metadesign import helpers as h
from metadesign.baselines.handcoded import BaselineJob, run_baseline_job
from metadesign.baselines.programs import GA_CROSSOVER, GA_MUTATION, published_program
from metadesign.baselines.tuning import tune_ga
from metadesign.csv import write_bench, write_runs
from metadesign.decorators import with_output_dir
from metadesign.design.program import to_text, validate
from metadesign.errors import ValidationError
from metadesign.interpreter.batch import RunJob, run_jobs
from metadesign.models.records import RunRecord
from metadesign.trainer.config import DEFAULT_TEST_DIM, parse_bool, split_entries

log = logging.getLogger(__name__)

DEFAULT_RUNS = 30
TEST_BUDGET = 50000
SIGNIFICANCE = 0.05


def _int(data_dict, key, default):
    value = data_dict.get(key)
    if value in (None, ""):
        return default
    try:
        value = int(value)
    except (TypeError, ValueError):
        raise ValidationError({key: f"Invalid integer {value!r}"})
    if value < 1:
        raise ValidationError({key: "Must be a positive integer"})
    return value


def protocol_settings(context, data_dict):
    """
    (runs, budget, pop_size, seed, default dims) of an evaluation call.
    The test protocol means 50000 FEs on the 625 bit instance.
    """
    train = context["config"].train
    protocol = data_dict.get("protocol") or "train"
    if protocol not in ("train", "test"):
        raise ValidationError({"protocol": f"Unknown protocol {protocol!r}"})
    test = protocol == "test"
    runs = _int(data_dict, "runs", DEFAULT_RUNS)
    budget = _int(data_dict, "budget", TEST_BUDGET if test else train.train_budget)
    pop_size = _int(data_dict, "pop_size", train.pop_size)
    seed = data_dict.get("seed")
    seed = train.master_seed if seed in (None, "") else int(seed)
    dims = h.normalize_dims_strict(data_dict.get("dims")) or ((DEFAULT_TEST_DIM,) if test else ())
    return runs, budget, pop_size, seed, dims


def problem_instances(keys, dims):
    instances = []
    for key in keys:
        if dims:
            instances.extend(h.normalize_problem_strict(key, dim=d) for d in dims)
        else:
            instances.append(h.normalize_problem_strict(key))
    return instances


def _records(program_id, instance, seeds, results):
    return [
        RunRecord(program_id=program_id, problem_key=instance.key, dim=instance.d, run_index=r, seed=seed,
                  best_fitness=res.best_fitness, fe_used=res.fe_used, wall_ms=res.wall_ms)
        for r, (seed, res) in enumerate(zip(seeds, results))
    ]


def _summary(records):
    bests = np.array([r.best_fitness for r in records])
    return {"runs": len(bests), "mean": float(bests.mean()), "std": float(bests.std())}


@with_output_dir
def program_eval(context, data_dict):
    """
    Run one program `runs` times on each problem instance and write runs.csv.
    """
    config = context["config"]
    program = h.read_program(data_dict)
    program_id = data_dict.get("program_id") or "program"
    runs, budget, pop_size, seed, dims = protocol_settings(context, data_dict)
    keys = split_entries(data_dict.get("problem")) or list(config.problems)
    if not keys:
        raise ValidationError({"problem": "Missing value"})
    trace = parse_bool(data_dict.get("trace", config.trace))

    seeds = [h.run_seed(seed, r) for r in range(runs)]
    records, summaries, traces = [], [], {}
    for instance in problem_instances(keys, dims):
        jobs = [RunJob(program, instance, budget, pop_size, s, trace=trace) for s in seeds]
        results = run_jobs(jobs, workers=context["workers"])
        batch = _records(program_id, instance, seeds, results)
        records.extend(batch)
        summaries.append({"problem": instance.key, **_summary(batch)})
        if trace:
            traces[instance.key] = [list(res.trace) for res in results]
        log.info(f"{program_id} on {instance.key}: mean {summaries[-1]['mean']:.4g} "
                 f"std {summaries[-1]['std']:.4g} over {runs} runs")

    runs_path = write_runs(h.output_path(context, "runs.csv"), records, config.zero_wall_ms)
    output = {
        "program": to_text(program),
        "warnings": validate(program),
        "budget": budget,
        "runs_csv": runs_path,
        "results": summaries,
    }
    if trace:
        traces_path = h.output_path(context, "traces.json")
        with open(traces_path, "w") as f:
            json.dump(traces, f)
        output["traces"] = traces_path
    return output


def rank_flag(reference, other, alpha=SIGNIFICANCE):
    """
    '+' when `reference` is significantly better than `other` (rank-sum
    test), '-' when significantly worse, '=' otherwise.
    """
    reference, other = np.asarray(reference, dtype=float), np.asarray(other, dtype=float)
    if np.array_equal(np.sort(reference), np.sort(other)):
        return "="
    _, p = ranksums(reference, other)
    if p >= alpha:
        return "="
    return "+" if reference.mean() > other.mean() else "-"


@with_output_dir
def baseline_bench(context, data_dict):
    """
    Run the baselines (and designed programs when given) on every problem
    and write runs.csv and bench.csv. Flags compare the first designed
    program against every other algorithm.
    """
    config = context["config"]
    runs, budget, pop_size, seed, dims = protocol_settings(context, data_dict)
    keys = split_entries(data_dict.get("problems") or data_dict.get("problem")) or list(config.problems)
    if not keys:
        raise ValidationError({"problems": "Missing value"})
    kinds = h.normalize_baseline_kinds_strict(data_dict.get("baselines"))
    eta_c = float(data_dict.get("eta_c") or GA_CROSSOVER)
    eta_m = float(data_dict.get("eta_m") or GA_MUTATION)

    designed = []
    if data_dict.get("program") or data_dict.get("program_file"):
        designed.append((data_dict.get("program_id") or "program", h.read_program(data_dict)))
    for name in split_entries(data_dict.get("published")):
        designed.append((name, published_program(name)))

    seeds = [h.run_seed(seed, r) for r in range(runs)]
    records, table = [], []
    for instance in problem_instances(keys, dims):
        bests = {}
        for program_id, program in designed:
            jobs = [RunJob(program, instance, budget, pop_size, s) for s in seeds]
            batch = _records(program_id, instance, seeds, run_jobs(jobs, workers=context["workers"]))
            records.extend(batch)
            bests[program_id] = [r.best_fitness for r in batch]
        for kind in kinds:
            jobs = [BaselineJob(kind, instance, budget, pop_size, s, eta_c, eta_m) for s in seeds]
            results = run_jobs(jobs, workers=context["workers"], runner=run_baseline_job)
            batch = _records(kind.value, instance, seeds, results)
            records.extend(batch)
            bests[kind.value] = [r.best_fitness for r in batch]

        reference = designed[0][0] if designed else None
        for name, values in bests.items():
            flag = "" if reference is None or name == reference else rank_flag(bests[reference], values)
            table.append({"problem": instance.key, "algorithm": name, "runs": len(values),
                          "mean": float(np.mean(values)), "std": float(np.std(values)), "flag": flag})

    runs_path = write_runs(h.output_path(context, "runs.csv"), records, config.zero_wall_ms)
    bench_path = write_bench(h.output_path(context, "bench.csv"), table)
    return {"runs_csv": runs_path, "bench_csv": bench_path, "table": table}


@with_output_dir
def ga_tune(context, data_dict):
    """
    Grid search of the GA rates on one problem; writes ga_tuning.json.
    """
    train = context["config"].train
    instance = h.normalize_problem_strict(data_dict.get("problem"))
    budget = _int(data_dict, "budget", train.train_budget)
    pop_size = _int(data_dict, "pop_size", train.pop_size)
    seeds = _int(data_dict, "seeds", 5)
    seed = data_dict.get("seed")
    seed = train.master_seed if seed in (None, "") else int(seed)
    best, settings = tune_ga(instance, budget, pop_size, seeds=seeds,
                             extended=parse_bool(data_dict.get("extended", False)), master_seed=seed)
    output = {"problem": instance.key, "best": best.as_dict(), "settings": [s.as_dict() for s in settings]}
    path = h.output_path(context, "ga_tuning.json")
    with open(path, "w") as f:
        json.dump(output, f, indent=2)
    output["path"] = path
    return output
