"""
Actions that train the program policy and infer programs from it.
"""
import json
import logging
from dataclasses import replace

from metadesign import helpers as h
from metadesign.actions import evaluation
from metadesign.config import TRAIN_KEYS
from metadesign.csv import write_retention, write_train_log
from metadesign.decorators import with_output_dir
from metadesign.errors import ValidationError
from metadesign.policy.checkpoint import load_checkpoint, save_checkpoint
from metadesign.trainer.config import TaskList, build_task, parse_bool, split_entries
from metadesign.trainer.loop import infer, train, train_continual

log = logging.getLogger(__name__)

CHECKPOINT_NAME = "policy.pt"


def train_settings(context, data_dict):
    """
    The config of the call: context config with the data_dict's training
    fields and worker count applied.
    """
    config = context["config"]
    changes = {k: data_dict[k] for k in TRAIN_KEYS if data_dict.get(k) is not None}
    if context.get("workers"):
        changes.setdefault("workers", context["workers"])
    return config.override(**changes) if changes else config


def task_entry(data_dict, config):
    problem = data_dict.get("problem") or (config.problems[0] if config.problems else None)
    if not problem:
        raise ValidationError({"problem": "Missing value"})
    dims = h.normalize_dims_strict(data_dict.get("dims"))
    if dims:
        return f"{problem}@{','.join(str(d) for d in dims)}"
    return problem


def write_algorithms(path, candidates, prefix="alg"):
    data = [c.as_dict(f"{prefix}_{i:03d}") for i, c in enumerate(candidates)]
    with open(path, "w") as f:
        json.dump(data, f, indent=2)
    log.info(f"wrote {path}")
    return data


@with_output_dir
def design_train(context, data_dict):
    """
    Train a policy on one task, infer the best program and write
    train_log.csv, algorithms.json and the checkpoint. With test_dims the
    inferred program is also evaluated through program_eval.
    """
    config = train_settings(context, data_dict)
    embed = parse_bool(data_dict.get("embed", False))
    task = build_task(task_entry(data_dict, config), with_factors=embed, master_seed=config.train.master_seed,
                      wall_clock=config.wall_clock_costs)

    policy, train_log = train(task, config.train)
    result = infer(policy, task, config.train)

    log_path = write_train_log(h.output_path(context, "train_log.csv"), train_log.rows)
    algorithms_path = h.output_path(context, "algorithms.json")
    write_algorithms(algorithms_path, [result.best])
    factors = {task.key: task.factors} if task.factors is not None else None
    checkpoint = save_checkpoint(h.output_path(context, CHECKPOINT_NAME), policy, config.train.as_dict(), factors)

    output = {
        "task": task.key,
        "epochs": len(train_log),
        "train_log": log_path,
        "algorithms": algorithms_path,
        "checkpoint": checkpoint,
        "best": result.best.as_dict("alg_000"),
    }
    test_dims = h.normalize_dims_strict(data_dict.get("test_dims"))
    if test_dims:
        output["evaluation"] = evaluation.program_eval(context, {
            "program": result.best.text,
            "program_id": "alg_000",
            "problem": task.family_key,
            "dims": test_dims,
            "runs": data_dict.get("runs"),
            "budget": data_dict.get("budget"),
            "seed": config.train.master_seed,
        })
    return output


@with_output_dir
def design_continual(context, data_dict):
    """
    Train one policy over an ordered task list with EWC. Writes one training
    log per task, retention.csv, algorithms.json (one program per task) and
    the checkpoint with every task's factor vector.
    """
    config = train_settings(context, data_dict)
    entries = split_entries(data_dict.get("tasks")) or list(config.tasks)
    if len(entries) < 2:
        raise ValidationError({"tasks": "Continual training needs at least two tasks"})
    tasks = TaskList.from_entries(entries, with_factors=True, master_seed=config.train.master_seed,
                                  wall_clock=config.wall_clock_costs)

    result = train_continual(tasks, config.train)

    logs = []
    for t, train_log in enumerate(result.logs):
        logs.append(write_train_log(h.output_path(context, f"train_log_task{t + 1}.csv"), train_log.rows))
    keys = [task.key for task in tasks]
    retention = write_retention(h.output_path(context, "retention.csv"), keys, result.retention)
    algorithms_path = h.output_path(context, "algorithms.json")
    algorithms = write_algorithms(algorithms_path, result.inferred, prefix="task")
    checkpoint = save_checkpoint(h.output_path(context, CHECKPOINT_NAME), result.policy, config.train.as_dict(),
                                 {task.key: task.factors for task in tasks})
    return {
        "tasks": keys,
        "train_logs": logs,
        "retention": retention,
        "retention_matrix": result.retention,
        "algorithms": algorithms_path,
        "inferred": algorithms,
        "checkpoint": checkpoint,
    }


@with_output_dir
def design_infer(context, data_dict):
    """
    Sample programs from a saved policy and keep the best one. A policy
    trained with problem factors is given the task's factor vector.
    """
    if not data_dict.get("checkpoint"):
        raise ValidationError({"checkpoint": "Missing value"})
    config = train_settings(context, data_dict)
    policy, payload = load_checkpoint(data_dict["checkpoint"])
    embed = bool(payload.get("factors"))
    task = build_task(task_entry(data_dict, config), with_factors=embed, master_seed=config.train.master_seed,
                      wall_clock=config.wall_clock_costs)
    if embed and task.key in payload["factors"]:
        task = replace(task, factors=tuple(payload["factors"][task.key]))

    samples = int(data_dict.get("samples") or config.train.infer_samples)
    seed = data_dict.get("seed")
    result = infer(policy, task, config.train, seed=None if seed is None else int(seed), samples=samples)
    ordered = [result.best] + [c for c in result.candidates if c is not result.best]
    algorithms_path = h.output_path(context, "algorithms.json")
    write_algorithms(algorithms_path, ordered)
    return {
        "task": task.key,
        "algorithms": algorithms_path,
        "best": result.best.as_dict("alg_000"),
        "mean_reward": result.mean_reward,
    }
