"""
CSV records written by the commands: runs, training logs, retention,
benchmark and landscape factor tables.
"""
import csv
import logging

from metadesign.landscape.features import FACTOR_NAMES
from metadesign.models.records import RUN_COLUMNS, TRAIN_LOG_COLUMNS, RunRecord

log = logging.getLogger(__name__)

BENCH_COLUMNS = ["problem", "algorithm", "runs", "mean", "std", "flag"]
FEATURE_COLUMNS = ["problem_key", "seed"] + list(FACTOR_NAMES)


def _write(path, columns, rows):
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    log.info(f"wrote {path}")
    return path


def row_to_run_record(row):
    """
    Convert a runs.csv row (a dict keyed by the header) to a RunRecord.
    """
    missing_fields = [field for field in RUN_COLUMNS if field not in row]
    if missing_fields:
        raise ValueError(f"Missing required fields: {', '.join(missing_fields)}")

    return RunRecord(
        program_id=row["program_id"],
        problem_key=row["problem"],
        dim=int(row["dim"]),
        run_index=int(row["run"]),
        seed=int(row["seed"]),
        best_fitness=float(row["best_fitness"]),
        fe_used=int(row["fe_used"]),
        wall_ms=int(row["wall_ms"]),
    )


def write_runs(path, records, zero_wall_ms=False):
    rows = []
    for record in records:
        row = record.as_dict()
        if zero_wall_ms:
            row["wall_ms"] = 0
        row["best_fitness"] = repr(float(row["best_fitness"]))
        rows.append(row)
    return _write(path, RUN_COLUMNS, rows)


def read_runs(path):
    with open(path, newline="") as f:
        return [row_to_run_record(row) for row in csv.DictReader(f)]


def write_train_log(path, rows):
    return _write(path, TRAIN_LOG_COLUMNS, [row.as_dict() for row in rows])


def write_retention(path, task_keys, matrix):
    """
    Row i: policy after the first i + 1 tasks; column j: mean reward on task j.
    """
    names = [f"task{j + 1}:{key}" for j, key in enumerate(task_keys)]
    columns = ["trained_tasks"] + names
    rows = [{"trained_tasks": i + 1, **dict(zip(names, values))} for i, values in enumerate(matrix)]
    return _write(path, columns, rows)


def write_bench(path, rows):
    return _write(path, BENCH_COLUMNS, rows)


def write_features(path, rows):
    """
    One row per instance: problem_key, seed and the factors in FACTOR_NAMES order.
    """
    out = []
    for row in rows:
        factors = row["factors"]
        out.append({"problem_key": row["problem_key"], "seed": row["seed"],
                    **{name: repr(float(factors[name])) for name in FACTOR_NAMES}})
    return _write(path, FEATURE_COLUMNS, out)
