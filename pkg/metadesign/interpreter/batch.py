"""
Runs many interpreter jobs, optionally in worker processes. Results come back
in job order, so the outcome never depends on worker scheduling.
"""
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from metadesign.interpreter.engine import run

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunJob:
    program: object
    instance: object
    budget: int
    pop_size: int
    seed: object
    initial_pop: tuple = None
    trace: bool = False


@dataclass(frozen=True)
class JobResult:
    best_fitness: float
    fe_used: int
    wall_ms: int
    trace: tuple = None


def run_job(job):
    started = time.perf_counter()
    report = run(job.program, job.instance, job.budget, pop_size=job.pop_size, seed=job.seed,
                 initial_pop=job.initial_pop, trace=job.trace)
    wall_ms = int((time.perf_counter() - started) * 1000)
    trace = tuple(report.trace) if report.trace is not None else None
    return JobResult(report.best_fitness, report.fe_used, wall_ms, trace)


def run_jobs(jobs, workers=1, runner=run_job):
    """
    Results of `runner` over `jobs`, in job order.
    """
    jobs = list(jobs)
    if workers <= 1 or len(jobs) <= 1:
        return [runner(job) for job in jobs]
    chunksize = max(1, len(jobs) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as ex:
        results = list(ex.map(runner, jobs, chunksize=chunksize))
    log.debug(f"ran {len(jobs)} jobs on {workers} workers")
    return results
