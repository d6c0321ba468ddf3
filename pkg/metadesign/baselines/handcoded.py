"""
Baselines written as plain loops, without the interpreter or its operators.

They draw from the random stream in the same order as the interpreter runs
their canonical programs and check the budget at the same points, so both
produce the same trace for the same seed.
"""
import logging
import math
import time
from collections import deque
from dataclasses import dataclass

import numpy as np

from metadesign.baselines.programs import (
    GA_CROSSOVER,
    GA_MUTATION,
    NEIGHBOURHOOD,
    TABU_FRACTION,
    normalize_baseline_kind,
    snap_rate,
)
from metadesign.interpreter.batch import JobResult
from metadesign.interpreter.engine import BudgetError, ExecutionReport
from metadesign.models.enums import BaselineKind

log = logging.getLogger(__name__)

STAGNATION_LIMIT = 3
INITIAL_ACCEPTANCE = 0.8
COOLING = 0.995


class _Spent(Exception):
    pass


class _Counter:
    """
    FE accounting and best-so-far tracking for one run.
    """

    def __init__(self, instance, budget):
        self.instance = instance
        self.budget = budget
        self.used = 0
        self.best = -np.inf
        self.best_x = None

    def need(self):
        if self.used >= self.budget:
            raise _Spent()

    def evaluate(self, Y):
        k = min(len(Y), self.budget - self.used)
        Y = Y[:k]
        f = self.instance.evaluate_batch(Y) if k else np.empty(0)
        self.used += k
        if k and f.max() > self.best:
            i = int(np.argmax(f))
            self.best, self.best_x = float(f[i]), Y[i].copy()
        return Y, f


def _bits(rng, rows, d):
    return rng.integers(0, 2, size=(rows, d), dtype=np.uint8)


def _flip_count(d):
    return max(1, min(d, int(math.floor(NEIGHBOURHOOD * d + 0.5))))


def _flip_some(X, rng):
    """
    Flip the positions holding the n smallest of d uniform keys in each row.
    """
    n = _flip_count(X.shape[1])
    keys = rng.random(X.shape)
    threshold = np.sort(keys, axis=1)[:, n - 1:n]
    return X ^ (keys <= threshold).astype(np.uint8)


def _keep_better(X, f, Y, g):
    """
    Row by row replacement; rows without an offspring keep their parent.
    """
    X, f = X.copy(), f.copy()
    for i in range(min(len(g), len(f))):
        if g[i] >= f[i]:
            X[i], f[i] = Y[i], g[i]
    return X, f


def _overwrite(X, f, Y, g):
    X, f = X.copy(), f.copy()
    X[:len(g)], f[:len(g)] = Y, g
    return X, f


class _Temperature:
    """
    Metropolis acceptance, calibrated on the first deteriorations seen.
    """

    def __init__(self):
        self.value = None

    def accept(self, X, f, Y, g, rng):
        u = rng.random(len(f))
        k = len(g)
        gap = f - np.concatenate([g, f[k:]])
        if self.value is None and (gap > 0).any():
            self.value = -gap[gap > 0].mean() / math.log(INITIAL_ACCEPTANCE)
        take = gap <= 0
        if self.value is not None:
            with np.errstate(over="ignore", under="ignore"):
                take |= u < np.exp(-gap / self.value)
            self.value *= COOLING
        X, f = X.copy(), f.copy()
        rows = np.flatnonzero(take[:k])
        X[rows], f[rows] = Y[rows], g[rows]
        return X, f


class _Tabu:
    """
    Remembers accepted solutions; a remembered one is only taken again when
    it beats the aspiration fitness.
    """

    def __init__(self, d):
        self.memory = deque(maxlen=max(1, int(math.floor(TABU_FRACTION * d + 0.5))))

    def accept(self, X, f, Y, g, aspiration):
        X, f = X.copy(), f.copy()
        for i in range(min(len(g), len(f))):
            if g[i] < f[i]:
                continue
            key = Y[i].tobytes()
            if key in self.memory and not g[i] > aspiration:
                continue
            X[i], f[i] = Y[i], g[i]
            self.memory.append(key)
        return X, f


def _tournament(f, rng):
    a = rng.integers(0, len(f), size=len(f))
    b = rng.integers(0, len(f), size=len(f))
    return np.array([a[i] if f[a[i]] >= f[b[i]] else b[i] for i in range(len(f))], dtype=np.int64)


def _uniform_crossover(X, p, rng):
    k = len(X)
    if k < 2:
        mates = np.arange(k)
    else:
        draws = rng.integers(0, k - 1, size=k)
        mates = np.array([j + 1 if j >= i else j for i, j in enumerate(draws)], dtype=np.int64)
    mask = rng.random(X.shape) < p
    C = X.copy()
    C[mask] = X[mates][mask]
    return C


def _mutate(X, p, rng):
    return X ^ (rng.random(X.shape) < p).astype(np.uint8)


def _ils_pass(X, f, counter, rng):
    stagnant = 0
    while True:
        best_before = f.max()
        used_before = counter.used
        counter.need()
        Y, g = counter.evaluate(_flip_some(X, rng))
        counter.need()
        X, f = _keep_better(X, f, Y, g)
        stagnant = 0 if f.max() > best_before else stagnant + 1
        if counter.used == used_before or stagnant >= STAGNATION_LIMIT:
            break
    counter.need()
    Y, g = counter.evaluate(_bits(rng, len(f), X.shape[1]))
    return _overwrite(X, f, Y, g)


def _sa_pass(X, f, counter, rng, temperature):
    counter.need()
    Y, g = counter.evaluate(_flip_some(X, rng))
    counter.need()
    return temperature.accept(X, f, Y, g, rng)


def _ts_pass(X, f, counter, rng, tabu, aspiration):
    counter.need()
    Y, g = counter.evaluate(_flip_some(X, rng))
    counter.need()
    return tabu.accept(X, f, Y, g, aspiration)


def _ga_pass(X, f, counter, rng, eta_c, eta_m):
    counter.need()
    idx = _tournament(f, rng)
    parents_X, parents_f = X[idx], f[idx]
    C, _ = counter.evaluate(_uniform_crossover(parents_X, eta_c, rng))
    counter.need()
    M, g = counter.evaluate(_mutate(C, eta_m, rng))
    counter.need()
    return _keep_better(parents_X, parents_f, M, g)


def run_handcoded(kind, instance, budget, pop_size=50, seed=0, eta_c=GA_CROSSOVER, eta_m=GA_MUTATION,
                  snap=True, trace=True):
    """
    Run a baseline directly. GA rates are snapped to the program grid unless
    snap is False, which is only used for tuning.
    """
    kind = normalize_baseline_kind(kind)
    if budget < pop_size:
        raise BudgetError(f"budget {budget} is smaller than the population size {pop_size}")
    if kind is BaselineKind.GA and snap:
        eta_c, eta_m = snap_rate(eta_c, "crossover rate"), snap_rate(eta_m, "mutation rate")

    rng = np.random.default_rng(seed)
    counter = _Counter(instance, budget)
    X, f = counter.evaluate(_bits(rng, pop_size, instance.d))
    temperature = _Temperature()
    tabu = _Tabu(instance.d)
    aspiration = counter.best

    series = [] if trace else None
    passes = 0
    while counter.used < budget:
        used_before = counter.used
        spent = False
        try:
            if kind is BaselineKind.ILS:
                X, f = _ils_pass(X, f, counter, rng)
            elif kind is BaselineKind.SA:
                X, f = _sa_pass(X, f, counter, rng, temperature)
            elif kind is BaselineKind.TS:
                X, f = _ts_pass(X, f, counter, rng, tabu, aspiration)
                aspiration = counter.best
            else:
                X, f = _ga_pass(X, f, counter, rng, eta_c, eta_m)
        except _Spent:
            spent = True
        passes += 1
        if trace:
            series.append(counter.best)
        if spent or counter.used == used_before:
            break

    log.debug(f"{kind.value} finished: best={counter.best} fe={counter.used} passes={passes}")
    return ExecutionReport(best_fitness=counter.best, best_solution=counter.best_x, fe_used=counter.used,
                           trace=series, passes=passes)


@dataclass(frozen=True)
class BaselineJob:
    kind: BaselineKind
    instance: object
    budget: int
    pop_size: int
    seed: object
    eta_c: float = GA_CROSSOVER
    eta_m: float = GA_MUTATION
    trace: bool = False


def run_baseline_job(job):
    started = time.perf_counter()
    report = run_handcoded(job.kind, job.instance, job.budget, job.pop_size, job.seed, eta_c=job.eta_c,
                           eta_m=job.eta_m, trace=job.trace)
    wall_ms = int((time.perf_counter() - started) * 1000)
    trace = tuple(report.trace) if report.trace is not None else None
    return JobResult(report.best_fitness, report.fe_used, wall_ms, trace)
