"""
The 32 landscape factors used to embed a problem: dispersion, meta-model,
information content and nearest-better statistics computed from random walk
samples, averaged over 5 seeded trials.

Degenerate statistics map to neutral values (ratios 1, entropies and
correlations 0) so every factor is finite.
"""
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist, squareform

from metadesign.landscape.sampling import random_walk_sample

log = logging.getLogger(__name__)

FACTOR_NAMES = (
    "disp.ratio_mean_02",
    "disp.ratio_mean_05",
    "disp.ratio_mean_10",
    "disp.ratio_mean_25",
    "disp.ratio_median_02",
    "disp.ratio_median_05",
    "disp.ratio_median_10",
    "disp.ratio_median_25",
    "disp.diff_mean_02",
    "disp.diff_mean_05",
    "ela_meta.lin_simple.adj_r2",
    "ela_meta.lin_simple.intercept",
    "ela_meta.lin_simple.coef.min",
    "ela_meta.lin_simple.coef.max",
    "ela_meta.lin_simple.coef.max_by_min",
    "ela_meta.lin_w_interact.adj_r2",
    "ela_meta.quad_simple.adj_r2",
    "ela_meta.quad_simple.cond",
    "ela_meta.quad_w_interact.adj_r2",
    "ela_meta.costs_runtime",
    "ic.h_max",
    "ic.eps_s",
    "ic.eps_max",
    "ic.eps_ratio",
    "ic.m0",
    "ic.costs_runtime",
    "nbc.nn_nb.sd_ratio",
    "nbc.nn_nb.mean_ratio",
    "nbc.nn_nb.cor",
    "nbc.dist_ratio.coeff_var",
    "nbc.nb_fitness.cor",
    "nbc.costs_runtime",
)

TRIALS = 5
SUBSAMPLE = 1000
META_ROWS = 5000
META_COLUMNS = 5000
RIDGE_PENALTY = 1e-8
DISPERSION_QUANTILES = (2, 5, 10, 25)
EPS_GRID = np.concatenate([[0.0], 10.0 ** np.arange(-5.0, 15.5, 0.5)])
H_THRESHOLD = 0.05


@dataclass(frozen=True, eq=False)
class FactorVector:
    values: tuple
    names: tuple = FACTOR_NAMES
    metadata: dict = field(default_factory=dict)
    samples: tuple = field(default=(), repr=False)

    def __getitem__(self, name):
        return self.values[self.names.index(name)]

    def __eq__(self, other):
        return isinstance(other, FactorVector) and self.values == other.values and self.names == other.names

    def __hash__(self):
        return hash(self.values)

    def to_array(self):
        return np.asarray(self.values, dtype=np.float64)

    def as_dict(self):
        return dict(zip(self.names, self.values))


class _Clock:
    """
    Runtime cost of a feature group: deterministic work units by default,
    wall seconds on request. Wall seconds are always kept in metadata.
    """

    def __init__(self, wall_clock=False):
        self.wall_clock = wall_clock
        self.units = 0.0
        self.started = time.perf_counter()

    def add(self, work):
        self.units += work / 1e6

    def elapsed(self):
        return time.perf_counter() - self.started

    def value(self):
        return self.elapsed() if self.wall_clock else self.units


def _subsample(sample, rng, cap):
    n = len(sample)
    if n <= cap:
        return sample.points, sample.fitness
    idx = np.sort(rng.choice(n, size=cap, replace=False))
    return sample.points[idx], sample.fitness[idx]


def _ratio(a, b, neutral=1.0):
    return float(a / b) if b > 0 else neutral


def _corr(a, b):
    if len(a) < 2 or a.std() == 0 or b.std() == 0:
        return 0.0
    return float(np.corrcoef(a, b)[0, 1])


def dispersion_features(sample, rng):
    """
    Pairwise Hamming dispersion of the best q% points against all points.
    Fitness ties are ordered at random.
    """
    X, f = _subsample(sample, rng, SUBSAMPLE)
    n = len(f)
    values = {}
    order = np.lexsort((rng.random(n), -f))
    all_d = pdist(X.astype(bool), "hamming") if n >= 2 else np.empty(0)
    mean_all = all_d.mean() if all_d.size else 0.0
    median_all = np.median(all_d) if all_d.size else 0.0
    for q in DISPERSION_QUANTILES:
        k = int(math.ceil(q * n / 100))
        if k < 2 or not all_d.size:
            ratio_mean, ratio_median, diff = 1.0, 1.0, 0.0
        else:
            best_d = pdist(X[order[:k]].astype(bool), "hamming")
            ratio_mean = _ratio(best_d.mean(), mean_all)
            ratio_median = _ratio(np.median(best_d), median_all)
            diff = float(best_d.mean() - mean_all)
        values[f"disp.ratio_mean_{q:02d}"] = ratio_mean
        values[f"disp.ratio_median_{q:02d}"] = ratio_median
        if q in (2, 5):
            values[f"disp.diff_mean_{q:02d}"] = diff
    return values


def _fit(A, y, clock, metadata):
    n, p = A.shape
    coef, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    clock.add(n * p * p)
    if rank < p:
        augmented = np.vstack([A, math.sqrt(RIDGE_PENALTY) * np.eye(p)])
        coef = np.linalg.lstsq(augmented, np.concatenate([y, np.zeros(p)]), rcond=None)[0]
        clock.add((n + p) * p * p)
        metadata["ridge_fallback"] = True
    resid = y - A @ coef
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 0.0 if ss_tot <= 0 else 1.0 - float(resid @ resid) / ss_tot
    dof = n - p
    adj = 1.0 - (1.0 - r2) * (n - 1) / dof if dof > 0 else r2
    return coef, float(adj)


def meta_model_features(sample, rng, wall_clock=False, metadata=None):
    """
    Least squares fits of linear and quadratic models, with and without
    pairwise interactions. Interaction columns are a seeded subset when
    all pairs would not fit.
    """
    metadata = {} if metadata is None else metadata
    clock = _Clock(wall_clock)
    X, y = _subsample(sample, rng, META_ROWS)
    X = X.astype(np.float64)
    n, d = X.shape
    ones = np.ones((n, 1))

    pairs = d * (d - 1) // 2
    n_inter = min(pairs, META_COLUMNS, n // 2)
    rows, cols = np.triu_indices(d, k=1)
    if n_inter < pairs:
        chosen = np.sort(rng.choice(pairs, size=n_inter, replace=False))
        rows, cols = rows[chosen], cols[chosen]
        metadata["interaction_columns"] = int(n_inter)
    inter = X[:, rows] * X[:, cols]
    squares = X ** 2

    lin_coef, lin_r2 = _fit(np.hstack([ones, X]), y, clock, metadata)
    _, lin_inter_r2 = _fit(np.hstack([ones, X, inter]), y, clock, metadata)
    quad_coef, quad_r2 = _fit(np.hstack([ones, X, squares]), y, clock, metadata)
    _, quad_inter_r2 = _fit(np.hstack([ones, X, squares, inter]), y, clock, metadata)

    lin_abs = np.abs(lin_coef[1:])
    quad_abs = np.abs(quad_coef[1 + d:])
    values = {
        "ela_meta.lin_simple.adj_r2": lin_r2,
        "ela_meta.lin_simple.intercept": float(lin_coef[0]),
        "ela_meta.lin_simple.coef.min": float(lin_abs.min()),
        "ela_meta.lin_simple.coef.max": float(lin_abs.max()),
        "ela_meta.lin_simple.coef.max_by_min": _ratio(lin_abs.max(), lin_abs.min() if lin_abs.min() > 1e-12 else 0.0,
                                                      neutral=0.0),
        "ela_meta.lin_w_interact.adj_r2": lin_inter_r2,
        "ela_meta.quad_simple.adj_r2": quad_r2,
        "ela_meta.quad_simple.cond": _ratio(quad_abs.max(), quad_abs.min() if quad_abs.min() > 1e-12 else 0.0,
                                            neutral=0.0),
        "ela_meta.quad_w_interact.adj_r2": quad_inter_r2,
        "ela_meta.costs_runtime": clock.value(),
    }
    metadata["ela_meta_seconds"] = metadata.get("ela_meta_seconds", 0.0) + clock.elapsed()
    return values


def _entropy_and_partial(diffs, eps):
    s = np.where(diffs > eps, 1, np.where(diffs < -eps, -1, 0))
    n = len(s)
    if n < 2:
        return 0.0, 0.0
    a, b = s[:-1], s[1:]
    changed = a != b
    codes = (a[changed] + 1) * 3 + (b[changed] + 1)
    p = np.bincount(codes, minlength=9) / (n - 1)
    p = p[p > 0]
    entropy = float(-(p * np.log(p)).sum() / math.log(6)) if p.size else 0.0
    nonzero = s[s != 0]
    mu = 0 if not nonzero.size else 1 + int(np.count_nonzero(nonzero[1:] != nonzero[:-1]))
    return entropy, mu / n


def info_content_features(sample, wall_clock=False):
    """
    Entropy of consecutive fitness change symbols along the walk for a
    logarithmic grid of thresholds.
    """
    clock = _Clock(wall_clock)
    diffs = np.diff(sample.fitness)
    results = [_entropy_and_partial(diffs, eps) for eps in EPS_GRID]
    clock.add(len(EPS_GRID) * len(diffs))
    H = np.array([h for h, _ in results])
    M = np.array([m for _, m in results])

    below = np.flatnonzero(H < H_THRESHOLD)
    m0 = float(M[0])
    if m0 == 0:
        eps_ratio = 0.0
    else:
        halved = np.flatnonzero(M < 0.5 * m0)
        eps_ratio = float(EPS_GRID[halved[0]]) if halved.size else float(EPS_GRID[-1])
    return {
        "ic.h_max": float(H.max()),
        "ic.eps_s": float(EPS_GRID[below[0]]) if below.size else float(EPS_GRID[-1]),
        "ic.eps_max": float(EPS_GRID[int(np.argmax(H))]),
        "ic.eps_ratio": eps_ratio,
        "ic.m0": m0,
        "ic.costs_runtime": clock.value(),
    }


def nbc_features(sample, rng, wall_clock=False):
    """
    Nearest neighbour against nearest strictly better neighbour distances.
    Points without a better point are left out.
    """
    clock = _Clock(wall_clock)
    X, f = _subsample(sample, rng, SUBSAMPLE)
    neutral = {
        "nbc.nn_nb.sd_ratio": 1.0,
        "nbc.nn_nb.mean_ratio": 1.0,
        "nbc.nn_nb.cor": 0.0,
        "nbc.dist_ratio.coeff_var": 0.0,
        "nbc.nb_fitness.cor": 0.0,
    }
    n = len(f)
    if n < 2:
        return {**neutral, "nbc.costs_runtime": clock.value()}
    D = squareform(pdist(X.astype(bool), "hamming"))
    clock.add(n * n * X.shape[1])
    np.fill_diagonal(D, np.inf)
    nn = D.min(axis=1)
    better = f[None, :] > f[:, None]
    nb = np.where(better, D, np.inf).min(axis=1)
    has = np.isfinite(nb)
    if has.sum() < 2:
        return {**neutral, "nbc.costs_runtime": clock.value()}

    nn, nb, fh = nn[has], nb[has], f[has]
    positive = nn > 0
    dist_ratio = nb[positive] / nn[positive]
    coeff_var = 0.0
    if dist_ratio.size and dist_ratio.mean() > 0:
        coeff_var = float(dist_ratio.std() / dist_ratio.mean())
    return {
        "nbc.nn_nb.sd_ratio": _ratio(nn.std(), nb.std()),
        "nbc.nn_nb.mean_ratio": _ratio(nn.mean(), nb.mean()),
        "nbc.nn_nb.cor": _corr(nn, nb),
        "nbc.dist_ratio.coeff_var": coeff_var,
        "nbc.nb_fitness.cor": _corr(nb, fh),
        "nbc.costs_runtime": clock.value(),
    }


def trial_factors(instance, seed, wall_clock=False, metadata=None):
    """
    One trial: a walk sample and its 32 factors, in FACTOR_NAMES order.
    """
    walk_seed, feature_seed = seed.spawn(2)
    sample = random_walk_sample(instance, walk_seed)
    rng = np.random.default_rng(feature_seed)
    values = {}
    values.update(dispersion_features(sample, rng))
    values.update(meta_model_features(sample, rng, wall_clock, metadata))
    values.update(info_content_features(sample, wall_clock))
    values.update(nbc_features(sample, rng, wall_clock))
    return sample, [values[name] for name in FACTOR_NAMES]


def compute_factors(instance, master_seed, trials=TRIALS, wall_clock=False):
    """
    Mean of the per-trial factor vectors over `trials` seeds spawned from
    master_seed. The walk samples are kept for reuse as initial populations.
    """
    metadata = {"ridge_fallback": False, "trials": trials}
    started = time.perf_counter()
    samples = []
    rows = []
    for child in np.random.SeedSequence(master_seed).spawn(trials):
        sample, row = trial_factors(instance, child, wall_clock, metadata)
        samples.append(sample)
        rows.append(row)
    values = np.mean(np.asarray(rows, dtype=np.float64), axis=0)
    if not np.all(np.isfinite(values)):
        log.warning(f"non-finite factors for {getattr(instance, 'key', instance)} replaced by 0")
        values = np.nan_to_num(values, nan=0.0, posinf=0.0, neginf=0.0)
    metadata["wall_seconds"] = time.perf_counter() - started
    return FactorVector(values=tuple(float(v) for v in values), metadata=metadata, samples=tuple(samples))
