"""
Pseudo-Boolean objective functions and W-model layers.

Every objective takes a 2D uint8 array (rows are bit strings) and returns a
float64 array of fitness values (maximization).
"""
import math

import numpy as np


def onemax(X):
    return X.sum(axis=1, dtype=np.int64).astype(np.float64)


def leadingones(X):
    return np.cumprod(X, axis=1, dtype=np.int64).sum(axis=1).astype(np.float64)


def harmonic(X):
    weights = np.arange(1, X.shape[1] + 1, dtype=np.int64)
    return (X.astype(np.int64) @ weights).astype(np.float64)


def labs(X):
    """
    Merit factor N^2 / (2E) of the +-1 sequence, E the sum of squared
    aperiodic autocorrelations.
    """
    n = X.shape[1]
    s = 2 * X.astype(np.int64) - 1
    energy = np.zeros(X.shape[0], dtype=np.int64)
    for k in range(1, n):
        c = (s[:, :-k] * s[:, k:]).sum(axis=1)
        energy += c * c
    return (n * n) / (2.0 * energy)


def ising_ring(X):
    return (X == np.roll(X, -1, axis=1)).sum(axis=1).astype(np.float64)


def ising_torus(X):
    n = math.isqrt(X.shape[1])
    grid = X.reshape(X.shape[0], n, n)
    right = grid == np.roll(grid, -1, axis=2)
    down = grid == np.roll(grid, -1, axis=1)
    return (right.sum(axis=(1, 2)) + down.sum(axis=(1, 2))).astype(np.float64)


def mivs(X, edges):
    """
    Selected vertices minus two per edge with both endpoints selected.
    """
    selected = X.sum(axis=1, dtype=np.int64)
    if len(edges) == 0:
        return selected.astype(np.float64)
    u, v = edges[:, 0], edges[:, 1]
    bad = (X[:, u] & X[:, v]).sum(axis=1, dtype=np.int64)
    return (selected - 2 * bad).astype(np.float64)


def queens_lines(n):
    """
    Incidence matrix (lines x cells) for rows, columns and both diagonals.
    """
    cells = np.arange(n * n)
    r, c = cells // n, cells % n
    lines = []
    for key, count in ((r, n), (c, n), (r + c, 2 * n - 1), (r - c + n - 1, 2 * n - 1)):
        incidence = np.zeros((count, n * n), dtype=np.int64)
        incidence[key, cells] = 1
        lines.append(incidence)
    return np.vstack(lines)


def nqueens(X, lines):
    n = math.isqrt(X.shape[1])
    counts = X.astype(np.int64) @ lines.T
    pairs = (counts * (counts - 1) // 2).sum(axis=1)
    return (X.sum(axis=1, dtype=np.int64) - n * pairs).astype(np.float64)


def nqueens_optimum(n):
    return {1: 1, 2: 1, 3: 2}.get(n, n)


def random_graph(d, rng, p=None):
    """
    Edges (i < j) of a seeded random graph with edge probability min(1, 4/d).
    """
    if p is None:
        p = min(1.0, 4.0 / d)
    i, j = np.triu_indices(d, k=1)
    keep = rng.random(i.size) < p
    return np.stack([i[keep], j[keep]], axis=1).astype(np.int64)


def apply_dummy(X, positions):
    """
    Keep only the fixed subset of positions.
    """
    return X[:, positions]


def dummy_positions(d, m, seed):
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(d, size=m, replace=False))


def apply_neutrality(X, mu):
    """
    Map every mu-block to its majority bit (ties go to 0); remainder bits pass through.
    """
    if mu == 1:
        return X
    m, d = X.shape
    blocks = d // mu
    head = X[:, :blocks * mu].reshape(m, blocks, mu).sum(axis=2, dtype=np.int64)
    majority = (2 * head > mu).astype(np.uint8)
    return np.concatenate([majority, X[:, blocks * mu:]], axis=1)


def epistasis_permutation(nu, seed):
    return np.random.default_rng(seed).permutation(2 ** nu)


def apply_epistasis(X, nu, permutation):
    """
    Replace every nu-bit block by the image of its value under a fixed
    bijection of {0, ..., 2^nu - 1}; remainder bits pass through.
    """
    m, d = X.shape
    blocks = d // nu
    if blocks == 0:
        return X
    shifts = np.arange(nu - 1, -1, -1, dtype=np.int64)
    head = X[:, :blocks * nu].reshape(m, blocks, nu).astype(np.int64)
    values = (head << shifts).sum(axis=2)
    mapped = permutation[values]
    bits = ((mapped[..., None] >> shifts) & 1).astype(np.uint8)
    return np.concatenate([bits.reshape(m, blocks * nu), X[:, blocks * nu:]], axis=1)


def apply_ruggedness(f, gamma, f_max):
    """
    Swap the fitness value pairs (2i+1, 2i+2) for i < gamma whenever 2i+2 < f_max.
    Values outside [0, f_max] are left alone, so f_max is preserved.
    """
    f = np.asarray(f, dtype=np.float64)
    if gamma <= 0:
        return f
    out = f.copy()
    integral = (f == np.floor(f)) & (f >= 1) & (f < f_max)
    fi = f.astype(np.int64)
    pair = (fi - 1) // 2
    swap = integral & (pair < gamma) & (2 * pair + 2 < f_max)
    odd = fi % 2 == 1
    out[swap & odd] = f[swap & odd] + 1
    out[swap & ~odd] = f[swap & ~odd] - 1
    return out
