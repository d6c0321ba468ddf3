"""
Population operators of the interpreter.

Populations are (X, f) pairs: X a uint8 array of bit strings (rows), f the
aligned float64 fitness values. Every random draw goes through the numpy
Generator passed in, in a fixed order.
"""
import logging
import math
from collections import deque

import numpy as np

log = logging.getLogger(__name__)

SA_INITIAL_ACCEPTANCE = 0.8
SA_COOLING = 0.995
ROUND_ROBIN_OPPONENTS = 10


def round_half_up(x):
    return int(math.floor(x + 0.5))


def decode_count(fraction, d):
    """
    Number of positions a fraction of d stands for, at least 1 and at most d.
    """
    return min(d, max(1, round_half_up(fraction * d)))


def tabu_capacity(fraction, d):
    return max(1, round_half_up(fraction * d))


def random_bits(rng, m, d):
    return rng.integers(0, 2, size=(m, d), dtype=np.uint8)


# -- choose ---------------------------------------------------------------

def choose_traverse(f):
    return np.arange(len(f))


def choose_roulette(f, rng, size):
    f_min, f_max = f.min(), f.max()
    if f_max - f_min <= 0:
        return rng.integers(0, len(f), size=size)
    delta = 1e-9 * max(1.0, abs(f_max - f_min))
    weights = f - f_min + delta
    return rng.choice(len(f), size=size, p=weights / weights.sum())


def choose_tournament(f, rng, size):
    a = rng.integers(0, len(f), size=size)
    b = rng.integers(0, len(f), size=size)
    return np.where(f[a] >= f[b], a, b)


def choose_niche(X, f, rng, size):
    """
    Greedy Hamming clustering with radius ceil(d/10): the best unassigned
    solution leads a niche. Leaders are returned best first and the rest of
    the slots are filled by binary tournaments.
    """
    radius = math.ceil(X.shape[1] / 10)
    assigned = np.zeros(len(f), dtype=bool)
    leaders = []
    for i in np.argsort(-f, kind="stable"):
        if assigned[i]:
            continue
        leaders.append(i)
        assigned |= (X != X[i]).sum(axis=1) <= radius
    leaders = np.asarray(leaders[:size], dtype=np.int64)
    if len(leaders) < size:
        leaders = np.concatenate([leaders, choose_tournament(f, rng, size - len(leaders))])
    return leaders


# -- search ---------------------------------------------------------------

def pick_mates(rng, k):
    """
    A random mate index for every row, distinct from the row itself when k > 1.
    """
    if k < 2:
        return np.arange(k)
    j = rng.integers(0, k - 1, size=k)
    return j + (j >= np.arange(k))


def reset_n(X, fraction, rng):
    k, d = X.shape
    n = decode_count(fraction, d)
    positions = np.argsort(rng.random((k, d)), axis=1)[:, :n]
    Y = X.copy()
    Y[np.arange(k)[:, None], positions] ^= 1
    return Y


def reset_rand(X, p, rng):
    flips = rng.random(X.shape) < p
    return X ^ flips.astype(np.uint8)


# creep on a binary domain is a random reset
reset_creep = reset_rand


def cross_n(X, fraction, rng):
    k, d = X.shape
    mates = pick_mates(rng, k)
    if d < 2:
        return X[mates].copy()
    n = min(d - 1, max(1, round_half_up(fraction * d)))
    cuts = np.argsort(rng.random((k, d - 1)), axis=1)[:, :n] + 1
    toggles = np.zeros((k, d + 1), dtype=np.int64)
    toggles[np.arange(k)[:, None], cuts] = 1
    from_mate = np.cumsum(toggles, axis=1)[:, :d] % 2 == 1
    return np.where(from_mate, X[mates], X)


def cross_uniform(X, p, rng):
    mates = pick_mates(rng, X.shape[0])
    take = rng.random(X.shape) < p
    return np.where(take, X[mates], X)


def reinitialize(X, rng):
    return random_bits(rng, X.shape[0], X.shape[1])


# -- select ---------------------------------------------------------------

def align(old_X, old_f, new_X, new_f):
    """
    Truncate or pad the new set to the old set's size, padding with old entries.
    """
    P = len(old_f)
    k = len(new_f)
    if k == P:
        return new_X, new_f
    log.debug(f"select size mismatch: {k} offspring for {P} slots")
    if k > P:
        return new_X[:P], new_f[:P]
    return np.concatenate([new_X, old_X[k:]]), np.concatenate([new_f, old_f[k:]])


def select_greedy(old_X, old_f, new_X, new_f, size):
    X = np.concatenate([old_X, new_X])
    f = np.concatenate([old_f, new_f])
    order = np.argsort(-f, kind="stable")[:size]
    return X[order], f[order]


def select_pairwise(old_X, old_f, new_X, new_f):
    new_X, new_f = align(old_X, old_f, new_X, new_f)
    take = new_f >= old_f
    return np.where(take[:, None], new_X, old_X), np.where(take, new_f, old_f)


def select_round_robin(old_X, old_f, new_X, new_f, size, rng):
    X = np.concatenate([old_X, new_X])
    f = np.concatenate([old_f, new_f])
    N = len(f)
    opponents = rng.integers(0, N, size=(N, ROUND_ROBIN_OPPONENTS))
    wins = (f[:, None] > f[opponents]).sum(axis=1)
    order = np.lexsort((np.arange(N), -f, -wins))[:size]
    return X[order], f[order]


def select_always(old_X, old_f, new_X, new_f):
    return align(old_X, old_f, new_X, new_f)


class Annealing:
    """
    Metropolis acceptance. The temperature is calibrated on the first call
    that sees deteriorations so their mean acceptance is 0.8, and cooled by
    0.995 after every call from then on.
    """

    def __init__(self):
        self.temperature = None

    def select(self, old_X, old_f, new_X, new_f, rng):
        new_X, new_f = align(old_X, old_f, new_X, new_f)
        delta = old_f - new_f
        u = rng.random(len(old_f))
        if self.temperature is None:
            worse = delta[delta > 0]
            if worse.size:
                self.temperature = -worse.mean() / math.log(SA_INITIAL_ACCEPTANCE)
        accept = delta <= 0
        if self.temperature is not None:
            with np.errstate(over="ignore", under="ignore"):
                accept |= u < np.exp(-delta / self.temperature)
            self.temperature *= SA_COOLING
        return np.where(accept[:, None], new_X, old_X), np.where(accept, new_f, old_f)


class TabuList:
    """
    Pairwise selection that refuses solutions remembered in a bounded list,
    unless they beat the aspiration fitness.
    """

    def __init__(self, capacity):
        self.capacity = capacity
        self.entries = deque(maxlen=capacity)

    def __contains__(self, x):
        return self.key(x) in self.entries

    @staticmethod
    def key(x):
        return np.packbits(x).tobytes()

    def push(self, x):
        self.entries.append(self.key(x))

    def select(self, old_X, old_f, new_X, new_f, aspiration):
        k = min(len(new_f), len(old_f))
        X = old_X.copy()
        f = old_f.copy()
        for i in range(k):
            if new_f[i] < old_f[i]:
                continue
            key = self.key(new_X[i])
            if key in self.entries and not new_f[i] > aspiration:
                continue
            X[i] = new_X[i]
            f[i] = new_f[i]
            self.entries.append(key)
        return X, f
