import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

WALK_FACTOR = 100


@dataclass(frozen=True, eq=False)
class WalkSample:
    """
    Points of a random walk with single bit flip steps and their fitness.
    """
    points: np.ndarray
    fitness: np.ndarray
    seed: object = None

    def __len__(self):
        return len(self.fitness)

    def initial_population(self, rng, size):
        """
        Pre-evaluated solutions drawn without replacement from the walk.
        """
        idx = rng.choice(len(self), size=min(size, len(self)), replace=False)
        return self.points[idx].copy(), self.fitness[idx].copy()


def random_walk_sample(instance, seed, length=None):
    """
    Walk of WALK_FACTOR * d points from a uniform random start, flipping one
    uniformly chosen bit per step.
    """
    d = instance.d
    n = length or WALK_FACTOR * d
    rng = np.random.default_rng(seed)
    start = rng.integers(0, 2, size=d, dtype=np.uint8)
    flips = np.zeros((n, d), dtype=np.uint8)
    flips[0] = start
    flips[np.arange(1, n), rng.integers(0, d, size=n - 1)] = 1
    points = np.bitwise_xor.accumulate(flips, axis=0)
    fitness = instance.evaluate_batch(points)
    return WalkSample(points=points, fitness=fitness, seed=seed)
