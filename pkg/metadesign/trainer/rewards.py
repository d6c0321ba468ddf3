"""
Rewards of generated programs: mean best fitness over every training
instance and run of a task.

Every run gets its own seed derived from the master seed and its position
(stream, task, epoch, batch member, instance, run), so rewards never depend
on evaluation order or on how runs are spread over worker processes.
"""
import logging

import numpy as np

from metadesign.interpreter.batch import RunJob, run_jobs

log = logging.getLogger(__name__)

STREAM_TRAIN = 0
STREAM_INFER = 1
STREAM_FISHER = 2
STREAM_SAMPLE = 3
STREAM_EVAL = 4


def seed_sequence(seed, *path):
    """
    Child SeedSequence of `seed` (an int or a SeedSequence) at `path`.
    """
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(path))
    return np.random.SeedSequence(seed, spawn_key=tuple(path))


def run_seed(seed, instance_index, run_index):
    return seed_sequence(seed, instance_index, run_index, 0)


def population_seed(seed, instance_index, run_index):
    return seed_sequence(seed, instance_index, run_index, 1)


def reward_jobs(program, task, seed, config):
    jobs = []
    for i, instance in enumerate(task.instances):
        for r in range(config.runs_per_instance):
            initial = task.initial_population(i, population_seed(seed, i, r), config.pop_size)
            jobs.append(RunJob(program=program, instance=instance, budget=config.train_budget,
                               pop_size=config.pop_size, seed=run_seed(seed, i, r), initial_pop=initial))
    return jobs


def evaluate_reward(program, task, seed, config):
    """
    Mean best fitness of `program` over the task's instances, each run
    runs_per_instance times with train_budget FEs.
    """
    return batch_rewards([program], task, [seed], config)[0]


def batch_rewards(programs, task, seeds, config):
    """
    Rewards of several programs, one seed each. All runs of the batch are
    submitted together and reduced by batch position.
    """
    per_program = [reward_jobs(p, task, s, config) for p, s in zip(programs, seeds)]
    results = run_jobs([job for jobs in per_program for job in jobs], workers=config.workers)
    rewards = []
    offset = 0
    for jobs in per_program:
        chunk = results[offset:offset + len(jobs)]
        offset += len(jobs)
        rewards.append(float(np.mean([r.best_fitness for r in chunk])))
    log.debug(f"rewards on {task.family_key}: {rewards}")
    return np.asarray(rewards, dtype=np.float64)


class RewardNormalizer:
    """
    Running min-max scaling of raw rewards to [0, 1] for one task.
    A batch with no spread maps to 0.5.
    """

    def __init__(self):
        self.low = None
        self.high = None

    def update(self, values):
        values = np.asarray(values, dtype=np.float64)
        low, high = float(values.min()), float(values.max())
        self.low = low if self.low is None else min(self.low, low)
        self.high = high if self.high is None else max(self.high, high)

    def normalize(self, values):
        values = np.asarray(values, dtype=np.float64)
        self.update(values)
        if values.max() == values.min() or self.high == self.low:
            return np.full(values.shape, 0.5)
        return (values - self.low) / (self.high - self.low)


class BaselineTracker:
    """
    Exponential moving average of batch mean normalized rewards. Before the
    first update the advantage is taken against the batch's own mean.
    """

    def __init__(self, decay=0.9):
        self.decay = decay
        self.b = None

    def advantages(self, normalized):
        normalized = np.asarray(normalized, dtype=np.float64)
        b = normalized.mean() if self.b is None else self.b
        return normalized - b

    def update(self, normalized):
        mean = float(np.mean(normalized))
        self.b = mean if self.b is None else self.decay * self.b + (1 - self.decay) * mean
        return self.b
