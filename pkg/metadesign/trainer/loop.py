"""
Training, inference and continual training of the program policy.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import torch

from metadesign.design.program import parse_tokens, to_text
from metadesign.models.records import TrainLogRow
from metadesign.policy.network import PolicyNetwork
from metadesign.policy.sampling import sample_sequence, sequence_logprob
from metadesign.trainer import rewards as rw
from metadesign.trainer.ewc import EwcPenalty, estimate_fisher
from metadesign.trainer.ppo import PpoBatch, ppo_update

log = logging.getLogger(__name__)


@dataclass
class TrainLog:
    task_key: str
    rows: list = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def as_dicts(self):
        return [row.as_dict() for row in self.rows]


@dataclass(frozen=True)
class Candidate:
    program: object
    tokens: tuple
    reward: float

    @property
    def text(self):
        return to_text(self.program)

    def as_dict(self, program_id=None):
        data = {"text": self.text, "tokens": list(self.program.tokens), "reward": self.reward}
        if program_id is not None:
            data = {"program_id": program_id, **data}
        return data


@dataclass
class InferenceResult:
    best: Candidate
    candidates: list

    @property
    def mean_reward(self):
        return float(np.mean([c.reward for c in self.candidates]))


@dataclass
class ContinualResult:
    policy: object
    logs: list
    retention: list
    inferred: list
    penalty: object


def new_policy(config):
    return PolicyNetwork(config.policy_hyper(), seed=config.master_seed)


def length_histogram(sequences):
    counts = Counter(len(t) for t in sequences)
    return " ".join(f"{length}:{counts[length]}" for length in sorted(counts))


def behaviour_logprobs(policy, sequences, factor=None, allow_events=False):
    """
    Log-probabilities of the sampled sequences under the current policy,
    computed the way ppo_loss computes them so the first ratio is exactly 1.
    """
    with torch.no_grad():
        return np.array([float(sequence_logprob(policy, tokens, factor, allow_events)) for tokens in sequences])


def train(task, config, policy=None, penalty=None):
    """
    PPO training of `policy` (a fresh one when None) on `task` for
    config.epochs epochs. Returns (policy, TrainLog).
    """
    policy = policy if policy is not None else new_policy(config)
    optimizer = torch.optim.Adam(policy.parameters(), lr=config.lr)
    scheduler = torch.optim.lr_scheduler.CosineAnnealingLR(
        optimizer, T_max=config.epochs, eta_min=config.lr * config.lr_min_ratio)
    tracker = rw.BaselineTracker(config.baseline_decay)
    normalizer = rw.RewardNormalizer()
    rng = np.random.default_rng(rw.seed_sequence(config.master_seed, rw.STREAM_SAMPLE, task.index))
    train_log = TrainLog(task.key)

    for epoch in range(config.epochs):
        lr = optimizer.param_groups[0]["lr"]
        samples = [sample_sequence(policy, rng, task.factors, config.allow_events) for _ in range(config.batch_size)]
        sequences = [tokens for tokens, _ in samples]
        programs = [parse_tokens(tokens) for tokens in sequences]
        seeds = [rw.seed_sequence(config.master_seed, rw.STREAM_TRAIN, task.index, epoch, k)
                 for k in range(config.batch_size)]
        raw = rw.batch_rewards(programs, task, seeds, config)
        batch = PpoBatch(
            tokens=sequences,
            old_logprobs=behaviour_logprobs(policy, sequences, task.factors, config.allow_events),
            rewards=raw,
            normalized=normalizer.normalize(raw),
        )
        loss = ppo_update(policy, optimizer, batch, tracker, config, task.factors, penalty)
        scheduler.step()
        row = TrainLogRow(
            epoch=epoch + 1,
            mean_reward=float(raw.mean()),
            max_reward=float(raw.max()),
            baseline=float(tracker.b),
            loss=loss,
            lr=lr,
            length_histogram=length_histogram(batch.tokens),
        )
        train_log.rows.append(row)
        log.info(f"{task.key} epoch {row.epoch}/{config.epochs}: mean R {row.mean_reward:.4g} "
                 f"max R {row.max_reward:.4g} b {row.baseline:.3f} loss {row.loss:.4g}")
    return policy, train_log


def infer(policy, task, config, seed=None, samples=None):
    """
    Sample `samples` programs (config.infer_samples by default) and return
    them all with the best one. Candidates share their run seeds; ties go to
    the shorter program, then the lower token sequence.
    """
    seed = config.master_seed if seed is None else seed
    samples = samples or config.infer_samples
    rng = np.random.default_rng(rw.seed_sequence(seed, rw.STREAM_INFER, task.index))
    with torch.no_grad():
        drawn = [sample_sequence(policy, rng, task.factors, config.allow_events)[0] for _ in range(samples)]
    programs = [parse_tokens(tokens) for tokens in drawn]
    reward_seed = rw.seed_sequence(seed, rw.STREAM_EVAL, task.index)
    rewards = rw.batch_rewards(programs, task, [reward_seed] * samples, config)
    candidates = [Candidate(p, t, float(r)) for p, t, r in zip(programs, drawn, rewards)]
    best = min(candidates, key=lambda c: (-c.reward, len(c.tokens), c.tokens))
    log.info(f"inferred on {task.key}: {best.text} (R {best.reward:.4g})")
    return InferenceResult(best=best, candidates=candidates)


def train_continual(tasks, config):
    """
    Train one policy on `tasks` in order. After each task the diagonal
    Fisher information is consolidated into the EWC penalty and the policy
    is evaluated on every task, giving one row of the retention matrix.
    """
    tasks = list(tasks)
    policy = new_policy(config)
    penalty = EwcPenalty(config.ewc_lambda)
    logs, retention, inferred = [], [], []
    for t, task in enumerate(tasks):
        log.info(f"continual task {t + 1}/{len(tasks)}: {task.key}")
        policy, train_log = train(task, config, policy=policy, penalty=penalty)
        logs.append(train_log)
        fisher_rng = np.random.default_rng(rw.seed_sequence(config.master_seed, rw.STREAM_FISHER, task.index))
        penalty.consolidate(estimate_fisher(policy, fisher_rng, config.fisher_samples, task.factors,
                                            config.allow_events))
        results = [infer(policy, other, config) for other in tasks]
        retention.append([r.mean_reward for r in results])
        inferred.append(results[t].best)
    return ContinualResult(policy=policy, logs=logs, retention=retention, inferred=inferred, penalty=penalty)
