"""
Clipped surrogate update with a sequence level importance ratio.
"""
import logging
from dataclasses import dataclass

import numpy as np
import torch

from metadesign.policy.sampling import sequence_logprob

log = logging.getLogger(__name__)


@dataclass
class PpoBatch:
    tokens: list
    old_logprobs: np.ndarray
    rewards: np.ndarray
    normalized: np.ndarray

    def __len__(self):
        return len(self.tokens)


def clipped_objective(ratio, advantage, clip_eps):
    """
    Per sample min(h * A, clip(h, 1 - eps, 1 + eps) * A).
    """
    ratio = torch.as_tensor(ratio, dtype=torch.float64)
    advantage = torch.as_tensor(advantage, dtype=torch.float64)
    return torch.min(ratio * advantage, torch.clamp(ratio, 1 - clip_eps, 1 + clip_eps) * advantage)


def ppo_loss(policy, batch, advantages, clip_eps, factor=None, allow_events=False):
    """
    Returns (loss, ratios). The loss is the negated mean clipped objective.
    """
    logps = torch.stack([sequence_logprob(policy, t, factor, allow_events) for t in batch.tokens])
    old = torch.as_tensor(batch.old_logprobs, dtype=torch.float64)
    ratio = torch.exp(logps - old)
    return -clipped_objective(ratio, advantages, clip_eps).mean(), ratio


def ppo_update(policy, optimizer, batch, tracker, config, factor=None, penalty=None):
    """
    ppo_iters optimizer steps on one batch, then one baseline update.
    Steps whose loss is not finite are skipped. Returns the mean loss of the
    steps taken (nan if none).
    """
    advantages = tracker.advantages(batch.normalized)
    losses = []
    for iteration in range(config.ppo_iters):
        optimizer.zero_grad()
        loss, _ = ppo_loss(policy, batch, advantages, config.clip_eps, factor, config.allow_events)
        if penalty is not None:
            loss = penalty.apply(loss, policy)
        if not torch.isfinite(loss):
            log.warning(f"non-finite loss at ppo iteration {iteration}, step skipped")
            continue
        loss.backward()
        optimizer.step()
        losses.append(float(loss.detach()))
    tracker.update(batch.normalized)
    return float(np.mean(losses)) if losses else float("nan")
