"""
Elastic weight consolidation for training on a sequence of tasks.
"""
import logging
from dataclasses import dataclass

import torch

from metadesign.policy.sampling import gradient, sample_sequence, sequence_logprob

log = logging.getLogger(__name__)


@dataclass
class FisherDiag:
    values: dict
    anchor: dict

    def total(self):
        return float(sum(v.sum() for v in self.values.values()))


def estimate_fisher(policy, rng, n_samples=256, factor=None, allow_events=False):
    """
    Diagonal Fisher information: mean squared gradient of the log-probability
    of sequences sampled from the policy itself.
    """
    values = {name: torch.zeros_like(p) for name, p in policy.named_parameters()}
    for _ in range(n_samples):
        tokens, _ = sample_sequence(policy, rng, factor, allow_events)
        grads = gradient(policy, lambda: sequence_logprob(policy, tokens, factor, allow_events))
        for name, g in grads.items():
            values[name] += g.detach() ** 2 / n_samples
    anchor = {name: p.detach().clone() for name, p in policy.named_parameters()}
    return FisherDiag(values=values, anchor=anchor)


class EwcPenalty:
    """
    (lambda / 2) * sum_r F_r (theta_r - theta*_r)^2 over consolidated tasks.
    Consolidation adds the new Fisher values and moves the anchor.
    """

    def __init__(self, ewc_lambda=200.0):
        self.ewc_lambda = ewc_lambda
        self.fisher = None
        self.anchor = None
        self.tasks = 0

    def penalty(self, policy):
        total = torch.zeros((), dtype=torch.float64)
        if self.fisher is None:
            return total
        for name, p in policy.named_parameters():
            total = total + (self.fisher[name] * (p - self.anchor[name]) ** 2).sum()
        return total

    def apply(self, loss, policy):
        if self.ewc_lambda == 0 or self.fisher is None:
            return loss
        return loss + self.ewc_lambda / 2 * self.penalty(policy)

    def consolidate(self, fisher_diag):
        if self.fisher is None:
            self.fisher = {k: v.clone() for k, v in fisher_diag.values.items()}
        else:
            for k, v in fisher_diag.values.items():
                self.fisher[k] = self.fisher[k] + v
        self.anchor = {k: v.clone() for k, v in fisher_diag.anchor.items()}
        self.tasks += 1
        log.debug(f"consolidated task {self.tasks}: fisher mass {fisher_diag.total():.4g}")
