"""
Grammar constrained sampling and exact sequence log-probabilities.
"""
import logging

import numpy as np
import torch

from metadesign.design.space import GrammarError, get_grammar
from metadesign.models.enums import Phase
from metadesign.policy.network import PolicyError

log = logging.getLogger(__name__)


def masked_log_softmax(logits, mask):
    """
    Log-probabilities with forbidden entries set to -inf before the softmax.
    Works on a single logit row or on a (T, M) matrix with matching masks.
    """
    mask = torch.tensor(np.array(mask, dtype=bool))
    if not mask.any(dim=-1).all():
        raise PolicyError("every token is masked")
    return torch.log_softmax(logits.masked_fill(~mask, float("-inf")), dim=-1)


def masked_probabilities(logits, mask):
    return masked_log_softmax(logits, mask).exp()


def masked_sample(logits, mask, rng):
    """
    Draw one allowed token. Returns (token, log_prob).
    """
    logp = masked_log_softmax(logits.detach(), mask)
    allowed = np.flatnonzero(np.asarray(mask, dtype=bool))
    cdf = np.cumsum(logp[allowed].exp().numpy())
    u = rng.random() * cdf[-1]
    pick = min(int(np.searchsorted(cdf, u, side="right")), len(allowed) - 1)
    token = int(allowed[pick])
    return token, float(logp[token])


def sample_sequence(policy, rng, factor=None, allow_events=False):
    """
    Sample a complete token sequence from `begin` to `end`.
    Returns (tokens, total_log_prob).
    """
    grammar = get_grammar(allow_events)
    state = grammar.initial()
    tokens = [grammar.vocab.begin]
    total = 0.0
    with torch.no_grad():
        while state.phase is not Phase.DONE:
            if len(tokens) >= policy.hyper.max_len:
                raise PolicyError(f"sequence reached max_len {policy.hyper.max_len} without end")
            logits = policy(tokens, factor)
            token, logp = masked_sample(logits, grammar.next_mask(state), rng)
            state = grammar.advance(state, token)
            tokens.append(token)
            total += logp
    return tuple(tokens), total


def sequence_logprob(policy, tokens, factor=None, allow_events=False):
    """
    Differentiable log-probability of `tokens` under the masks the sampler
    used. Forced positions contribute 0.
    """
    tokens = [int(t) for t in tokens]
    try:
        masks = get_grammar(allow_events).masks_for(tokens)
    except GrammarError as e:
        raise PolicyError(f"invalid token order: {e}")
    logits = policy.forward_all(tokens[:-1], factor)
    logp = masked_log_softmax(logits, masks)
    chosen = torch.as_tensor(tokens[1:])
    return logp[torch.arange(len(chosen)), chosen].sum()


def gradient(policy, loss_closure):
    """
    Reverse-mode gradients of the scalar returned by `loss_closure`, one
    tensor per named parameter. Parameters the loss does not touch get zeros.
    """
    names, params = zip(*policy.named_parameters())
    loss = loss_closure()
    if not torch.is_tensor(loss) or not loss.requires_grad:
        return {name: torch.zeros_like(p) for name, p in zip(names, params)}
    grads = torch.autograd.grad(loss, params, allow_unused=True)
    return {
        name: torch.zeros_like(p) if g is None else g
        for name, p, g in zip(names, params, grads)
    }
