"""
Decoder-only transformer over program tokens.

Parameters are plain float64 tensors named after the roles they play
(W_seq, W_probl, W_q, W_k, W_v, W_o, W_l) so gradients and Fisher values
can be read per matrix. An optional problem-factor token is projected by
W_probl and placed at position 0; program tokens always sit at positions
1..n.
"""
import logging
import math
from dataclasses import asdict, dataclass

import numpy as np
import torch
from torch import nn

log = logging.getLogger(__name__)

LAYER_NORM_EPS = 1e-5


class PolicyError(ValueError):
    pass


@dataclass(frozen=True)
class PolicyHyper:
    d_model: int = 32
    heads: int = 8
    blocks: int = 2
    ffn_hidden: int = 128
    vocab: int = 54
    factor_dim: int = 32
    max_len: int = 40

    def __post_init__(self):
        if self.d_model % self.heads:
            raise PolicyError(f"d_model {self.d_model} is not divisible by {self.heads} heads")
        for name, value in self.as_dict().items():
            if value < 1:
                raise PolicyError(f"{name} must be positive, got {value}")

    def as_dict(self):
        return asdict(self)


def layer_norm(X, gain, bias, eps=LAYER_NORM_EPS):
    mean = X.mean(dim=-1, keepdim=True)
    var = X.var(dim=-1, unbiased=False, keepdim=True)
    return gain * (X - mean) / torch.sqrt(var + eps) + bias


def sinusoidal_encoding(length, d_model):
    position = torch.arange(length, dtype=torch.float64)[:, None]
    div_term = torch.exp(torch.arange(0, d_model, 2, dtype=torch.float64) * (-math.log(10000.0) / d_model))
    pe = torch.zeros(length, d_model, dtype=torch.float64)
    pe[:, 0::2] = torch.sin(position * div_term)
    pe[:, 1::2] = torch.cos(position * div_term)[:, :d_model // 2]
    return pe


def signed_log(x):
    return torch.sign(x) * torch.log1p(torch.abs(x))


def _param(generator, *shape, scale=1.0):
    return nn.Parameter(torch.randn(*shape, generator=generator, dtype=torch.float64) * scale)


class AttentionBlock(nn.Module):
    """
    Causal multi-head self-attention and a ReLU feed-forward layer, each
    followed by a residual connection and layer normalization.
    """

    def __init__(self, hyper, generator):
        super().__init__()
        d, h = hyper.d_model, hyper.ffn_hidden
        self.heads = hyper.heads
        self.W_q = _param(generator, d, d, scale=d ** -0.5)
        self.W_k = _param(generator, d, d, scale=d ** -0.5)
        self.W_v = _param(generator, d, d, scale=d ** -0.5)
        self.W_o = _param(generator, d, d, scale=d ** -0.5)
        self.ln1_gain = nn.Parameter(torch.ones(d, dtype=torch.float64))
        self.ln1_bias = nn.Parameter(torch.zeros(d, dtype=torch.float64))
        self.W1 = _param(generator, d, h, scale=d ** -0.5)
        self.b1 = nn.Parameter(torch.zeros(h, dtype=torch.float64))
        self.W2 = _param(generator, h, d, scale=h ** -0.5)
        self.b2 = nn.Parameter(torch.zeros(d, dtype=torch.float64))
        self.ln2_gain = nn.Parameter(torch.ones(d, dtype=torch.float64))
        self.ln2_bias = nn.Parameter(torch.zeros(d, dtype=torch.float64))

    def attention(self, X):
        T, d = X.shape
        S = self.heads
        dh = d // S
        Q = (X @ self.W_q).view(T, S, dh).transpose(0, 1)
        K = (X @ self.W_k).view(T, S, dh).transpose(0, 1)
        V = (X @ self.W_v).view(T, S, dh).transpose(0, 1)
        scores = Q @ K.transpose(1, 2) / math.sqrt(dh)
        future = torch.ones(T, T, dtype=torch.bool).triu(1)
        weights = torch.softmax(scores.masked_fill(future, float("-inf")), dim=-1)
        heads = (weights @ V).transpose(0, 1).reshape(T, d)
        return heads @ self.W_o, weights

    def forward(self, X):
        attended, weights = self.attention(X)
        X = layer_norm(X + attended, self.ln1_gain, self.ln1_bias)
        hidden = torch.relu(X @ self.W1 + self.b1) @ self.W2 + self.b2
        return layer_norm(X + hidden, self.ln2_gain, self.ln2_bias), weights


class PolicyNetwork(nn.Module):

    def __init__(self, hyper=None, seed=0):
        super().__init__()
        self.hyper = hyper or PolicyHyper()
        hp = self.hyper
        generator = torch.Generator().manual_seed(int(seed))
        self.W_seq = _param(generator, hp.vocab, hp.d_model, scale=hp.d_model ** -0.5)
        self.W_probl = _param(generator, hp.factor_dim, hp.d_model, scale=hp.factor_dim ** -0.5)
        self.blocks = nn.ModuleList([AttentionBlock(hp, generator) for _ in range(hp.blocks)])
        self.W_l = _param(generator, hp.d_model, hp.vocab, scale=hp.d_model ** -0.5)
        self.register_buffer("positional", sinusoidal_encoding(hp.max_len + 1, hp.d_model))
        # test hook: added to the output logits
        self.register_buffer("logit_bias", torch.zeros(hp.vocab, dtype=torch.float64))
        self.use_positional = True

    def __repr__(self):
        return f"<PolicyNetwork({self.hyper})>"

    def factor_tensor(self, factor):
        if hasattr(factor, "to_array"):
            factor = factor.to_array()
        x = torch.as_tensor(np.asarray(factor, dtype=np.float64))
        if x.shape != (self.hyper.factor_dim,):
            raise PolicyError(f"factor vector must have {self.hyper.factor_dim} entries, got {tuple(x.shape)}")
        return x

    def embed(self, tokens, factor=None):
        tokens = [int(t) for t in tokens]
        if not tokens:
            raise PolicyError("empty token prefix")
        if len(tokens) > self.hyper.max_len:
            raise PolicyError(f"prefix of {len(tokens)} tokens exceeds max_len {self.hyper.max_len}")
        if min(tokens) < 0 or max(tokens) >= self.hyper.vocab:
            raise PolicyError(f"token index out of range in {tokens}")
        X = self.W_seq[torch.as_tensor(tokens)]
        if self.use_positional:
            X = X + self.positional[1:len(tokens) + 1]
        if factor is not None:
            f = signed_log(self.factor_tensor(factor)) @ self.W_probl
            if self.use_positional:
                f = f + self.positional[0]
            X = torch.cat([f[None, :], X])
        return X

    def forward_all(self, tokens, factor=None, return_attention=False):
        """
        Logits for the next token after every prefix of `tokens`, one row per
        program token.
        """
        X = self.embed(tokens, factor)
        attention = []
        for block in self.blocks:
            X, weights = block(X)
            attention.append(weights)
        if factor is not None:
            X = X[1:]
        logits = X @ self.W_l + self.logit_bias
        if return_attention:
            return logits, attention
        return logits

    def forward(self, tokens, factor=None, return_attention=False):
        if return_attention:
            logits, attention = self.forward_all(tokens, factor, return_attention=True)
            return logits[-1], attention
        return self.forward_all(tokens, factor)[-1]

    def parameter_count(self):
        return sum(p.numel() for p in self.parameters())
