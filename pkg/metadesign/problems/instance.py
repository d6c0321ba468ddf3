import logging
import math
from dataclasses import dataclass

import numpy as np

from metadesign.models.enums import (
    INTEGER_FAMILIES,
    SQUARE_FAMILIES,
    ProblemFamily,
    WModelKind,
)
from metadesign.problems import functions as fn

log = logging.getLogger(__name__)

# Rows evaluated at once, bounds temporary memory for large batches
EVAL_CHUNK = 4096


class ProblemError(ValueError):
    pass


@dataclass(frozen=True)
class WModelLayer:
    kind: WModelKind
    value: int

    def to_key(self):
        return f"{self.kind.value}{self.value}"


class ProblemInstance:
    """
    A pseudo-Boolean objective over bit strings of length d, optionally wrapped
    by W-model layers. Immutable after construction; evaluation is pure.
    """

    def __init__(self, family, d, wmodel=(), seed=1, graph=None):
        self.family = ProblemFamily(family)
        self.d = int(d)
        self.wmodel = tuple(wmodel)
        self.seed = int(seed)
        self._bit_plan = []
        self._ruggedness = [layer.value for layer in self.wmodel if layer.kind is WModelKind.RUGGEDNESS]

        length = self.d
        for index, layer in enumerate(self.wmodel):
            layer_seed = [self.seed, index + 1]
            if layer.kind is WModelKind.DUMMY:
                if not 1 <= layer.value <= length:
                    raise ProblemError(f"dummy keeps {layer.value} bits but only {length} are available")
                self._bit_plan.append((layer.kind, fn.dummy_positions(length, layer.value, layer_seed)))
                length = layer.value
            elif layer.kind is WModelKind.NEUTRALITY:
                if layer.value < 1:
                    raise ProblemError("neutrality block size must be positive")
                self._bit_plan.append((layer.kind, layer.value))
                length = length // layer.value + length % layer.value
            elif layer.kind is WModelKind.EPISTASIS:
                if not 1 <= layer.value <= 8:
                    raise ProblemError(f"epistasis block size must lie in [1, 8], got {layer.value}")
                self._bit_plan.append((layer.kind, (layer.value, fn.epistasis_permutation(layer.value, layer_seed))))
            elif layer.kind is WModelKind.RUGGEDNESS:
                if self.family not in INTEGER_FAMILIES or self.family is ProblemFamily.MIVS:
                    raise ProblemError(
                        f"ruggedness needs integer fitness with a known optimum, not {self.family.value}")
                if layer.value < 0:
                    raise ProblemError("ruggedness must be non-negative")
        self.working_length = length
        self._check_length(length)

        self.graph = None
        self._lines = None
        if self.family is ProblemFamily.MIVS:
            if graph is None:
                graph = fn.random_graph(length, np.random.default_rng([self.seed, 0]))
            self.graph = np.asarray(graph, dtype=np.int64).reshape(-1, 2)
            if self.graph.size and (self.graph.min() < 0 or self.graph.max() >= length):
                raise ProblemError("graph vertex out of range")
        elif self.family is ProblemFamily.NQUEENS:
            self._lines = fn.queens_lines(math.isqrt(length))

        self.known_optimum = self._optimum(length)

    def _check_length(self, length):
        if self.d < 1 or length < 1:
            raise ProblemError(f"invalid dimension {self.d} for {self.family.value}")
        if self.family in SQUARE_FAMILIES and math.isqrt(length) ** 2 != length:
            raise ProblemError(f"{self.family.value} needs a perfect square length, got {length}")
        if self.family is ProblemFamily.LABS and length < 2:
            raise ProblemError("labs needs at least 2 bits")

    def _optimum(self, n):
        family = self.family
        if family in (ProblemFamily.ONEMAX, ProblemFamily.LEADINGONES, ProblemFamily.ISING_RING):
            return float(n)
        if family is ProblemFamily.HARMONIC:
            return float(n * (n + 1) // 2)
        if family is ProblemFamily.ISING_TORUS:
            return float(2 * n)
        if family is ProblemFamily.NQUEENS:
            return float(fn.nqueens_optimum(math.isqrt(n)))
        return None

    @property
    def key(self):
        parts = [self.family.value] + [layer.to_key() for layer in self.wmodel]
        return "+".join(parts) + f":{self.d}"

    def __repr__(self):
        return f"<ProblemInstance(key={self.key}, seed={self.seed})>"

    def __str__(self):
        return f"ProblemInstance: {self.key} (optimum {self.known_optimum})"

    def as_dict(self):
        return {
            "key": self.key,
            "family": self.family.value,
            "d": self.d,
            "wmodel": [layer.to_key() for layer in self.wmodel],
            "seed": self.seed,
            "known_optimum": self.known_optimum,
            "graph_edges": None if self.graph is None else int(len(self.graph)),
        }

    def transform(self, X):
        """
        Apply the bit-level W-model layers in order.
        """
        for kind, arg in self._bit_plan:
            if kind is WModelKind.DUMMY:
                X = fn.apply_dummy(X, arg)
            elif kind is WModelKind.NEUTRALITY:
                X = fn.apply_neutrality(X, arg)
            else:
                X = fn.apply_epistasis(X, arg[0], arg[1])
        return X

    def _base(self, X):
        family = self.family
        if family is ProblemFamily.ONEMAX:
            return fn.onemax(X)
        if family is ProblemFamily.LEADINGONES:
            return fn.leadingones(X)
        if family is ProblemFamily.HARMONIC:
            return fn.harmonic(X)
        if family is ProblemFamily.LABS:
            return fn.labs(X)
        if family is ProblemFamily.ISING_RING:
            return fn.ising_ring(X)
        if family is ProblemFamily.ISING_TORUS:
            return fn.ising_torus(X)
        if family is ProblemFamily.MIVS:
            return fn.mivs(X, self.graph)
        return fn.nqueens(X, self._lines)

    def evaluate_batch(self, X):
        X = np.asarray(X, dtype=np.uint8)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise ProblemError(f"expected bit strings of length {self.d}, got shape {X.shape}")
        out = np.empty(X.shape[0], dtype=np.float64)
        for start in range(0, X.shape[0], EVAL_CHUNK):
            chunk = self.transform(X[start:start + EVAL_CHUNK])
            f = self._base(chunk)
            for gamma in self._ruggedness:
                f = fn.apply_ruggedness(f, gamma, self.known_optimum)
            out[start:start + EVAL_CHUNK] = f
        return out

    def evaluate(self, x):
        x = np.asarray(x, dtype=np.uint8)
        if x.ndim != 1:
            raise ProblemError("evaluate expects a single bit string")
        return float(self.evaluate_batch(x[None, :])[0])


def evaluate(instance, x):
    return instance.evaluate(x)


def make_instance(family, d, wmodel=(), seed=1, graph=None):
    """
    Build a reproducible ProblemInstance, raising ProblemError for invalid
    family/dimension combinations.
    """
    try:
        family = ProblemFamily(family)
    except ValueError:
        raise ProblemError(f"unknown problem family {family!r}")
    return ProblemInstance(family, d, wmodel=wmodel, seed=seed, graph=graph)
