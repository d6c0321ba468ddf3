"""
Token vocabulary, component descriptors, hyperparameter grids and the
grammar that decides which tokens may follow a prefix.
"""
import logging
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache

import numpy as np

from metadesign.models.enums import (
    EVENT_NAMES,
    POINTER_NAMES,
    ComponentCategory,
    ParamKind,
    Phase,
    PointerKind,
    TokenKind,
)

log = logging.getLogger(__name__)

N_GRID = (0.01, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45)
P_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
COUNT_PERCENTS = (1, 5, 10, 15, 20)
FORK_OFFSETS = (1, 2, 3, 4, 5)
MAX_COMPONENTS = 6
GRID_TOLERANCE = 1e-9

GRIDS = {ParamKind.N_GRID: N_GRID, ParamKind.P_GRID: P_GRID}


class GrammarError(ValueError):
    """A token was offered that the grammar does not allow in the current phase."""

    def __init__(self, message, phase=None):
        self.phase = phase
        super().__init__(message)


@dataclass(frozen=True)
class ComponentDescriptor:
    name: str
    category: ComponentCategory
    param_kinds: tuple = ()

    @property
    def arity(self):
        return len(self.param_kinds)


COMPONENTS = (
    ComponentDescriptor("traverse", ComponentCategory.CHOOSE),
    ComponentDescriptor("roulette_wheel", ComponentCategory.CHOOSE),
    ComponentDescriptor("tournament", ComponentCategory.CHOOSE),
    ComponentDescriptor("nich", ComponentCategory.CHOOSE),
    ComponentDescriptor("reset_n", ComponentCategory.SEARCH, (ParamKind.N_GRID,)),
    ComponentDescriptor("reset_rand", ComponentCategory.SEARCH, (ParamKind.P_GRID,)),
    ComponentDescriptor("reset_creep", ComponentCategory.SEARCH, (ParamKind.P_GRID,)),
    ComponentDescriptor("cross_n", ComponentCategory.SEARCH, (ParamKind.N_GRID,)),
    ComponentDescriptor("cross_uniform", ComponentCategory.SEARCH, (ParamKind.P_GRID,)),
    ComponentDescriptor("reinitialize", ComponentCategory.SEARCH),
    ComponentDescriptor("greedy_select", ComponentCategory.SELECT),
    ComponentDescriptor("pairwise_select", ComponentCategory.SELECT),
    ComponentDescriptor("round_robin_select", ComponentCategory.SELECT),
    ComponentDescriptor("simulated_annealing_select", ComponentCategory.SELECT),
    ComponentDescriptor("tabu", ComponentCategory.SELECT, (ParamKind.N_GRID,)),
    ComponentDescriptor("always_select", ComponentCategory.SELECT),
)

COMPONENTS_BY_NAME = {c.name: c for c in COMPONENTS}


@dataclass(frozen=True)
class Token:
    index: int
    kind: TokenKind
    name: str
    value: object = None

    def as_dict(self):
        value = self.value
        if isinstance(value, Enum):
            value = value.name.lower()
        elif isinstance(value, ComponentDescriptor):
            value = {"category": value.category.name.lower(),
                     "params": [k.name.lower() for k in value.param_kinds]}
        return {"index": self.index, "kind": self.kind.name.lower(), "name": self.name, "value": value}


def snap_to_grid(value, kind):
    """
    Return the grid value equal to `value` within GRID_TOLERANCE or None.
    """
    for v in GRIDS[kind]:
        if abs(v - value) <= GRID_TOLERANCE:
            return v
    return None


def nearest_grid_value(value, kind):
    grid = GRIDS[kind]
    return grid[int(np.argmin([abs(v - value) for v in grid]))]


class Vocabulary:
    """
    The fixed token vocabulary. Immutable once built.
    """

    def __init__(self, tokens):
        self.tokens = tuple(tokens)
        self._by_name = {t.name: t.index for t in self.tokens}
        self._by_kind = {}
        for t in self.tokens:
            self._by_kind.setdefault(t.kind, []).append(t.index)
        self._by_kind = {k: tuple(v) for k, v in self._by_kind.items()}
        self.begin = self._by_name["begin"]
        self.end = self._by_name["end"]

    def __len__(self):
        return len(self.tokens)

    def __getitem__(self, index):
        return self.tokens[index]

    def __iter__(self):
        return iter(self.tokens)

    def __repr__(self):
        return f"<Vocabulary(size={len(self)})>"

    def index(self, name):
        return self._by_name[name]

    def indices(self, kind):
        return self._by_kind.get(kind, ())

    def component(self, index):
        token = self.tokens[index]
        if token.kind is not TokenKind.COMPONENT:
            raise KeyError(f"token {index} is not a component")
        return token.value

    def component_index(self, name):
        return self._by_name[name]

    def value_token(self, kind, value):
        """
        Index of the grid token holding `value` (within tolerance).
        """
        snapped = snap_to_grid(value, kind)
        if snapped is None:
            raise KeyError(f"{value} is not on the {kind.name.lower().replace('_', '-')}")
        token_kind = TokenKind.N_VALUE if kind is ParamKind.N_GRID else TokenKind.P_VALUE
        for i in self.indices(token_kind):
            if self.tokens[i].value == snapped:
                return i
        raise KeyError(value)

    def pointer_token(self, kind):
        return self._by_name[POINTER_NAMES[kind]]

    def offset_token(self, offset):
        return self._by_name[f"offset_{offset}"]

    def count_token(self, percent):
        return self._by_name[f"count_{percent}%"]

    def condition_token(self, name):
        return self._by_name[name]

    def mask(self, indices):
        mask = np.zeros(len(self), dtype=bool)
        mask[list(indices)] = True
        return mask

    def as_dicts(self):
        return [t.as_dict() for t in self.tokens]


@lru_cache(maxsize=None)
def build_vocabulary():
    """
    Build the 54 token vocabulary: 16 components, 10 n-grid and 10 p-grid
    values, 3 pointers, 5 fork offsets, 8 conditions, begin and end.
    """
    tokens = []

    def add(kind, name, value=None):
        tokens.append(Token(len(tokens), kind, name, value))

    for comp in COMPONENTS:
        add(TokenKind.COMPONENT, comp.name, comp)
    for v in N_GRID:
        add(TokenKind.N_VALUE, f"n_{v:g}", v)
    for v in P_GRID:
        add(TokenKind.P_VALUE, f"p_{v:g}", v)
    for kind, name in POINTER_NAMES.items():
        add(TokenKind.POINTER, name, kind)
    for k in FORK_OFFSETS:
        add(TokenKind.FORK_OFFSET, f"offset_{k}", k)
    for pct in COUNT_PERCENTS:
        add(TokenKind.CONDITION, f"count_{pct}%", pct / 100)
    add(TokenKind.CONDITION, "once")
    for kind, name in EVENT_NAMES.items():
        add(TokenKind.CONDITION, name, kind)
    add(TokenKind.BEGIN, "begin")
    add(TokenKind.END, "end")
    return Vocabulary(tokens)


@dataclass(frozen=True)
class GrammarState:
    phase: Phase = Phase.EXPECT_COMPONENT
    components_emitted: int = 0
    snippets_emitted: int = 0
    last_pointer: PointerKind = None
    component: int = None
    param_index: int = 0


class Grammar:
    """
    Masks the tokens that may follow a prefix and advances the state.

    Event conditions are only offered when allow_events is set.
    """

    def __init__(self, allow_events=False, vocabulary=None):
        self.allow_events = allow_events
        self.vocab = vocabulary or build_vocabulary()
        v = self.vocab
        self._components = v.mask(v.indices(TokenKind.COMPONENT))
        self._components_or_end = v.mask(v.indices(TokenKind.COMPONENT) + (v.end,))
        self._end_only = v.mask([v.end])
        self._n_values = v.mask(v.indices(TokenKind.N_VALUE))
        self._p_values = v.mask(v.indices(TokenKind.P_VALUE))
        self._pointers = v.mask(v.indices(TokenKind.POINTER))
        self._offsets = v.mask(v.indices(TokenKind.FORK_OFFSET))
        self._once = v.mask([v.index("once")])
        loop_conditions = [v.count_token(p) for p in COUNT_PERCENTS] + [v.index("once")]
        if allow_events:
            loop_conditions += [v.index(name) for name in EVENT_NAMES.values()]
        self._loop_conditions = v.mask(loop_conditions)
        for m in (self._components, self._components_or_end, self._end_only, self._n_values,
                  self._p_values, self._pointers, self._offsets, self._once, self._loop_conditions):
            m.setflags(write=False)

    def __repr__(self):
        return f"<Grammar(allow_events={self.allow_events})>"

    def initial(self):
        return GrammarState()

    def next_mask(self, state):
        phase = state.phase
        if phase is Phase.DONE:
            raise GrammarError("grammar state already done", phase)
        if phase is Phase.EXPECT_COMPONENT:
            if state.components_emitted >= MAX_COMPONENTS:
                return self._end_only
            return self._components_or_end if state.snippets_emitted else self._components
        if phase is Phase.EXPECT_PARAM:
            kind = self.vocab.component(state.component).param_kinds[state.param_index]
            return self._n_values if kind is ParamKind.N_GRID else self._p_values
        if phase is Phase.EXPECT_POINTER:
            return self._pointers
        if phase is Phase.EXPECT_FORK_OFFSET:
            return self._offsets
        if state.last_pointer is PointerKind.FORWARD:
            return self._once
        return self._loop_conditions

    def advance(self, state, token):
        mask = self.next_mask(state)
        if not 0 <= token < len(self.vocab) or not mask[token]:
            name = self.vocab[token].name if 0 <= token < len(self.vocab) else str(token)
            raise GrammarError(f"token '{name}' not allowed in phase {state.phase.name.lower()}", state.phase)

        phase = state.phase
        if phase is Phase.EXPECT_COMPONENT:
            if token == self.vocab.end:
                return replace(state, phase=Phase.DONE)
            comp = self.vocab.component(token)
            next_phase = Phase.EXPECT_PARAM if comp.arity else Phase.EXPECT_POINTER
            return replace(state, phase=next_phase, component=token, param_index=0,
                           components_emitted=state.components_emitted + 1, last_pointer=None)
        if phase is Phase.EXPECT_PARAM:
            comp = self.vocab.component(state.component)
            if state.param_index + 1 < comp.arity:
                return replace(state, param_index=state.param_index + 1)
            return replace(state, phase=Phase.EXPECT_POINTER)
        if phase is Phase.EXPECT_POINTER:
            pointer = self.vocab[token].value
            next_phase = Phase.EXPECT_FORK_OFFSET if pointer is PointerKind.FORK else Phase.EXPECT_CONDITION
            return replace(state, phase=next_phase, last_pointer=pointer)
        if phase is Phase.EXPECT_FORK_OFFSET:
            return replace(state, phase=Phase.EXPECT_CONDITION)
        return replace(state, phase=Phase.EXPECT_COMPONENT, component=None, param_index=0,
                       snippets_emitted=state.snippets_emitted + 1)

    def masks_for(self, tokens):
        """
        Masks used at every step of `tokens` (which start with begin and end
        with end). Row i is the mask under which tokens[i + 1] was chosen.
        """
        return _masks_for(tuple(int(t) for t in tokens), self.allow_events)

    def reachable_states(self):
        """
        Every state reachable from the initial state, excluding done.
        """
        seen = set()
        stack = [self.initial()]
        while stack:
            state = stack.pop()
            if state in seen or state.phase is Phase.DONE:
                continue
            seen.add(state)
            for token in np.flatnonzero(self.next_mask(state)):
                stack.append(self.advance(state, int(token)))
        return seen


@lru_cache(maxsize=None)
def get_grammar(allow_events=False):
    return Grammar(allow_events=allow_events)


@lru_cache(maxsize=4096)
def _masks_for(tokens, allow_events):
    grammar = get_grammar(allow_events)
    if not tokens or tokens[0] != grammar.vocab.begin:
        raise GrammarError("token sequence must start with begin")
    state = grammar.initial()
    rows = []
    for token in tokens[1:]:
        rows.append(grammar.next_mask(state))
        state = grammar.advance(state, token)
    if state.phase is not Phase.DONE:
        raise GrammarError("token sequence does not end with end", state.phase)
    masks = np.array(rows)
    masks.setflags(write=False)
    return masks


def next_mask(state, allow_events=False):
    return get_grammar(allow_events).next_mask(state)


def advance(state, token, allow_events=False):
    return get_grammar(allow_events).advance(state, token)


def snippet_token_count(component, pointer):
    return 3 + component.arity + (1 if pointer is PointerKind.FORK else 0)
