"""
Executes a Program as a population based search under a function
evaluation (FE) budget.

Within a pass, a choose component writes the working set, search components
chain on the pending offspring set and a select component merges offspring
into the population. A pending offspring set left without a select when the
pass closes is accepted by always_select.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from metadesign.design.program import control_flow
from metadesign.interpreter import operators as ops
from metadesign.models.enums import ComponentCategory, ConditionKind, EventKind

log = logging.getLogger(__name__)


class BudgetError(ValueError):
    pass


class BudgetExhausted(Exception):
    """Internal signal unwinding a run once the budget is spent."""


@dataclass
class ExecutionReport:
    best_fitness: float
    best_solution: np.ndarray
    fe_used: int
    trace: list = None
    passes: int = 0

    def as_dict(self):
        return {
            "best_fitness": self.best_fitness,
            "best_solution": "".join(str(int(b)) for b in self.best_solution),
            "fe_used": self.fe_used,
            "trace": None if self.trace is None else list(self.trace),
            "passes": self.passes,
        }


@dataclass
class RunState:
    instance: object
    fe_budget: int
    rng: np.random.Generator
    pop_X: np.ndarray = None
    pop_f: np.ndarray = None
    working: tuple = None
    pending: tuple = None
    fe_used: int = 0
    best_fitness: float = -np.inf
    best_solution: np.ndarray = None
    select_best: float = -np.inf
    annealing: ops.Annealing = field(default_factory=ops.Annealing)
    tabu_lists: dict = field(default_factory=dict)

    @property
    def pop_size(self):
        return len(self.pop_f)

    def check_budget(self):
        if self.fe_used >= self.fe_budget:
            raise BudgetExhausted()

    def evaluate(self, Y):
        """
        Evaluate as many rows of Y as the budget allows; the rest are dropped.
        """
        allowed = min(len(Y), self.fe_budget - self.fe_used)
        Y = Y[:allowed]
        f = self.instance.evaluate_batch(Y) if allowed else np.empty(0)
        self.fe_used += allowed
        self.note(Y, f)
        return Y, f

    def note(self, Y, f):
        if len(f):
            i = int(np.argmax(f))
            if f[i] > self.best_fitness:
                self.best_fitness = float(f[i])
                self.best_solution = Y[i].copy()

    def population_best(self):
        return float(self.pop_f.max())


def exec_choose(snippet, state):
    """
    Set the working set from the population. No FEs consumed.
    """
    resolve_pending(state)
    name = snippet.component.name
    f = state.pop_f
    size = len(f)
    if name == "traverse":
        idx = ops.choose_traverse(f)
    elif name == "roulette_wheel":
        idx = ops.choose_roulette(f, state.rng, size)
    elif name == "tournament":
        idx = ops.choose_tournament(f, state.rng, size)
    else:
        idx = ops.choose_niche(state.pop_X, f, state.rng, size)
    state.working = (state.pop_X[idx], f[idx])
    return state.working


def exec_search(snippet, state):
    """
    Produce one offspring per row of the current source set and evaluate
    them eagerly, one FE each.
    """
    if state.pending is not None:
        source = state.pending[0]
    elif state.working is not None:
        source = state.working[0]
    else:
        source = state.pop_X
    name = snippet.component.name
    rng = state.rng
    if name == "reset_n":
        Y = ops.reset_n(source, snippet.params[0], rng)
    elif name == "reset_rand":
        Y = ops.reset_rand(source, snippet.params[0], rng)
    elif name == "reset_creep":
        Y = ops.reset_creep(source, snippet.params[0], rng)
    elif name == "cross_n":
        Y = ops.cross_n(source, snippet.params[0], rng)
    elif name == "cross_uniform":
        Y = ops.cross_uniform(source, snippet.params[0], rng)
    else:
        Y = ops.reinitialize(source, rng)
    state.pending = state.evaluate(Y)
    return state.pending


def exec_select(snippet, state, index=None):
    """
    Merge the pending offspring into the population. The old side is the
    working set when one was chosen, the population otherwise.
    """
    old_X, old_f = state.working if state.working is not None else (state.pop_X, state.pop_f)
    if state.pending is not None:
        new_X, new_f = state.pending
    else:
        new_X, new_f = old_X[:0], old_f[:0]
    size = state.pop_size
    name = snippet.component.name
    if name == "greedy_select":
        X, f = ops.select_greedy(old_X, old_f, new_X, new_f, size)
    elif name == "pairwise_select":
        X, f = ops.select_pairwise(old_X, old_f, new_X, new_f)
    elif name == "round_robin_select":
        X, f = ops.select_round_robin(old_X, old_f, new_X, new_f, size, state.rng)
    elif name == "simulated_annealing_select":
        X, f = state.annealing.select(old_X, old_f, new_X, new_f, state.rng)
    elif name == "tabu":
        tabu = state.tabu_lists.get(index)
        if tabu is None:
            tabu = state.tabu_lists[index] = ops.TabuList(
                ops.tabu_capacity(snippet.params[0], state.instance.d))
        X, f = tabu.select(old_X, old_f, new_X, new_f, state.select_best)
    else:
        X, f = ops.select_always(old_X, old_f, new_X, new_f)
    _replace_population(state, X, f)
    return X, f


def resolve_pending(state):
    """
    Accept a pending offspring set nobody selected (implicit always_select).
    """
    if state.pending is None:
        state.working = None
        return
    old_X, old_f = state.working if state.working is not None else (state.pop_X, state.pop_f)
    X, f = ops.select_always(old_X, old_f, *state.pending)
    _replace_population(state, X, f)


def _replace_population(state, X, f):
    state.pop_X, state.pop_f = X, f
    state.working = None
    state.pending = None
    state.select_best = state.best_fitness


class BlockCounters:
    """
    Bookkeeping for one activation of a loop block.
    """

    def __init__(self, state):
        self.fe_at_entry = state.fe_used
        self.passes = 0
        self.stagnant = 0
        self.improved = False


def eval_condition(condition, counters, state):
    """
    True when the block should exit after the pass just completed.
    """
    kind = condition.kind
    if kind is ConditionKind.ONCE:
        return True
    if kind is ConditionKind.COUNT:
        return state.fe_used - counters.fe_at_entry >= condition.fraction * state.fe_budget
    if condition.event is EventKind.LOCAL_OPTIMAL:
        return not counters.improved
    return counters.stagnant >= 3


class Interpreter:

    def __init__(self, program):
        self.program = program
        self.tree = control_flow(program)

    def _exec_items(self, items, state):
        for item in items:
            if isinstance(item, int):
                self._exec_snippet(item, state)
            else:
                self._exec_block(item, state)

    def _exec_snippet(self, index, state):
        state.check_budget()
        snippet = self.program.snippets[index]
        category = snippet.component.category
        if category is ComponentCategory.CHOOSE:
            exec_choose(snippet, state)
        elif category is ComponentCategory.SEARCH:
            exec_search(snippet, state)
        else:
            exec_select(snippet, state, index)

    def _exec_block(self, block, state):
        counters = BlockCounters(state)
        while True:
            best_before = state.population_best()
            fe_before = state.fe_used
            self._exec_items(block.body, state)
            resolve_pending(state)
            counters.passes += 1
            counters.improved = state.population_best() > best_before
            counters.stagnant = 0 if counters.improved else counters.stagnant + 1
            if state.fe_used == fe_before or eval_condition(block.condition, counters, state):
                return

    def run(self, instance, budget, pop_size=50, seed=0, initial_pop=None, trace=True):
        if budget < pop_size:
            raise BudgetError(f"budget {budget} is smaller than the population size {pop_size}")
        state = RunState(instance=instance, fe_budget=budget, rng=np.random.default_rng(seed))
        if initial_pop is not None:
            X, f = initial_pop
            if len(f) != pop_size:
                raise BudgetError(f"initial population has {len(f)} solutions, expected {pop_size}")
            state.pop_X, state.pop_f = np.asarray(X, dtype=np.uint8), np.asarray(f, dtype=np.float64)
            state.note(state.pop_X, state.pop_f)
        else:
            state.pop_X, state.pop_f = state.evaluate(ops.random_bits(state.rng, pop_size, instance.d))
        state.select_best = state.best_fitness

        series = [] if trace else None
        passes = 0
        while state.fe_used < budget:
            fe_before = state.fe_used
            exhausted = False
            try:
                self._exec_items(self.tree.body, state)
                resolve_pending(state)
            except BudgetExhausted:
                exhausted = True
            passes += 1
            if trace:
                series.append(state.best_fitness)
            if exhausted or state.fe_used == fe_before:
                break

        log.debug(f"run finished: best={state.best_fitness} fe={state.fe_used} passes={passes}")
        return ExecutionReport(
            best_fitness=state.best_fitness,
            best_solution=state.best_solution,
            fe_used=state.fe_used,
            trace=series,
            passes=passes,
        )


def run(program, instance, budget, pop_size=50, seed=0, initial_pop=None, trace=True):
    """
    Execute `program` on `instance`. Identical inputs and seed give an
    identical report.
    """
    return Interpreter(program).run(instance, budget, pop_size=pop_size, seed=seed,
                                    initial_pop=initial_pop, trace=trace)
