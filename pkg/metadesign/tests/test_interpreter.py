import math
from types import SimpleNamespace

import numpy as np
import pytest
from scipy.stats import chisquare

from metadesign.baselines.programs import PUBLISHED
from metadesign.design.program import from_text
from metadesign.interpreter import operators as ops
from metadesign.interpreter.batch import RunJob, run_job, run_jobs
from metadesign.interpreter.engine import BlockCounters, BudgetError, eval_condition, run
from metadesign.models.enums import ConditionKind
from metadesign.tests.factories import create_instance

RANDOM_SEARCH = "reinitialize | forward | once"


@pytest.fixture
def setup_data():
    """Instances and programs shared by the interpreter tests."""
    obj = SimpleNamespace()
    obj.onemax = create_instance(family="onemax", d=20)
    obj.leadingones = create_instance(family="leadingones", d=20)
    obj.local = from_text(PUBLISHED["roulette_fork_local"])
    obj.random_search = from_text(RANDOM_SEARCH)
    return obj


class TestChoose:

    def test_traverse(self):
        assert ops.choose_traverse(np.array([3.0, 1.0, 2.0])).tolist() == [0, 1, 2]

    def test_roulette_flat_fitness_is_uniform(self):
        rng = np.random.default_rng(0)
        draws = ops.choose_roulette(np.full(5, 7.0), rng, 100000)
        _, p = chisquare(np.bincount(draws, minlength=5))
        assert p > 0.001

    def test_roulette_prefers_fitter(self):
        rng = np.random.default_rng(0)
        draws = ops.choose_roulette(np.array([0.0, 10.0]), rng, 1000)
        assert draws.mean() > 0.99

    def test_tournament_probability(self):
        """binary tournament with replacement on {5, 1} picks 5 with probability 3/4"""
        rng = np.random.default_rng(1)
        draws = ops.choose_tournament(np.array([5.0, 1.0]), rng, 100000)
        assert np.mean(draws == 0) == pytest.approx(0.75, abs=0.01)

    def test_niche_leaders_best_first(self):
        X = np.array([[0] * 10, [1] * 10, [0] * 9 + [1]], dtype=np.uint8)
        f = np.array([1.0, 3.0, 2.0])
        leaders = ops.choose_niche(X, f, np.random.default_rng(0), 3)
        assert leaders[:2].tolist() == [1, 2]
        assert len(leaders) == 3


class TestSearch:

    def test_reset_n_one_bit(self):
        rng = np.random.default_rng(0)
        X = rng.integers(0, 2, size=(30, 100), dtype=np.uint8)
        Y = ops.reset_n(X, 0.01, rng)
        assert np.all((X != Y).sum(axis=1) == 1)

    def test_reset_n_rounds_fraction(self):
        rng = np.random.default_rng(0)
        X = np.zeros((5, 40), dtype=np.uint8)
        assert np.all(ops.reset_n(X, 0.05, rng).sum(axis=1) == 2)

    def test_cross_uniform_full_rate_takes_mate(self):
        rng = np.random.default_rng(0)
        X = np.array([[0] * 8, [1] * 8], dtype=np.uint8)
        Y = ops.cross_uniform(X, 1.0, rng)
        assert Y.tolist() == [[1] * 8, [0] * 8]

    def test_reset_rand_zero_is_identity(self):
        rng = np.random.default_rng(0)
        X = rng.integers(0, 2, size=(4, 12), dtype=np.uint8)
        assert np.array_equal(ops.reset_rand(X, 0.0, rng), X)

    def test_cross_n_single_cut(self):
        rng = np.random.default_rng(3)
        X = np.array([[0] * 10, [1] * 10], dtype=np.uint8)
        Y = ops.cross_n(X, 0.01, rng)
        for row in Y:
            assert np.count_nonzero(np.diff(row.astype(int))) == 1

    def test_pick_mates_distinct(self):
        mates = ops.pick_mates(np.random.default_rng(0), 50)
        assert np.all(mates != np.arange(50))

    def test_decode_count(self):
        assert ops.decode_count(0.01, 625) == 6
        assert ops.decode_count(0.01, 20) == 1
        assert ops.decode_count(0.45, 10) == 5
        assert ops.round_half_up(2.5) == 3


class TestSelect:

    def test_greedy_top_p(self):
        X = np.zeros((5, 2), dtype=np.uint8)
        _, f = ops.select_greedy(X[:3], np.array([3.0, 1.0, 2.0]), X[:2], np.array([2.0, 4.0]), 3)
        assert f.tolist() == [4.0, 3.0, 2.0]

    def test_pairwise(self):
        _, f = ops.select_pairwise(np.zeros((1, 2)), np.array([3.0]), np.ones((1, 2)), np.array([4.0]))
        assert f.tolist() == [4.0]

    def test_pairwise_pads_short_offspring(self):
        old_X = np.zeros((3, 2), dtype=np.uint8)
        _, f = ops.select_pairwise(old_X, np.array([1.0, 2.0, 3.0]), old_X[:1], np.array([5.0]))
        assert f.tolist() == [5.0, 2.0, 3.0]

    def test_always_takes_new_set(self):
        new_X = np.ones((2, 3), dtype=np.uint8)
        X, f = ops.select_always(np.zeros((2, 3), dtype=np.uint8), np.array([9.0, 9.0]), new_X, np.array([0.0, 1.0]))
        assert f.tolist() == [0.0, 1.0]
        assert np.array_equal(X, new_X)

    def test_round_robin_keeps_size(self):
        rng = np.random.default_rng(0)
        X = np.zeros((4, 2), dtype=np.uint8)
        _, f = ops.select_round_robin(X, np.array([1.0, 2.0, 3.0, 4.0]), X, np.array([5.0, 0.0, 0.0, 0.0]), 4, rng)
        assert len(f) == 4
        assert set(f) <= {0.0, 1.0, 2.0, 3.0, 4.0, 5.0}

    def test_annealing_accepts_improvements(self):
        annealing = ops.Annealing()
        rng = np.random.default_rng(0)
        old_X = np.zeros((3, 2), dtype=np.uint8)
        _, f = annealing.select(old_X, np.array([1.0, 2.0, 3.0]), old_X, np.array([2.0, 3.0, 4.0]), rng)
        assert f.tolist() == [2.0, 3.0, 4.0]
        assert annealing.temperature is None

    def test_annealing_calibration(self):
        annealing = ops.Annealing()
        rng = np.random.default_rng(0)
        old_X = np.zeros((2, 2), dtype=np.uint8)
        annealing.select(old_X, np.array([2.0, 2.0]), old_X, np.array([1.0, 1.0]), rng)
        assert annealing.temperature == pytest.approx(-1.0 / math.log(0.8) * 0.995)

    def test_tabu_refuses_remembered(self):
        tabu = ops.TabuList(2)
        old_X = np.zeros((1, 4), dtype=np.uint8)
        new_X = np.ones((1, 4), dtype=np.uint8)
        tabu.push(new_X[0])
        _, f = tabu.select(old_X, np.array([1.0]), new_X, np.array([2.0]), aspiration=5.0)
        assert f.tolist() == [1.0]
        _, f = tabu.select(old_X, np.array([1.0]), new_X, np.array([6.0]), aspiration=5.0)
        assert f.tolist() == [6.0]

    def test_tabu_capacity(self):
        tabu = ops.TabuList(ops.tabu_capacity(0.1, 20))
        for i in range(5):
            tabu.push(np.array([i, 0, 0, 0], dtype=np.uint8))
        assert tabu.capacity == 2
        assert len(tabu.entries) == 2


class TestConditions:

    def _state(self, fe_used, budget=5000):
        return SimpleNamespace(fe_used=fe_used, fe_budget=budget)

    def test_once(self):
        counters = BlockCounters(self._state(0))
        assert eval_condition(from_text("traverse | forward | once").snippets[0].condition, counters,
                              self._state(1))

    def test_count_fraction_of_budget(self):
        condition = from_text("traverse | iterate | count(5%FE)").snippets[0].condition
        assert condition.kind is ConditionKind.COUNT
        counters = BlockCounters(self._state(100))
        assert not eval_condition(condition, counters, self._state(349))
        assert eval_condition(condition, counters, self._state(351))

    def test_stagnation(self):
        condition = from_text("traverse | iterate | event(stagnation_3)").snippets[0].condition
        counters = BlockCounters(self._state(0))
        counters.stagnant = 2
        assert not eval_condition(condition, counters, self._state(0))
        counters.stagnant = 3
        assert eval_condition(condition, counters, self._state(0))

    def test_local_optimal(self):
        condition = from_text("traverse | iterate | event(local_optimal)").snippets[0].condition
        counters = BlockCounters(self._state(0))
        counters.improved = True
        assert not eval_condition(condition, counters, self._state(0))
        counters.improved = False
        assert eval_condition(condition, counters, self._state(0))


class TestRun:

    def test_random_search_matches_sampling_oracle(self, setup_data):
        budget, pop_size, seed = 530, 50, 17
        report = run(setup_data.random_search, setup_data.leadingones, budget, pop_size=pop_size, seed=seed)

        rng = np.random.default_rng(seed)
        draws = np.concatenate([ops.random_bits(rng, pop_size, 20) for _ in range(math.ceil(budget / pop_size))])
        expected = setup_data.leadingones.evaluate_batch(draws[:budget]).max()
        assert report.best_fitness == expected
        assert report.fe_used == budget

    def test_budget_equal_to_population(self, setup_data):
        report = run(setup_data.local, setup_data.onemax, 50, pop_size=50, seed=0)
        assert report.fe_used == 50
        assert report.passes == 0
        assert report.trace == []

    def test_budget_below_population(self, setup_data):
        with pytest.raises(BudgetError):
            run(setup_data.local, setup_data.onemax, 49, pop_size=50)

    def test_deterministic(self, setup_data):
        first = run(setup_data.local, setup_data.onemax, 2000, pop_size=20, seed=5)
        second = run(setup_data.local, setup_data.onemax, 2000, pop_size=20, seed=5)
        assert first.best_fitness == second.best_fitness
        assert first.trace == second.trace
        assert np.array_equal(first.best_solution, second.best_solution)

    @pytest.mark.parametrize("name", sorted(PUBLISHED))
    def test_budget_respected_and_trace_monotone(self, setup_data, name):
        report = run(from_text(PUBLISHED[name]), setup_data.onemax, 1234, pop_size=20, seed=2)
        assert report.fe_used == 1234
        assert all(a <= b for a, b in zip(report.trace, report.trace[1:]))
        assert report.best_fitness == report.trace[-1]
        assert setup_data.onemax.evaluate(report.best_solution) == report.best_fitness

    def test_program_without_select(self, setup_data):
        program = from_text("tournament | forward | once; reset_rand(0.1) | forward | once")
        report = run(program, setup_data.onemax, 500, pop_size=10, seed=0)
        assert report.fe_used == 500

    def test_choose_only_program_stops(self, setup_data):
        program = from_text("traverse | iterate | count(20%FE)")
        report = run(program, setup_data.onemax, 500, pop_size=10, seed=0)
        assert report.fe_used == 10
        assert report.passes == 1

    def test_count_block_consumes_share_of_budget(self, setup_data):
        program = from_text("traverse | fork(2) | count(5%FE); reset_n(0.01) | forward | once; "
                            "pairwise_select | forward | once")
        report = run(program, setup_data.onemax, 5000, pop_size=50, seed=0)
        # each outer pass is one activation of the count block: at least 250 FEs
        assert report.passes <= (5000 - 50) // 250 + 1

    def test_stagnation_block_runs_while_improving(self):
        """a block whose passes keep improving is only left when the budget runs out"""
        instance = create_instance(family="onemax", d=1000)
        program = from_text("traverse | fork(2) | event(stagnation_3); reset_n(0.01) | forward | once; "
                            "greedy_select | forward | once")
        start = (np.zeros((1, 1000), dtype=np.uint8), np.zeros(1))
        report = run(program, instance, 21, pop_size=1, seed=0, initial_pop=start)
        assert report.passes == 1
        assert report.fe_used == 21

    def test_initial_population_charged_nothing(self, setup_data):
        X = np.ones((10, 20), dtype=np.uint8)
        report = run(setup_data.local, setup_data.onemax, 100, pop_size=10, seed=0,
                     initial_pop=(X, setup_data.onemax.evaluate_batch(X)))
        assert report.best_fitness == 20
        assert report.fe_used == 100

    def test_initial_population_size_checked(self, setup_data):
        X = np.ones((5, 20), dtype=np.uint8)
        with pytest.raises(BudgetError):
            run(setup_data.local, setup_data.onemax, 100, pop_size=10, initial_pop=(X, np.ones(5)))

    def test_local_search_solves_small_onemax(self, setup_data):
        solved = sum(run(setup_data.local, setup_data.onemax, 5000, pop_size=50, seed=s).best_fitness == 20
                     for s in range(5))
        assert solved >= 4

    def test_report_as_dict(self, setup_data):
        data = run(setup_data.random_search, setup_data.onemax, 60, pop_size=50, seed=0).as_dict()
        assert data["fe_used"] == 60
        assert len(data["best_solution"]) == 20
        assert data["passes"] == 1


class TestBatch:

    def test_run_jobs_keeps_order(self, setup_data):
        jobs = [RunJob(setup_data.random_search, setup_data.onemax, 100, 10, s) for s in range(4)]
        results = run_jobs(jobs)
        assert [r.best_fitness for r in results] == [run_job(j).best_fitness for j in jobs]

    def test_workers_do_not_change_results(self, setup_data):
        jobs = [RunJob(setup_data.local, setup_data.onemax, 300, 10, s, trace=True) for s in range(4)]
        serial = run_jobs(jobs, workers=1)
        parallel = run_jobs(jobs, workers=2)
        assert [(r.best_fitness, r.fe_used, r.trace) for r in serial] == \
            [(r.best_fitness, r.fe_used, r.trace) for r in parallel]
