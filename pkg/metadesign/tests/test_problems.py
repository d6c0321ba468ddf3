import itertools

import numpy as np
import pytest

from metadesign.models.enums import ProblemFamily, WModelKind
from metadesign.problems import functions as fn
from metadesign.problems.instance import ProblemError, WModelLayer, make_instance
from metadesign.problems.registry import family_keys, instance_from_key, parse_problem_key
from metadesign.tests.factories import create_instance


def bits(text):
    return np.array([[int(c) for c in text]], dtype=np.uint8)


def all_strings(d):
    return np.array(list(itertools.product([0, 1], repeat=d)), dtype=np.uint8)


class TestObjectives:

    def test_onemax_all_ones(self):
        assert create_instance(family="onemax", d=625).evaluate(np.ones(625)) == 625

    def test_harmonic_all_ones(self):
        assert create_instance(family="harmonic", d=625).evaluate(np.ones(625)) == 195625

    def test_leadingones(self):
        assert fn.leadingones(bits("1101"))[0] == 2
        assert fn.leadingones(bits("0111"))[0] == 0

    def test_labs_merit_factor(self):
        assert fn.labs(bits("110"))[0] == pytest.approx(4.5)

    def test_labs_brute_force_n3(self):
        values = fn.labs(all_strings(3))
        assert values.max() == pytest.approx(4.5)
        assert np.all(np.isfinite(values))

    def test_ising_ring_all_ones(self):
        assert create_instance(family="ising_ring", d=5).evaluate(np.ones(5)) == 5

    def test_ising_torus_uniform(self):
        instance = create_instance(family="ising_torus", d=16)
        assert instance.evaluate(np.zeros(16)) == instance.known_optimum == 32

    def test_mivs_triangle(self):
        edges = np.array([[0, 1], [0, 2], [1, 2]])
        assert fn.mivs(bits("100"), edges)[0] == 1
        assert fn.mivs(bits("110"), edges)[0] == 0
        assert fn.mivs(all_strings(3), edges).max() == 1

    def test_mivs_without_edges(self):
        instance = make_instance("mivs", 3, graph=np.empty((0, 2)))
        assert instance.evaluate(np.ones(3)) == 3

    def test_nqueens_five_queens(self):
        instance = create_instance(family="nqueens", d=25)
        board = np.zeros((5, 5), dtype=np.uint8)
        for row, col in enumerate([0, 2, 4, 1, 3]):
            board[row, col] = 1
        assert instance.evaluate(board.ravel()) == 5 == instance.known_optimum

    def test_nqueens_attacking_pair(self):
        instance = create_instance(family="nqueens", d=4)
        assert instance.evaluate(np.array([1, 1, 0, 0])) == 2 - 2 * 1


class TestWModelLayers:

    def test_neutrality_majority(self):
        assert fn.apply_neutrality(bits("110011"), 3).tolist() == [[1, 0]]

    def test_neutrality_tie_goes_to_zero(self):
        assert fn.apply_neutrality(bits("10"), 2).tolist() == [[0]]

    def test_neutrality_remainder_passes(self):
        assert fn.apply_neutrality(bits("11101"), 3).tolist() == [[1, 0, 1]]

    def test_dummy_keeping_everything_is_identity(self):
        X = all_strings(4)
        positions = fn.dummy_positions(4, 4, seed=3)
        assert np.array_equal(fn.apply_dummy(X, positions), X)

    def test_epistasis_is_a_bijection(self):
        nu = 4
        X = all_strings(nu)
        mapped = fn.apply_epistasis(X, nu, fn.epistasis_permutation(nu, seed=5))
        assert len({row.tobytes() for row in mapped}) == 2 ** nu

    def test_ruggedness_identity(self):
        f = np.arange(6, dtype=float)
        assert np.array_equal(fn.apply_ruggedness(f, 0, 5), f)

    def test_ruggedness_swap(self):
        assert fn.apply_ruggedness([1.0], 1, 5)[0] == 2
        assert fn.apply_ruggedness([2.0], 1, 5)[0] == 1

    @pytest.mark.parametrize("gamma", [0, 1, 2, 3, 10])
    def test_ruggedness_keeps_optimum(self, gamma):
        assert fn.apply_ruggedness([5.0], gamma, 5)[0] == 5

    def test_empty_layers_equal_base(self):
        X = np.random.default_rng(0).integers(0, 2, size=(20, 12), dtype=np.uint8)
        instance = make_instance("leadingones", 12, wmodel=())
        assert np.array_equal(instance.evaluate_batch(X), fn.leadingones(X))

    def test_layered_key_and_length(self):
        instance = instance_from_key("onemax+neutrality3+ruggedness1:12")
        assert instance.key == "onemax+neutrality3+ruggedness1:12"
        assert instance.working_length == 4
        assert instance.known_optimum == 4
        assert instance.evaluate(np.ones(12)) == 4

    def test_dummy_too_large(self):
        with pytest.raises(ProblemError):
            make_instance("onemax", 5, wmodel=(WModelLayer(WModelKind.DUMMY, 6),))

    def test_ruggedness_needs_integer_fitness(self):
        with pytest.raises(ProblemError):
            make_instance("labs", 10, wmodel=(WModelLayer(WModelKind.RUGGEDNESS, 1),))


class TestInstances:

    def test_known_optimum(self):
        assert create_instance(family="onemax", d=100).known_optimum == 100

    def test_nqueens_board(self):
        instance = create_instance(family="nqueens", d=25)
        assert instance.d == 25
        assert instance.known_optimum == 5

    def test_square_families_reject_other_lengths(self):
        with pytest.raises(ProblemError):
            make_instance("nqueens", 24)
        with pytest.raises(ProblemError):
            make_instance("ising_torus", 10)

    def test_unknown_family(self):
        with pytest.raises(ProblemError):
            make_instance("sphere", 10)

    def test_invalid_dimension(self):
        with pytest.raises(ProblemError):
            make_instance("onemax", 0)
        with pytest.raises(ProblemError):
            make_instance("labs", 1)

    def test_evaluate_checks_shape(self):
        instance = create_instance(family="onemax", d=10)
        with pytest.raises(ProblemError):
            instance.evaluate_batch(np.ones((2, 9)))
        with pytest.raises(ProblemError):
            instance.evaluate(np.ones((2, 10)))

    @pytest.mark.parametrize("family", family_keys())
    def test_deterministic(self, family):
        d = 16
        X = np.random.default_rng(42).integers(0, 2, size=(100, d), dtype=np.uint8)
        first = make_instance(family, d, seed=3).evaluate_batch(X)
        second = make_instance(family, d, seed=3).evaluate_batch(X)
        assert np.array_equal(first, second)
        assert np.all(np.isfinite(first))

    @pytest.mark.parametrize("family", ["onemax", "harmonic", "leadingones", "ising_ring"])
    def test_optimum_at_all_ones(self, family):
        instance = make_instance(family, 9)
        assert instance.evaluate(np.ones(9)) == instance.known_optimum

    def test_ising_ring_optimum_at_all_zeros(self):
        instance = make_instance("ising_ring", 9)
        assert instance.evaluate(np.zeros(9)) == instance.known_optimum

    @pytest.mark.parametrize("family,d", [
        ("onemax", 10), ("harmonic", 10), ("leadingones", 10), ("ising_ring", 10),
        ("ising_torus", 9), ("nqueens", 9), ("nqueens", 4),
    ])
    def test_brute_force_never_exceeds_optimum(self, family, d):
        instance = make_instance(family, d)
        values = instance.evaluate_batch(all_strings(d))
        assert values.max() == instance.known_optimum

    def test_mivs_has_no_declared_optimum(self):
        assert create_instance(family="mivs", d=12).known_optimum is None

    def test_mivs_graph_depends_on_seed(self):
        a = make_instance("mivs", 30, seed=1).graph
        b = make_instance("mivs", 30, seed=2).graph
        assert not np.array_equal(a, b)

    def test_as_dict(self):
        data = create_instance("onemax+dummy5:10").as_dict()
        assert data["key"] == "onemax+dummy5:10"
        assert data["wmodel"] == ["dummy5"]
        assert data["known_optimum"] == 5


class TestRegistry:

    def test_parse_problem_key(self):
        family, dim, layers = parse_problem_key("ising_ring+epistasis4:64")
        assert family is ProblemFamily.ISING_RING
        assert dim == 64
        assert layers == (WModelLayer(WModelKind.EPISTASIS, 4),)

    def test_dimension_before_layers(self):
        assert parse_problem_key("onemax:12+neutrality3")[1] == 12

    def test_dimension_argument(self):
        assert instance_from_key("onemax", dim=7).d == 7

    def test_missing_dimension(self):
        with pytest.raises(ProblemError):
            instance_from_key("onemax")

    @pytest.mark.parametrize("key", ["", "sphere:10", "onemax:x", "onemax+warp3:10", "onemax:10:12"])
    def test_invalid_keys(self, key):
        with pytest.raises(ProblemError):
            parse_problem_key(key)

    def test_family_keys(self):
        assert "onemax" in family_keys()
        assert len(family_keys()) == len(ProblemFamily)
