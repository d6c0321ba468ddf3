from types import SimpleNamespace

import numpy as np
import pytest

from metadesign.landscape import features as ft
from metadesign.landscape.features import FACTOR_NAMES, FactorVector, compute_factors
from metadesign.landscape.sampling import WalkSample, random_walk_sample
from metadesign.problems.registry import family_keys
from metadesign.tests.factories import create_instance


class RandomFitness:
    """A landscape with i.i.d. fitness values per point."""

    def __init__(self, d, seed=0):
        self.d = d
        self.key = f"random:{d}"
        self.rng = np.random.default_rng(seed)

    def evaluate_batch(self, X):
        return self.rng.random(len(X))


@pytest.fixture
def setup_data():
    obj = SimpleNamespace()
    obj.onemax = create_instance(family="onemax", d=10)
    obj.harmonic = create_instance(family="harmonic", d=10)
    rng = np.random.default_rng(0)
    obj.uniform_points = rng.integers(0, 2, size=(1000, 100), dtype=np.uint8)
    obj.flat = WalkSample(points=obj.uniform_points, fitness=np.full(1000, 3.0))
    return obj


class TestRandomWalk:

    def test_length_and_steps(self, setup_data):
        sample = random_walk_sample(setup_data.onemax, seed=1)
        assert len(sample) == 1000
        steps = (np.diff(sample.points.astype(int), axis=0) != 0).sum(axis=1)
        assert np.all(steps == 1)

    def test_same_seed_same_sample(self, setup_data):
        a = random_walk_sample(setup_data.onemax, seed=4)
        b = random_walk_sample(setup_data.onemax, seed=4)
        assert np.array_equal(a.points, b.points)
        assert np.array_equal(a.fitness, b.fitness)

    def test_onemax_changes_by_one(self, setup_data):
        sample = random_walk_sample(setup_data.onemax, seed=2)
        assert np.all(np.abs(np.diff(sample.fitness)) == 1)

    def test_initial_population_from_walk(self, setup_data):
        sample = random_walk_sample(setup_data.onemax, seed=2)
        X, f = sample.initial_population(np.random.default_rng(0), 50)
        assert X.shape == (50, 10)
        assert np.array_equal(setup_data.onemax.evaluate_batch(X), f)


class TestDispersion:

    def test_flat_landscape_neutral(self, setup_data):
        values = ft.dispersion_features(setup_data.flat, np.random.default_rng(0))
        for q in ("02", "05", "10", "25"):
            assert values[f"disp.ratio_mean_{q}"] == pytest.approx(1.0, abs=0.05)
            assert values[f"disp.ratio_median_{q}"] == pytest.approx(1.0, abs=0.05)
        assert values["disp.diff_mean_02"] == pytest.approx(0.0, abs=0.05)
        assert values["disp.diff_mean_05"] == pytest.approx(0.0, abs=0.05)

    def test_onemax_best_points_cluster(self):
        instance = create_instance(family="onemax", d=20)
        sample = random_walk_sample(instance, seed=3)
        values = ft.dispersion_features(sample, np.random.default_rng(0))
        assert values["disp.ratio_mean_02"] < 1

    def test_tiny_sample(self):
        sample = WalkSample(points=np.zeros((3, 4), dtype=np.uint8), fitness=np.arange(3.0))
        values = ft.dispersion_features(sample, np.random.default_rng(0))
        assert values["disp.ratio_mean_25"] == 1.0


class TestMetaModel:

    def test_onemax_is_linear(self, setup_data):
        sample = random_walk_sample(setup_data.onemax, seed=5)
        values = ft.meta_model_features(sample, np.random.default_rng(0))
        assert values["ela_meta.lin_simple.adj_r2"] > 0.99
        assert values["ela_meta.lin_simple.intercept"] == pytest.approx(0.0, abs=1e-6)
        assert values["ela_meta.lin_simple.coef.min"] == pytest.approx(1.0, abs=1e-6)
        assert values["ela_meta.lin_simple.coef.max"] == pytest.approx(1.0, abs=1e-6)

    def test_harmonic_coefficient_spread(self, setup_data):
        sample = random_walk_sample(setup_data.harmonic, seed=5)
        values = ft.meta_model_features(sample, np.random.default_rng(0))
        assert values["ela_meta.lin_simple.coef.max_by_min"] == pytest.approx(10.0, rel=1e-6)

    def test_random_fitness_not_linear(self):
        rng = np.random.default_rng(1)
        sample = WalkSample(points=rng.integers(0, 2, size=(1000, 10), dtype=np.uint8), fitness=rng.random(1000))
        values = ft.meta_model_features(sample, np.random.default_rng(0))
        assert values["ela_meta.lin_simple.adj_r2"] < 0.1

    def test_rank_deficient_fit_falls_back(self, setup_data):
        metadata = {}
        sample = random_walk_sample(setup_data.onemax, seed=5)
        values = ft.meta_model_features(sample, np.random.default_rng(0), metadata=metadata)
        # squares of bits repeat the linear columns
        assert metadata["ridge_fallback"] is True
        assert all(np.isfinite(v) for v in values.values())

    def test_costs_are_work_units(self, setup_data):
        sample = random_walk_sample(setup_data.onemax, seed=5)
        a = ft.meta_model_features(sample, np.random.default_rng(0))
        b = ft.meta_model_features(sample, np.random.default_rng(0))
        assert a["ela_meta.costs_runtime"] == b["ela_meta.costs_runtime"] > 0


class TestInformationContent:

    def test_constant_fitness(self):
        sample = WalkSample(points=np.zeros((50, 4), dtype=np.uint8), fitness=np.full(50, 2.0))
        values = ft.info_content_features(sample)
        assert values["ic.h_max"] == 0
        assert values["ic.m0"] == 0

    def test_increasing_fitness(self):
        sample = WalkSample(points=np.zeros((50, 4), dtype=np.uint8), fitness=np.arange(50.0))
        values = ft.info_content_features(sample)
        assert values["ic.h_max"] == 0
        assert values["ic.m0"] == pytest.approx(1 / 49)

    def test_onemax_walk_has_entropy(self, setup_data):
        values = ft.info_content_features(random_walk_sample(setup_data.onemax, seed=1))
        assert values["ic.h_max"] > 0.3
        assert values["ic.eps_s"] >= 1.0

    def test_eps_grid(self):
        assert ft.EPS_GRID[0] == 0
        assert ft.EPS_GRID[1] == pytest.approx(1e-5)
        assert ft.EPS_GRID[-1] == pytest.approx(1e15)


class TestNearestBetter:

    def test_flat_landscape_is_neutral(self, setup_data):
        values = ft.nbc_features(setup_data.flat, np.random.default_rng(0))
        assert values["nbc.nn_nb.sd_ratio"] == 1.0
        assert values["nbc.nn_nb.cor"] == 0.0

    def test_values_finite(self, setup_data):
        values = ft.nbc_features(random_walk_sample(setup_data.onemax, seed=1), np.random.default_rng(0))
        assert all(np.isfinite(v) for v in values.values())
        assert 0 <= values["nbc.nn_nb.mean_ratio"] <= 1


class TestFactorVector:

    def test_names_and_order(self, setup_data):
        vector = compute_factors(setup_data.onemax, 0, trials=2)
        assert vector.names == FACTOR_NAMES
        assert len(vector.values) == 32
        assert list(vector.as_dict()) == list(FACTOR_NAMES)
        assert len(vector.samples) == 2

    def test_deterministic(self, setup_data):
        assert compute_factors(setup_data.onemax, 7, trials=2) == compute_factors(setup_data.onemax, 7, trials=2)

    def test_onemax_differs_from_random(self, setup_data):
        onemax = compute_factors(setup_data.onemax, 0, trials=2)
        noise = compute_factors(RandomFitness(10), 0, trials=2)
        assert onemax["ela_meta.lin_simple.adj_r2"] - noise["ela_meta.lin_simple.adj_r2"] > 0.5

    def test_metadata(self, setup_data):
        vector = compute_factors(setup_data.onemax, 0, trials=1)
        assert vector.metadata["trials"] == 1
        assert vector.metadata["wall_seconds"] >= 0
        assert "ela_meta_seconds" in vector.metadata

    @pytest.mark.parametrize("family", family_keys())
    def test_finite_for_every_family(self, family):
        instance = create_instance(family=family, d=16)
        vector = compute_factors(instance, 0, trials=1)
        assert np.all(np.isfinite(vector.to_array()))

    def test_non_finite_replaced(self, monkeypatch, setup_data):
        def broken(sample, rng, wall_clock=False):
            return {name: float("nan") for name in FACTOR_NAMES if name.startswith("nbc.")}
        monkeypatch.setattr(ft, "nbc_features", broken)
        vector = compute_factors(setup_data.onemax, 0, trials=1)
        assert vector["nbc.nn_nb.cor"] == 0.0

    def test_equality_ignores_samples(self):
        a = FactorVector(values=(1.0,) * 32)
        b = FactorVector(values=(1.0,) * 32, metadata={"trials": 5})
        assert a == b
