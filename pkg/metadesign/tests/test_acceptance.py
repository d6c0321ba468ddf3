"""
Scaled end-to-end checks. Slow; deselect with -m "not slow".
"""
import numpy as np
import pytest
import torch

from metadesign.baselines.handcoded import run_handcoded
from metadesign.baselines.programs import as_program
from metadesign.design.program import parse_tokens
from metadesign.interpreter.engine import run
from metadesign.landscape.features import compute_factors
from metadesign.models.enums import BaselineKind
from metadesign.plugin import MetaDesignPlugin
from metadesign.policy.network import PolicyNetwork
from metadesign.policy.sampling import masked_probabilities, sample_sequence
from metadesign.tests.factories import create_config, create_instance
from metadesign.trainer.ppo import clipped_objective

pytestmark = pytest.mark.slow


class TestAcceptance:

    def test_sampled_programs_parse_and_run(self):
        policy = PolicyNetwork(seed=11)
        rng = np.random.default_rng(11)
        instance = create_instance(family="onemax", d=20)
        for i in range(10000):
            tokens, _ = sample_sequence(policy, rng)
            report = run(parse_tokens(tokens), instance, 500, seed=i, trace=False)
            assert report.fe_used <= 500

    @pytest.mark.parametrize("kind", list(BaselineKind))
    @pytest.mark.parametrize("family", ["onemax", "leadingones"])
    @pytest.mark.parametrize("d", [10, 20])
    def test_baselines_match_interpreter(self, kind, family, d):
        instance = create_instance(family=family, d=d)
        for seed in range(3):
            expected = run(as_program(kind), instance, 2000, seed=seed)
            assert run_handcoded(kind, instance, 2000, seed=seed).trace == expected.trace

    def test_clip_cases(self):
        values = clipped_objective([1.5, 0.5, 1.0, 1.0], [1.0, -1.0, 0.3, -0.7], 0.2)
        assert values.tolist() == pytest.approx([1.2, -0.8, 0.3, -0.7], abs=1e-15)

    def test_masked_softmax(self):
        rng = np.random.default_rng(5)
        logits = torch.as_tensor(rng.normal(scale=5.0, size=(10000, 54)))
        mask = rng.random((10000, 54)) < 0.3
        mask[np.arange(10000), rng.integers(0, 54, 10000)] = True
        probs = masked_probabilities(logits, mask).numpy()
        assert np.all(probs[~mask] == 0.0)
        assert np.abs(probs.sum(axis=1) - 1.0).max() < 1e-9

    def test_landscape_sanity(self):
        onemax = create_instance(family="onemax", d=50)
        first = compute_factors(onemax, 21)
        assert first == compute_factors(onemax, 21)
        assert first["ela_meta.lin_simple.adj_r2"] > 0.99

    def test_training_pipeline_deterministic(self, tmp_path):
        outputs = []
        for name in ("first", "second"):
            config = create_config(tmp_path / name, epochs=4, batch_size=4, train_budget=300, pop_size=20,
                                   runs_per_instance=2, master_seed=3)
            design_train = MetaDesignPlugin().get_actions()["design_train"]
            result = design_train({"config": config, "workers": 1}, {"problem": "onemax", "dims": 20})
            with open(result["train_log"], "rb") as log_file, open(result["algorithms"], "rb") as algorithms:
                outputs.append((log_file.read(), algorithms.read()))
        assert outputs[0] == outputs[1]
