import numpy as np
import pandas as pd
import pytest

from best_of_many.checkpoint import checkpoint_load
from best_of_many.exceptions import NumericalError
from best_of_many.tensor import op_registry
from best_of_many.training import (
    CHECKPOINT_NAME,
    METRICS_COLUMNS,
    METRICS_NAME,
    prepare_data,
    train,
)
from best_of_many.validation import ModelProfileConfig, RunConfig

SIZES = ModelProfileConfig(
    embed=4,
    hidden=6,
    dec_embed=6,
    latent=3,
    recog_embed=4,
    recog_hidden=6,
    conv_embed=2,
    conv_hidden=(2, 3),
    dec_conv_embed=2,
    dec_conv_hidden=(3, 3),
    out_conv=2,
    latent_channels=2,
)


def tiny_config(**overrides):
    settings = dict(
        task="fork",
        steps=3,
        n_train=16,
        n_test=8,
        batch=4,
        t_train=2,
        checkpoint_every=0,
        eval_every=2,
        fork={"t_obs": 3, "t_fut": 4},
        eval={"horizons": [2, 4], "t_samples_cll": 10},
        sizes=SIZES,
    )
    settings.update(overrides)
    return RunConfig(**settings)


def run(config, out_dir):
    train_set, test_set = prepare_data(config)
    return train(config, train_set, out_dir, test_set=test_set, progress=False)


class TestPrepareData:
    """Test cases for assembling a run's datasets."""

    def test_generated_split(self):
        """Test the first n_train / last n_test split of generated data."""
        train_set, test_set = prepare_data(tiny_config())

        assert len(train_set) == 16
        assert len(test_set) == 8
        assert train_set.t_fut == 4

    def test_loaded_split(self, tmp_path):
        """Test splitting a loaded JSONL file by split_frac."""
        from best_of_many.data import gen_fork, write_jsonl
        from best_of_many.validation import ForkSpec

        path = tmp_path / "d.jsonl"
        write_jsonl(gen_fork(ForkSpec(t_obs=3, t_fut=4), 10, seed=0), path)

        train_set, test_set = prepare_data(
            tiny_config(task="jsonl", data_path=str(path), split_frac=0.7)
        )

        assert (len(train_set), len(test_set)) == (7, 3)


class TestTrain:
    """Test cases for the training loop."""

    def test_metrics_log(self, tmp_path):
        """Test one row per step and held-out NCLL on the eval cadence."""
        result = run(tiny_config(), tmp_path)

        frame = pd.read_csv(tmp_path / METRICS_NAME)
        assert list(frame.columns) == METRICS_COLUMNS
        assert frame["step"].tolist() == [1, 2, 3]
        assert frame["objective"].unique().tolist() == ["bms"]
        assert np.isnan(frame["eval_ncll"][0])
        assert np.isfinite(frame["eval_ncll"][1])
        assert np.isnan(frame["eval_ncll"][2])
        assert np.allclose(frame["loss"], -frame["value"])
        assert len(result.metrics) == 3

    def test_final_checkpoint(self, tmp_path):
        """Test that the last step is checkpointed."""
        result = run(tiny_config(), tmp_path)

        checkpoint = checkpoint_load(tmp_path / CHECKPOINT_NAME)

        assert checkpoint.step == 3
        restored = checkpoint.build_model()
        for name, value in result.model.state_dict().items():
            np.testing.assert_array_equal(restored.state_dict()[name], value)

    def test_deterministic_outputs(self, tmp_path):
        """Test that a seed reproduces metrics and checkpoint bytes."""
        run(tiny_config(), tmp_path / "a")
        run(tiny_config(), tmp_path / "b")

        for name in (METRICS_NAME, CHECKPOINT_NAME):
            first = (tmp_path / "a" / name).read_bytes()
            assert first == (tmp_path / "b" / name).read_bytes()

    def test_parameters_change(self, tmp_path):
        """Test that training moves the parameters away from initialization."""
        from best_of_many.models import build_model_for_run

        config = tiny_config()
        initial = build_model_for_run(config).state_dict()

        trained = run(config, tmp_path).model.state_dict()

        assert any(not np.array_equal(initial[name], trained[name]) for name in initial)

    def test_non_finite_forward_aborts(self, tmp_path):
        """Test that a NaN forward pass stops training with the log so far on disk."""

        def nan_tanh(a):
            return np.full_like(a, np.nan), lambda g: (g,)

        with op_registry.patched("tanh", nan_tanh):
            with pytest.raises(NumericalError):
                run(tiny_config(), tmp_path)

        frame = pd.read_csv(tmp_path / METRICS_NAME)
        assert list(frame.columns) == METRICS_COLUMNS
        assert len(frame) == 0
        assert not (tmp_path / CHECKPOINT_NAME).exists()

    def test_float32_profile(self, tmp_path):
        """Test that the 32-bit profile trains 32-bit parameters."""
        result = run(tiny_config(dtype="float32", eval_every=0), tmp_path)

        params = result.model.parameters().values()
        assert all(p.data.dtype == np.float32 for p in params)
        assert np.all(np.isfinite(result.metrics["loss"]))

    @pytest.mark.parametrize("objective", ["regression", "mc", "hybrid", "prior_bms"])
    def test_other_objectives(self, tmp_path, objective):
        """Test a short run of further objectives."""
        result = run(tiny_config(objective=objective, eval_every=0), tmp_path)

        assert result.metrics["objective"].unique().tolist() == [objective]
        assert np.all(np.isfinite(result.metrics["loss"]))

    def test_without_output_directory(self):
        """Test training in memory only."""
        config = tiny_config(steps=1, eval_every=0)
        train_set, _ = prepare_data(config)

        result = train(config, train_set, progress=False)

        assert result.checkpoint_path is None
        assert len(result.metrics) == 1

    def test_image_task(self, tmp_path):
        """Test a short run on tiny blob sequences."""
        config = tiny_config(
            task="blobs",
            steps=1,
            n_train=4,
            n_test=2,
            batch=2,
            eval_every=0,
            blobs={"grid": 8, "t_obs": 2, "t_fut": 2},
        )

        result = run(config, tmp_path)

        assert result.model.latent_shape == (2, 2, 2)
        assert checkpoint_load(tmp_path / CHECKPOINT_NAME).step == 1
