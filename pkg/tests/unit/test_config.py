import json

import pytest

from best_of_many.constants import ModelKind, ObjectiveKind, Profile, TaskKind
from best_of_many.exceptions import ConfigError, InvalidSpec
from best_of_many.validation import (
    EvalConfig,
    LikelihoodConfig,
    ModelProfileConfig,
    RunConfig,
    load_run_config,
)


class TestRunConfig:
    """Test cases for run configuration validation."""

    def test_defaults(self):
        """Test the documented defaults."""
        config = RunConfig()

        assert config.task is TaskKind.FORK
        assert config.objective is ObjectiveKind.BMS
        assert config.steps == 2000
        assert config.eval.horizons == [3, 6, 9, 12]
        assert config.star.n_modes == 4

    def test_task_defaults_for_fork(self):
        """Test T=10, batch 32 and sigma_dec from the noise level."""
        config = RunConfig().with_task_defaults()

        assert config.t_train == 10
        assert config.batch == 32
        assert config.model is ModelKind.TRAJECTORY
        assert config.sigma_dec == 0.05

    def test_task_defaults_for_blobs(self):
        """Test the image task defaults."""
        config = RunConfig(task="blobs").with_task_defaults()

        assert config.t_train == 5
        assert config.batch == 4
        assert config.model is ModelKind.IMAGE_SEQUENCE
        assert config.sigma_dec == 0.1

    def test_fork_map_uses_visual_model(self):
        """Test that the map task defaults to the visual model."""
        config = RunConfig(task="fork_map").with_task_defaults()

        assert config.model is ModelKind.VISUAL_TRAJECTORY

    def test_explicit_values_kept(self):
        """Test that task defaults never override explicit settings."""
        config = RunConfig(t_train=3, batch=8, sigma_dec=0.2).with_task_defaults()

        assert (config.t_train, config.batch, config.sigma_dec) == (3, 8, 0.2)

    @pytest.mark.parametrize(
        "overrides",
        [
            {"t_train": 0},
            {"alpha": 1.5},
            {"steps": -1},
            {"n_train": 0},
            {"batch": 0},
            {"task": "jsonl"},
            {"task": "blobs", "model": "trajectory"},
            {"task": "fork", "model": "visual_trajectory"},
        ],
    )
    def test_invalid_runs(self, overrides):
        """Test that inconsistent settings raise ConfigError."""
        with pytest.raises(ConfigError):
            RunConfig(**overrides)

    def test_missing_data_path(self, tmp_path):
        """Test that a data_path must exist."""
        with pytest.raises(ConfigError) as exc_info:
            RunConfig(task="jsonl", data_path=str(tmp_path / "absent.jsonl"))

        assert "absent.jsonl" in exc_info.value.details["path"]

    def test_invalid_fork_spec(self):
        """Test that generator settings are validated too."""
        with pytest.raises(InvalidSpec):
            RunConfig(fork={"map_size": 50})

    def test_evaluation_likelihood(self):
        """Test that evaluation always includes the normalizer."""
        config = RunConfig().with_task_defaults()

        assert config.likelihood(evaluation=True) == LikelihoodConfig(
            sigma_dec=0.05, include_normalizer=True
        )
        assert not config.likelihood().include_normalizer


class TestEvalConfig:
    """Test cases for evaluation settings."""

    def test_horizons_within(self):
        """Test horizons checked against the future length."""
        assert EvalConfig().horizons_within(12) == [3, 6, 9, 12]

        with pytest.raises(ConfigError):
            EvalConfig().horizons_within(8)

    @pytest.mark.parametrize(
        "overrides", [{"topk_frac": 0.0}, {"horizons": [0]}, {"t_samples_stats": 1}]
    )
    def test_invalid(self, overrides):
        """Test that invalid evaluation settings raise ConfigError."""
        with pytest.raises(ConfigError):
            EvalConfig(**overrides)


class TestModelProfileConfig:
    """Test cases for layer size profiles."""

    def test_paper_profile(self):
        """Test the published sizes."""
        sizes = ModelProfileConfig.for_profile("paper")

        assert sizes.profile is Profile.PAPER
        assert (sizes.embed, sizes.hidden, sizes.dec_embed) == (32, 48, 64)
        assert sizes.cnn_filters == (32, 64, 128, 256)

    def test_overrides(self):
        """Test overriding single sizes of a profile."""
        assert ModelProfileConfig.for_profile("desk", hidden=5).hidden == 5


class TestLoadRunConfig:
    """Test cases for loading configuration files."""

    def test_file_and_seed_override(self, tmp_path):
        """Test that an explicit seed overrides the file."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"objective": "cvae", "seed": 1, "steps": 5}))

        config = load_run_config(path, seed=9)

        assert config.objective is ObjectiveKind.CVAE
        assert config.seed == 9
        assert config.steps == 5
        assert config.t_train == 10

    def test_seed_from_environment(self, tmp_path, monkeypatch):
        """Test BMS_SEED when no seed is passed."""
        monkeypatch.setenv("BMS_SEED", "42")

        assert load_run_config().seed == 42

    def test_invalid_environment_seed(self, monkeypatch):
        """Test that a non-integer BMS_SEED raises ConfigError."""
        monkeypatch.setenv("BMS_SEED", "abc")

        with pytest.raises(ConfigError):
            load_run_config()

    def test_profile_override(self, monkeypatch):
        """Test the profile argument."""
        monkeypatch.delenv("BMS_SEED", raising=False)

        config = load_run_config(profile="paper")

        assert config.profile is Profile.PAPER
        assert config.seed == 0

    def test_missing_file(self, tmp_path):
        """Test that an unreadable config raises ConfigError."""
        with pytest.raises(ConfigError):
            load_run_config(tmp_path / "absent.json")

    def test_unknown_field(self, tmp_path):
        """Test that unknown keys raise ConfigError with the offending field."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"objectiv": "bms"}))

        with pytest.raises(ConfigError) as exc_info:
            load_run_config(path)

        assert any("objectiv" in error for error in exc_info.value.details["errors"])
