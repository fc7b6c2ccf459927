import json

import numpy as np
import pandas as pd
import pytest

from best_of_many.commands import (
    check_comparable,
    cmd_compare,
    cmd_eval,
    cmd_gen_data,
    cmd_gradcheck,
    cmd_sample,
    cmd_train,
    method_label,
)
from best_of_many.constants import ModelKind, ObjectiveKind
from best_of_many.exceptions import (
    ConfigError,
    IndexOutOfRange,
    InvalidK,
    KindMismatch,
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
        steps=2,
        n_train=16,
        n_test=8,
        batch=4,
        t_train=2,
        checkpoint_every=0,
        eval_every=0,
        fork={"t_obs": 3, "t_fut": 4},
        eval={"horizons": [2, 4], "t_samples_cll": 10},
        sizes=SIZES,
    )
    settings.update(overrides)
    return RunConfig(**settings)


def tiny_blobs(**overrides):
    return tiny_config(
        task="blobs",
        steps=1,
        n_train=4,
        n_test=2,
        batch=2,
        blobs={"grid": 8, "t_obs": 2, "t_fut": 2},
        **overrides,
    )


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    cmd_train(tiny_config(), out, progress=False)
    return out / "checkpoint.bms"


@pytest.fixture(scope="module")
def trained_blobs(tmp_path_factory):
    out = tmp_path_factory.mktemp("blobs")
    cmd_train(tiny_blobs(), out, progress=False)
    return out / "checkpoint.bms"


class TestGenData:
    """Test cases for dataset generation."""

    def test_trajectory_files(self, tmp_path):
        """Test JSONL splits and the manifest."""
        summary = cmd_gen_data(tiny_config(), tmp_path)

        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["counts"] == {"train": 16, "test": 8}
        assert manifest["files"] == {"train": "train.jsonl", "test": "test.jsonl"}
        assert manifest["spec"]["t_fut"] == 4
        assert summary["task"] == "fork"
        assert len((tmp_path / "test.jsonl").read_text().splitlines()) == 8

    def test_rerun_is_byte_identical(self, tmp_path):
        """Test that generation is a pure function of the seed."""
        cmd_gen_data(tiny_config(), tmp_path / "a")
        cmd_gen_data(tiny_config(), tmp_path / "b")

        for name in ("train.jsonl", "test.jsonl", "manifest.json"):
            first = (tmp_path / "a" / name).read_bytes()
            assert first == (tmp_path / "b" / name).read_bytes()

    def test_image_files(self, tmp_path):
        """Test that blobs are written as containers."""
        summary = cmd_gen_data(tiny_blobs(), tmp_path)

        assert summary["files"]["train"] == "train.bms"
        assert (tmp_path / "test.bms").exists()

    def test_jsonl_task(self, tmp_path):
        """Test that the jsonl task cannot be generated."""
        path = tmp_path / "d.jsonl"
        path.write_text("")

        with pytest.raises(ConfigError):
            config = tiny_config(task="jsonl", data_path=str(path))
            cmd_gen_data(config, tmp_path / "out")


class TestEval:
    """Test cases for checkpoint evaluation."""

    def test_trajectory_row(self, trained, tmp_path):
        """Test the NCLL, oracle and floor columns."""
        row = cmd_eval(trained, tmp_path)

        assert row["method"] == "bms"
        assert row["step"] == 2
        assert row["examples"] == 8
        assert np.isfinite(row["ncll"])
        assert row["oracle_h4"] >= 0.0
        frame = pd.read_csv(tmp_path / "eval.csv")
        assert list(frame.columns) == [
            "method",
            "step",
            "examples",
            "ncll",
            "oracle_h2",
            "oracle_h4",
            "ncll_floor",
        ]
        assert (tmp_path / "eval.txt").exists()

    def test_deterministic(self, trained, tmp_path):
        """Test that evaluation is reproducible."""
        cmd_eval(trained, tmp_path / "a")
        cmd_eval(trained, tmp_path / "b")

        assert (tmp_path / "a" / "eval.csv").read_bytes() == (
            tmp_path / "b" / "eval.csv"
        ).read_bytes()

    def test_external_dataset(self, trained, tmp_path):
        """Test evaluating on a generated JSONL file."""
        cmd_gen_data(tiny_config(seed=5), tmp_path / "data")

        data = tmp_path / "data" / "test.jsonl"

        row = cmd_eval(trained, tmp_path / "out", data_path=data)

        assert row["examples"] == 8

    def test_image_row(self, trained_blobs, tmp_path):
        """Test the forecast scores of an image model."""
        row = cmd_eval(trained_blobs, tmp_path)

        assert {"ncll", "csi", "far", "pod", "correlation"} <= set(row)
        assert "oracle_h2" not in row

    def test_kind_mismatch(self, trained, tmp_path):
        """Test that a trajectory model cannot evaluate frames."""
        cmd_gen_data(tiny_blobs(), tmp_path / "data")
        frames = tmp_path / "data" / "test.bms"

        with pytest.raises(KindMismatch):
            cmd_eval(trained, tmp_path / "out", data_path=frames)


class TestSample:
    """Test cases for sample figures and dumps."""

    def test_trajectory_samples(self, trained, tmp_path):
        """Test the SVG and JSON outputs."""
        summary = cmd_sample(trained, tmp_path, index=1, t=10, k=2)

        dump = json.loads((tmp_path / "sample_1.json").read_text())
        assert summary["t"] == 10
        assert np.asarray(dump["samples"]).shape == (10, 4, 2)
        assert set(dump["labels"]) <= {0, 1}
        assert (tmp_path / "sample_1.svg").read_text().startswith("<?xml")

    def test_image_samples(self, trained_blobs, tmp_path):
        """Test the frame statistics figure."""
        cmd_sample(trained_blobs, tmp_path, index=0, t=3)

        dump = json.loads((tmp_path / "sample_0.json").read_text())
        assert 0 <= dump["best_index"] < 3
        assert (tmp_path / "sample_0.svg").exists()

    def test_index_out_of_range(self, trained, tmp_path):
        """Test that a missing example raises IndexOutOfRange."""
        with pytest.raises(IndexOutOfRange):
            cmd_sample(trained, tmp_path, index=8, t=10)

    def test_invalid_clusters(self, trained, tmp_path):
        """Test that more clusters than samples raise InvalidK."""
        with pytest.raises(InvalidK):
            cmd_sample(trained, tmp_path, t=10, k=11)


class TestCompare:
    """Test cases for comparing objectives."""

    def test_method_labels(self):
        """Test labels qualified only when an objective repeats."""
        configs = [
            tiny_config(objective="bms", t_train=10),
            tiny_config(objective="bms", t_train=5),
            tiny_config(objective="hybrid", alpha=0.5),
            tiny_config(objective="cvae"),
        ]

        labels = [method_label(c, configs) for c in configs]

        assert labels == ["bms_T10", "bms_T5", "hybrid", "cvae"]

    def test_too_few_configs(self):
        """Test that one config cannot be compared."""
        with pytest.raises(ConfigError):
            check_comparable([tiny_config()])

    def test_differing_settings(self):
        """Test that runs may differ only in objective, T and alpha."""
        with pytest.raises(ConfigError) as exc_info:
            check_comparable([tiny_config(), tiny_config(objective="cvae", steps=3)])

        assert exc_info.value.details["fields"] == ["steps"]

    def test_comparison_outputs(self, tmp_path):
        """Test the table and overlay figures of two runs."""
        summary = cmd_compare(
            [tiny_config(objective="bms"), tiny_config(objective="cvae")],
            tmp_path,
            progress=False,
        )

        frame = pd.read_csv(tmp_path / "comparison.csv")
        assert summary["methods"] == ["bms", "cvae"]
        assert frame["method"].tolist() == ["bms", "cvae"]
        assert {"ncll", "oracle_h2", "oracle_h4", "final_kl"} <= set(frame.columns)
        assert (tmp_path / "kl_overlay.svg").exists()
        assert (tmp_path / "oracle_overlay.svg").exists()
        assert (tmp_path / "bms" / "metrics.csv").exists()


@pytest.fixture(scope="module")
def gradcheck(tmp_path_factory):
    out = tmp_path_factory.mktemp("gradcheck")
    return cmd_gradcheck(out, seed=0, instances=2), out


class TestGradcheck:
    """Test cases for the gradient check suite."""

    def test_report_table(self, gradcheck):
        """Test the report columns and categories."""
        summary, out = gradcheck

        frame = pd.read_csv(out / "gradcheck.csv")
        assert list(frame.columns) == [
            "category",
            "component",
            "passed",
            "max_rel_error",
            "error",
        ]
        assert set(frame["category"]) == {"op", "cell", "latent", "objective", "model"}
        assert summary["components"] == len(frame)

    def test_primitive_checks_pass(self, gradcheck):
        """Test that ops, cells and the latent path pass."""
        _, out = gradcheck
        frame = pd.read_csv(out / "gradcheck.csv")

        basics = frame[frame["category"].isin(["op", "cell", "latent"])]

        assert basics["passed"].all()

    def test_summary_matches_failures(self, gradcheck):
        """Test that passed is false exactly when a component failed."""
        summary, out = gradcheck
        frame = pd.read_csv(out / "gradcheck.csv")

        assert summary["passed"] == bool(frame["passed"].all())
        assert summary["failures"] == frame.loc[~frame["passed"], "component"].tolist()

    def test_objectives_cover_every_model(self, gradcheck):
        """Test that each objective is checked on each model family."""
        _, out = gradcheck
        frame = pd.read_csv(out / "gradcheck.csv")

        rows = frame.loc[frame["category"] == "objective", "component"]

        expected = {
            f"objective:{objective.value}:{model.value}"
            for objective in ObjectiveKind
            for model in ModelKind
        }
        assert set(rows) == expected
