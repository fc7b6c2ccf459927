import numpy as np
import pandas as pd
import pytest

from best_of_many.exceptions import IoError
from best_of_many.metrics import sample_statistics
from best_of_many.plots import (
    plot_frame_statistics,
    plot_kl_overlay,
    plot_oracle_overlay,
    plot_samples,
)
from best_of_many.tensor import RngStream


def draw_samples(path):
    rng = RngStream(0)
    return plot_samples(
        np.tile([1.0, 0.0], (3, 1)),
        rng.substream(0).normal((6, 4, 2)),
        np.tile([0.7, 0.7], (4, 1)),
        np.array([0, 1, 0, 1, 2, 2]),
        path,
        title="samples",
    )


class TestPlots:
    """Test cases for SVG figures."""

    def test_samples_figure(self, tmp_path):
        """Test that the sample fan is written as SVG."""
        path = draw_samples(tmp_path / "fan.svg")

        assert path.read_text().startswith("<?xml")

    def test_rerun_is_byte_identical(self, tmp_path):
        """Test that the same inputs give the same bytes."""
        first = draw_samples(tmp_path / "a.svg").read_bytes()
        second = draw_samples(tmp_path / "b.svg").read_bytes()

        assert first == second

    def test_unwritable_path(self, tmp_path):
        """Test that a path under a file raises IoError."""
        blocker = tmp_path / "file"
        blocker.write_text("")

        with pytest.raises(IoError):
            draw_samples(blocker / "fan.svg")

    def test_overlays(self, tmp_path):
        """Test the KL and oracle overlays."""
        curve = pd.DataFrame({"step": [1, 2, 3], "kl": [0.5, 0.4, 0.3]})
        table = pd.DataFrame(
            {
                "method": ["bms", "cvae"],
                "oracle_h3": [0.1, 0.3],
                "oracle_h6": [0.2, 0.6],
            }
        )

        curves = {"bms": curve, "cvae": curve}
        kl = plot_kl_overlay(curves, tmp_path / "kl.svg", window=2)
        oracle = plot_oracle_overlay(table, tmp_path / "oracle.svg")

        assert kl.exists()
        assert oracle.exists()

    def test_frame_statistics(self, tmp_path):
        """Test the truth/best/mean/variance grid."""
        rng = RngStream(1)
        truth = rng.substream(0).uniform((6, 8, 8))
        stats = sample_statistics(rng.substream(1).uniform((3, 6, 8, 8)), truth)

        path = plot_frame_statistics(truth, stats, tmp_path / "frames.svg")

        assert path.exists()
