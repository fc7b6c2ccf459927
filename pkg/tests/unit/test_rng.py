import numpy as np
import pytest

from best_of_many.tensor import RngStream


class TestRngStream:
    """Test cases for deterministic random streams."""

    def test_same_seed_same_draws(self):
        """Test that equal seeds give identical draws."""
        a = RngStream(42).normal((3, 4))
        b = RngStream(42).normal((3, 4))

        np.testing.assert_array_equal(a, b)

    def test_different_seeds_differ(self):
        """Test that different seeds give different draws."""
        assert not np.array_equal(RngStream(1).uniform(8), RngStream(2).uniform(8))

    def test_substream_is_pure(self):
        """Test that a substream can be re-derived at any time."""
        parent = RngStream(7)
        first = parent.substream(3).normal(5)
        parent.uniform(100)
        again = parent.substream(3).normal(5)

        np.testing.assert_array_equal(first, again)

    def test_substreams_are_independent(self):
        """Test that sibling substreams differ."""
        parent = RngStream(7)

        first = parent.substream(0).uniform(8)
        assert not np.array_equal(first, parent.substream(1).uniform(8))

    def test_uniform_open_interval(self):
        """Test that uniforms lie strictly inside (0, 1)."""
        u = RngStream(0).uniform(10_000)

        assert u.min() > 0.0
        assert u.max() < 1.0

    def test_uniform_from_top_bits(self):
        """Test u = ((bits >> 11) + 0.5) * 2**-53 on the raw stream."""
        bits = RngStream(3).raw(16) >> np.uint64(11)

        u = RngStream(3).uniform(16)

        np.testing.assert_array_equal(u, (bits.astype(np.float64) + 0.5) * 2.0**-53)

    def test_uniform_range(self):
        """Test scaling to [low, high)."""
        u = RngStream(0).uniform((100,), low=-3.0, high=-1.0)

        assert np.all((u > -3.0) & (u < -1.0))

    def test_normal_moments(self):
        """Test the first two moments of 10^5 normal draws."""
        z = RngStream(123).normal(100_000)

        assert abs(z.mean()) < 0.01
        assert abs(z.var() - 1.0) < 0.02

    def test_normal_odd_count(self):
        """Test that an odd number of normals is returned in the requested shape."""
        assert RngStream(0).normal((3, 3), mean=2.0, std=0.5).shape == (3, 3)

    def test_integers_bounds(self):
        """Test that integers lie in [0, high)."""
        draws = RngStream(5).integers(4, (1000,))

        assert draws.min() >= 0
        assert draws.max() <= 3
        assert set(draws.tolist()) == {0, 1, 2, 3}

    def test_permutation(self):
        """Test that a permutation contains every index once."""
        order = RngStream(9).permutation(50)

        assert sorted(order.tolist()) == list(range(50))

    def test_choice_frequencies(self):
        """Test category frequencies of weighted choices."""
        picks = RngStream(11).choice([0.25, 0.75], 10_000)

        assert np.mean(picks == 1) == pytest.approx(0.75, abs=0.013)

    def test_choice_never_picks_zero_probability(self):
        """Test that a zero-probability category is never drawn."""
        picks = RngStream(11).choice([1.0, 0.0], 1000)

        assert np.all(picks == 0)

    def test_negative_seed(self):
        """Test that a negative seed is rejected."""
        with pytest.raises(ValueError):
            RngStream(-1)

    def test_repr(self):
        """Test the stream description."""
        assert repr(RngStream(3).substream(2)) == "RngStream(seed=3, spawn_key=(0, 2))"
