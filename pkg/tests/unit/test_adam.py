import numpy as np
import pytest

from best_of_many.exceptions import ShapeMismatch
from best_of_many.objectives import AdamState, adam_step
from best_of_many.tensor import Tensor
from best_of_many.validation import AdamConfig


def params(value=1.0):
    return {"w": Tensor(np.full(3, value), requires_grad=True)}


class TestAdamStep:
    """Test cases for the Adam update."""

    def test_zero_gradient_keeps_parameters(self):
        """Test that zero gradients leave parameters unchanged."""
        p = params()

        state = adam_step(p, {"w": np.zeros(3)}, AdamState())

        np.testing.assert_array_equal(p["w"].data, np.ones(3))
        assert state.t == 1

    def test_first_step_moves_by_learning_rate(self):
        """Test that the bias-corrected first step has magnitude lr."""
        p = params()

        adam_step(p, {"w": np.full(3, 0.5)}, AdamState(), AdamConfig(lr=1e-3))

        np.testing.assert_allclose(p["w"].data, np.full(3, 0.999), atol=1e-8)

    def test_missing_gradient_counts_as_zero(self):
        """Test that a parameter without a gradient keeps its value."""
        p = params()

        state = adam_step(p, {}, AdamState())

        np.testing.assert_array_equal(p["w"].data, np.ones(3))
        np.testing.assert_array_equal(state.m["w"], np.zeros(3))

    def test_gradient_shape_mismatch(self):
        """Test that a wrongly shaped gradient raises ShapeMismatch."""
        with pytest.raises(ShapeMismatch):
            adam_step(params(), {"w": np.zeros(4)}, AdamState())

    def test_deterministic(self):
        """Test that equal inputs give equal trajectories."""
        grads = [{"w": np.array([0.3, -1.0, 2.0])}, {"w": np.array([0.1, 0.2, -0.4])}]
        results = []
        for _ in range(2):
            p, state = params(), AdamState()
            for g in grads:
                state = adam_step(p, g, state)
            results.append(p["w"].data.copy())

        np.testing.assert_array_equal(results[0], results[1])
        assert state.t == 2

    def test_descends_quadratic(self):
        """Test that repeated steps reduce w^2."""
        p, state = params(2.0), AdamState()
        for _ in range(200):
            state = adam_step(p, {"w": 2.0 * p["w"].data}, state, AdamConfig(lr=0.05))

        assert np.all(np.abs(p["w"].data) < 0.5)
