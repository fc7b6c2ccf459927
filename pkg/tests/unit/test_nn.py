import math

import numpy as np
import pytest

from best_of_many.exceptions import ShapeMismatch
from best_of_many.nn import (
    CnnEncoder,
    Conv2d,
    ConvLstmCell,
    Linear,
    LstmCell,
    glorot_bound,
    glorot_uniform,
    linear,
    lstm_bias,
    maxpool2,
    upsample2,
)
from best_of_many.tensor import RngStream, Tape, Tensor, sum_


def zeros(*shape):
    return Tensor(np.zeros(shape))


class TestLstmCell:
    """Test cases for the LSTM cell."""

    def test_zero_parameters_zero_state(self):
        """Test that all-zero parameters and state give a zero step."""
        cell = LstmCell(3, 4, RngStream(0))
        cell.zero_()

        h, c = cell(zeros(3), (zeros(4), zeros(4)))

        np.testing.assert_array_equal(h.data, np.zeros(4))
        np.testing.assert_array_equal(c.data, np.zeros(4))

    def test_forget_gate_hand_evaluation(self):
        """Test c' = sigmoid(1) * c with zero weights and forget bias 1."""
        cell = LstmCell(2, 3, RngStream(0))
        cell.zero_()
        cell.b.data[...] = lstm_bias(3, forget_bias=1.0)

        h, c = cell(zeros(2), (zeros(3), Tensor(np.ones(3))))

        np.testing.assert_allclose(c.data, [0.731059] * 3, atol=1e-6)
        np.testing.assert_allclose(h.data, 0.5 * np.tanh(c.data))

    def test_published_sizes(self):
        """Test output shapes for a 32 -> 48 cell."""
        cell = LstmCell(32, 48, RngStream(1))

        h, c = cell(zeros(32), (zeros(48), zeros(48)))

        assert h.shape == (48,)
        assert c.shape == (48,)

    def test_batched_step(self):
        """Test a batched step against row-by-row steps."""
        cell = LstmCell(3, 5, RngStream(2))
        x = Tensor(RngStream(3).normal((4, 3)))
        h0, c0 = cell.initial_state(4)

        h, _ = cell(x, (h0, c0))
        row, _ = cell(x[1], (zeros(5), zeros(5)))

        np.testing.assert_allclose(h.data[1], row.data)

    def test_input_mismatch(self):
        """Test that a wrong input width raises ShapeMismatch."""
        cell = LstmCell(3, 4, RngStream(0))

        with pytest.raises(ShapeMismatch):
            cell(zeros(5), (zeros(4), zeros(4)))

    def test_gate_layout(self):
        """Test parameter shapes and the forget-block bias."""
        cell = LstmCell(3, 4, RngStream(0))

        assert cell.W_x.shape == (16, 3)
        assert cell.W_h.shape == (16, 4)
        np.testing.assert_array_equal(cell.b.data[4:8], np.ones(4))
        np.testing.assert_array_equal(cell.b.data[:4], np.zeros(4))


class TestConvLstmCell:
    """Test cases for the convolutional LSTM cell."""

    def test_zero_parameters_zero_output(self):
        """Test that zero weights, bias and state give zero outputs."""
        cell = ConvLstmCell(2, 3, RngStream(0))
        cell.zero_()

        h, c = cell(zeros(2, 6, 6), (zeros(3, 6, 6), zeros(3, 6, 6)))

        assert np.all(h.data == 0.0)
        assert np.all(c.data == 0.0)

    def test_same_padding_shape(self):
        """Test that a 3x3 cell keeps the 16x16 grid."""
        cell = ConvLstmCell(1, 32, RngStream(0))

        h, c = cell(zeros(1, 16, 16), (zeros(32, 16, 16), zeros(32, 16, 16)))

        assert h.shape == (32, 16, 16)
        assert c.shape == (32, 16, 16)

    def test_batched_initial_state(self):
        """Test the batched zero state."""
        cell = ConvLstmCell(2, 4, RngStream(0))
        state = cell.initial_state(3, 8, 8)

        h, _ = cell(Tensor(RngStream(1).normal((3, 2, 8, 8))), state)

        assert h.shape == (3, 4, 8, 8)

    @staticmethod
    def sensitivity(cell, frames, centre=(6, 6), h=1e-5):
        """|d h_T[:, centre] / d frames[0, :, p, q]| by finite differences."""

        def final_hidden(inputs):
            state = (zeros(cell.filters, 12, 12), zeros(cell.filters, 12, 12))
            for frame in inputs:
                state = cell(Tensor(frame), state)
            return state[0].data[:, centre[0], centre[1]]

        base = final_hidden(frames)
        grid = np.zeros((12, 12))
        for p in range(12):
            for q in range(12):
                bumped = frames.copy()
                bumped[0, :, p, q] += h
                grid[p, q] = np.abs(final_hidden(bumped) - base).max() / h
        return grid

    @staticmethod
    def ring(centre=(6, 6)):
        rows, cols = np.indices((12, 12))
        return np.maximum(np.abs(rows - centre[0]), np.abs(cols - centre[1]))

    def test_single_step_locality(self):
        """Test that one step only sees the kernel neighbourhood."""
        cell = ConvLstmCell(2, 3, RngStream(4))
        frames = RngStream(5).normal((1, 2, 12, 12))

        grid = self.sensitivity(cell, frames)
        distance = self.ring()

        assert grid[distance > 1].max() <= 1e-9
        assert grid[distance <= 1].max() > 1e-6

    def test_receptive_field_grows_per_step(self):
        """Test that three steps reach three kernel radii and no further."""
        cell = ConvLstmCell(2, 3, RngStream(4))
        frames = RngStream(6).normal((3, 2, 12, 12))

        grid = self.sensitivity(cell, frames)
        distance = self.ring()

        assert grid[distance > 3].max() <= 1e-9
        assert grid[(distance > 1) & (distance <= 3)].max() > 1e-7

    def test_spatial_mismatch(self):
        """Test that differing input and state grids raise ShapeMismatch."""
        cell = ConvLstmCell(1, 2, RngStream(0))

        with pytest.raises(ShapeMismatch):
            cell(zeros(1, 8, 8), (zeros(2, 4, 4), zeros(2, 4, 4)))


class TestLinear:
    """Test cases for dense layers."""

    def test_identity_weights(self):
        """Test W = I, b = 0 returns the input."""
        x = Tensor([1.5, -2.0])

        out = linear(Tensor(np.eye(2)), zeros(2), x)

        np.testing.assert_array_equal(out.data, x.data)

    def test_relu(self):
        """Test the ReLU activation."""
        out = linear(Tensor(np.eye(2)), zeros(2), Tensor([-1.0, 2.0]), "relu")

        np.testing.assert_array_equal(out.data, [0.0, 2.0])

    def test_hand_evaluation(self):
        """Test W=[[1,1]], b=[1], x=[2,3] gives [6]."""
        out = linear(Tensor([[1.0, 1.0]]), Tensor([1.0]), Tensor([2.0, 3.0]))

        np.testing.assert_array_equal(out.data, [6.0])

    def test_batched(self):
        """Test a (B, I) input."""
        layer = Linear(3, 2, RngStream(0), "tanh")

        out = layer(zeros(5, 3))

        assert out.shape == (5, 2)
        assert np.all(out.data == 0.0)

    def test_width_mismatch(self):
        """Test that a wrong input width raises ShapeMismatch."""
        with pytest.raises(ShapeMismatch):
            Linear(3, 2, RngStream(0))(zeros(4))


class TestCnnEncoder:
    """Test cases for the visual encoder."""

    def small(self, seed=0):
        return CnnEncoder(
            1, (16, 16), RngStream(seed), filters=(2, 2, 2, 2), hidden=4, out_features=3
        )

    def test_zero_image_zero_weights(self):
        """Test that zero weights map a zero image to a zero vector."""
        encoder = self.small()
        encoder.zero_()

        out = encoder(zeros(1, 16, 16))

        assert out.shape == (3,)
        np.testing.assert_array_equal(out.data, np.zeros(3))

    def test_output_range(self):
        """Test that the summary lies in (-1, 1)."""
        encoder = self.small()

        out = encoder(Tensor(RngStream(1).normal((2, 1, 16, 16), std=5.0)))

        assert out.shape == (2, 3)
        assert np.all(np.abs(out.data) < 1.0)

    def test_indivisible_extent(self):
        """Test that a 50x50 image is rejected."""
        with pytest.raises(ShapeMismatch):
            CnnEncoder(1, (50, 50), RngStream(0))

    def test_wrong_image_size(self):
        """Test that an image of another size is rejected."""
        with pytest.raises(ShapeMismatch):
            self.small()(zeros(1, 32, 32))

    def test_parameter_names(self):
        """Test nested parameter naming."""
        names = set(self.small().parameters())

        assert {"conv1.K", "conv4.b", "fc1.W", "fc2.b"} <= names


class TestPoolingAndUpsampling:
    """Test cases for 2x2 pooling and nearest-neighbour upsampling."""

    def test_pool_block_max(self):
        """Test pool([[1,2],[3,4]]) = [[4]]."""
        out = maxpool2(Tensor([[1.0, 2.0], [3.0, 4.0]]))

        np.testing.assert_array_equal(out.data, [[4.0]])

    def test_pool_gradient_goes_to_max(self):
        """Test that the pooling gradient reaches only the maximum."""
        x = Tensor([[1.0, 2.0], [3.0, 4.0]], requires_grad=True)
        with Tape() as tape:
            grads = tape.backward(sum_(maxpool2(x)))

        np.testing.assert_array_equal(grads[x], [[0.0, 0.0], [0.0, 1.0]])

    def test_pool_odd_extent(self):
        """Test that odd extents raise ShapeMismatch."""
        with pytest.raises(ShapeMismatch):
            maxpool2(zeros(3, 4))

    def test_upsample(self):
        """Test upsample([[a]]) = [[a,a],[a,a]]."""
        out = upsample2(Tensor([[2.5]]))

        np.testing.assert_array_equal(out.data, [[2.5, 2.5], [2.5, 2.5]])

    def test_conv_layer_keeps_grid(self):
        """Test that the same-padded layer keeps spatial extents."""
        layer = Conv2d(2, 5, RngStream(0), activation="relu")

        assert layer(zeros(3, 2, 8, 8)).shape == (3, 5, 8, 8)


class TestInit:
    """Test cases for parameter initialization."""

    def test_same_seed_same_parameters(self):
        """Test that a seed fixes every parameter."""
        a = LstmCell(3, 4, RngStream(5)).state_dict()
        b = LstmCell(3, 4, RngStream(5)).state_dict()

        for name in a:
            np.testing.assert_array_equal(a[name], b[name])

    def test_glorot_bound(self):
        """Test the bound sqrt(6 / (fan_in + fan_out)) and draws inside it."""
        draws = glorot_uniform((1000,), RngStream(0), 1, 1)

        assert glorot_bound(1, 1) == pytest.approx(math.sqrt(3.0))
        assert np.all(np.abs(draws) < math.sqrt(3.0))

    def test_lstm_bias(self):
        """Test that only the forget block is set."""
        np.testing.assert_array_equal(lstm_bias(2, 1.5), [0, 0, 1.5, 1.5, 0, 0, 0, 0])


class TestModule:
    """Test cases for parameter bookkeeping."""

    def test_state_round_trip(self):
        """Test loading another module's state."""
        source = Linear(3, 2, RngStream(0))
        target = Linear(3, 2, RngStream(1))

        target.load_state(source.state_dict())

        np.testing.assert_array_equal(target.W.data, source.W.data)
        assert target.num_parameters() == 8

    def test_load_missing_parameter(self):
        """Test that an incomplete state raises ShapeMismatch."""
        with pytest.raises(ShapeMismatch) as exc_info:
            Linear(3, 2, RngStream(0)).load_state({"W": np.zeros((2, 3))})

        assert exc_info.value.details["missing"] == ["b"]

    def test_load_wrong_shape(self):
        """Test that a wrongly shaped value raises ShapeMismatch."""
        with pytest.raises(ShapeMismatch):
            Linear(3, 2, RngStream(0)).load_state(
                {"W": np.zeros((3, 3)), "b": np.zeros(2)}
            )
