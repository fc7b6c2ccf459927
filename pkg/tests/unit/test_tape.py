import numpy as np
import pytest

from best_of_many.exceptions import BmsError, NotScalar
from best_of_many.tensor import (
    Tape,
    Tensor,
    active_tape,
    backward,
    logsumexp,
    matmul,
    square,
    sum_,
    tanh,
)


class TestTape:
    """Test cases for recording and the reverse sweep."""

    def test_square_sum_gradient(self):
        """Test that d/dx sum(x^2) = 2x."""
        x = Tensor([1.0, -2.0, 3.0], requires_grad=True)
        with Tape() as tape:
            grads = tape.backward(sum_(square(x)))

        np.testing.assert_allclose(grads[x], [2.0, -4.0, 6.0])

    def test_sum_gradient_is_all_ones(self):
        """Test that the gradient of a plain sum is all ones."""
        x = Tensor(np.zeros((2, 3)), requires_grad=True)
        with Tape() as tape:
            grads = tape.backward(sum_(x))

        np.testing.assert_array_equal(grads[x], np.ones((2, 3)))

    def test_logsumexp_gradient_is_softmax(self):
        """Test that the gradient of logsumexp is the softmax."""
        v = np.array([0.5, -1.0, 2.0])
        x = Tensor(v, requires_grad=True)
        with Tape() as tape:
            grads = tape.backward(logsumexp(x))

        np.testing.assert_allclose(grads[x], np.exp(v) / np.exp(v).sum())

    def test_reused_tensor_accumulates(self):
        """Test that a tensor used twice receives the sum of both gradients."""
        x = Tensor([3.0], requires_grad=True)
        with Tape() as tape:
            grads = tape.backward(sum_(x * x + x))

        np.testing.assert_allclose(grads[x], [7.0])

    def test_broadcast_gradient_is_reduced(self):
        """Test that a broadcast operand gets its gradient summed back."""
        a = Tensor(np.ones((2, 3)), requires_grad=True)
        b = Tensor(np.ones(3), requires_grad=True)
        with Tape() as tape:
            grads = tape.backward(sum_(a * b))

        np.testing.assert_array_equal(grads[b], [2.0, 2.0, 2.0])
        assert grads[a].shape == (2, 3)

    def test_matmul_chain_gradient(self):
        """Test the gradients of a two-matrix chain against the closed form."""
        a = Tensor([[1.0, 2.0]], requires_grad=True)
        w = Tensor([[3.0], [4.0]], requires_grad=True)
        with Tape() as tape:
            grads = tape.backward(sum_(tanh(matmul(a, w)) * 0.0 + matmul(a, w)))

        np.testing.assert_allclose(grads[a], [[3.0, 4.0]])
        np.testing.assert_allclose(grads[w], [[1.0], [2.0]])

    def test_unreached_tensor_has_zero_gradient(self):
        """Test that parameters not reaching the loss get zeros."""
        x = Tensor([1.0, 2.0], requires_grad=True)
        unused = Tensor([5.0], requires_grad=True)
        with Tape() as tape:
            loss = sum_(x)
            grads = tape.backward(loss)

        np.testing.assert_array_equal(grads[unused], [0.0])
        assert unused not in grads
        assert x in grads

    def test_constants_are_not_recorded(self):
        """Test that ops on constants leave the tape empty."""
        with Tape() as tape:
            sum_(Tensor([1.0, 2.0]))

        assert len(tape) == 0

    def test_non_scalar_loss(self):
        """Test that a non-scalar loss raises NotScalar."""
        x = Tensor([1.0, 2.0], requires_grad=True)
        with Tape() as tape:
            y = x * 2.0
            with pytest.raises(NotScalar):
                tape.backward(y)

    def test_tape_is_single_use(self):
        """Test that a second backward pass on one tape fails."""
        x = Tensor([1.0], requires_grad=True)
        with Tape() as tape:
            loss = sum_(x)
            tape.backward(loss)
            with pytest.raises(BmsError):
                tape.backward(loss)

    def test_fresh_tape_treats_old_tensors_as_leaves(self):
        """Test that a parameter can be differentiated again on a new tape."""
        x = Tensor([2.0], requires_grad=True)
        for _ in range(2):
            with Tape() as tape:
                grads = tape.backward(sum_(square(x)))

            np.testing.assert_allclose(grads[x], [4.0])

    def test_items_lists_leaves(self):
        """Test iteration over leaf gradients."""
        x = Tensor([1.0], requires_grad=True, name="x")
        with Tape() as tape:
            grads = tape.backward(sum_(x * 3.0))

        leaves = {tensor.name: grad for tensor, grad in grads.items()}
        np.testing.assert_allclose(leaves["x"], [3.0])


class TestActiveTape:
    """Test cases for the module-level tape helpers."""

    def test_active_tape_nesting(self):
        """Test that the innermost tape is active."""
        assert active_tape() is None
        with Tape() as outer:
            with Tape() as inner:
                assert active_tape() is inner
            assert active_tape() is outer
        assert active_tape() is None

    def test_backward_finds_recording_tape(self):
        """Test that backward() uses the tape that recorded the loss."""
        x = Tensor([1.5], requires_grad=True)
        with Tape():
            grads = backward(sum_(square(x)))

        np.testing.assert_allclose(grads[x], [3.0])

    def test_backward_without_tape(self):
        """Test that a loss recorded on no active tape is rejected."""
        with pytest.raises(BmsError):
            backward(sum_(Tensor([1.0])))
