"""Dense tensor storage and the numeric profile it is created under."""

from contextlib import contextmanager
from typing import Any, Iterator, Optional, Tuple

import numpy as np

from best_of_many.constants import DType

_NUMPY_DTYPES = {DType.FLOAT64: np.float64, DType.FLOAT32: np.float32}

# 64-bit unless a caller opts into the training profile.
_profile = {"dtype": DType.FLOAT64}


def default_dtype() -> DType:
    """Return the numeric profile new tensors are created with."""
    return _profile["dtype"]


def numpy_dtype(dtype: Optional[DType] = None) -> Any:
    return _NUMPY_DTYPES[DType(dtype or default_dtype())]


@contextmanager
def use_dtype(dtype: DType | str) -> Iterator[None]:
    """Create tensors with ``dtype`` inside the block."""
    previous = _profile["dtype"]
    _profile["dtype"] = DType(dtype)
    try:
        yield
    finally:
        _profile["dtype"] = previous


class Tensor:
    """
    N-dimensional real array that can participate in a differentiation tape.

    ``node`` and ``tape_serial`` are set by the tape that recorded the tensor;
    a tensor recorded on an older tape is treated as a fresh leaf by a new one.
    """

    __slots__ = ("data", "requires_grad", "name", "node", "tape_serial")

    # Make ``ndarray <op> Tensor`` dispatch to the Tensor's reflected operator.
    __array_priority__ = 1000

    def __init__(
        self,
        data: Any,
        requires_grad: bool = False,
        name: Optional[str] = None,
        dtype: Optional[DType] = None,
    ) -> None:
        self.data: np.ndarray = np.array(data, dtype=numpy_dtype(dtype))
        self.requires_grad = requires_grad
        self.name = name
        self.node: Optional[int] = None
        self.tape_serial = 0

    @classmethod
    def wrap(cls, array: np.ndarray) -> "Tensor":
        """Wrap an op result without copying or casting it."""
        tensor = cls.__new__(cls)
        tensor.data = array
        tensor.requires_grad = False
        tensor.name = None
        tensor.node = None
        tensor.tape_serial = 0
        return tensor

    @classmethod
    def zeros(cls, shape: Tuple[int, ...], requires_grad: bool = False) -> "Tensor":
        return cls(np.zeros(shape), requires_grad=requires_grad)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def ndim(self) -> int:
        return int(self.data.ndim)

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def dtype(self) -> Any:
        return self.data.dtype

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float("nan")

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        """Return a constant copy that no tape will track."""
        return Tensor.wrap(self.data.copy())

    def __len__(self) -> int:
        return int(self.data.shape[0])

    def __repr__(self) -> str:
        label = f", name={self.name!r}" if self.name else ""
        grad = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{label}{grad})"


def as_tensor(value: Any) -> Tensor:
    """Return ``value`` as a Tensor, wrapping arrays and scalars as constants."""
    if isinstance(value, Tensor):
        return value
    return Tensor(value)
