"""
.. include:: ../../README.md
"""

__version__ = "0.1.0"

from .tensor import RngStream, Tape, Tensor  # noqa: E402

__all__ = ["RngStream", "Tape", "Tensor"]
