"""
Deterministic random streams.

Bits come from numpy's PCG64 (PCG XSL RR 128/64) seeded through
``SeedSequence(seed, spawn_key=...)``. Uniforms take the top 53 bits of each
64-bit draw, ``u = ((bits >> 11) + 0.5) * 2**-53``, so they lie strictly inside
(0, 1). Normals use Box-Muller on two consecutive blocks of uniforms
``u1, u2``: ``r = sqrt(-2 ln u1)``, ``z = (r cos 2πu2, r sin 2πu2)`` interleaved.
Both constructions are fixed, so a (seed, stream path, draw index) triple gives
the same value on every platform.
"""

import math
from typing import Optional, Sequence, Tuple

import numpy as np

Shape = int | Tuple[int, ...]

_UNIFORM_SCALE = 2.0**-53


def _extent(shape: Shape) -> Tuple[Tuple[int, ...], int]:
    dims = (shape,) if isinstance(shape, int) else tuple(shape)
    return dims, int(math.prod(dims))


class RngStream:
    """
    A reproducible stream of random draws with derivable substreams.
    """

    def __init__(
        self, seed: int, stream_id: int = 0, parent_key: Tuple[int, ...] = ()
    ) -> None:
        if seed < 0:
            raise ValueError(f"seed must be non-negative, got {seed}")
        self.seed = seed
        self.stream_id = stream_id
        self.spawn_key = parent_key + (stream_id,)
        sequence = np.random.SeedSequence(seed, spawn_key=self.spawn_key)
        self._bits = np.random.PCG64(sequence)

    def substream(self, stream_id: int) -> "RngStream":
        """Derive an independent stream; the same id always yields the same stream."""
        return RngStream(self.seed, stream_id, self.spawn_key)

    def raw(self, count: int) -> np.ndarray:
        if count == 0:
            return np.empty(0, dtype=np.uint64)
        return np.asarray(self._bits.random_raw(count), dtype=np.uint64)

    def uniform(
        self, shape: Shape = (), low: float = 0.0, high: float = 1.0
    ) -> np.ndarray:
        dims, count = _extent(shape)
        bits = self.raw(count) >> np.uint64(11)
        unit = (bits.astype(np.float64) + 0.5) * _UNIFORM_SCALE
        return (low + (high - low) * unit).reshape(dims)

    def normal(
        self, shape: Shape = (), mean: float = 0.0, std: float = 1.0
    ) -> np.ndarray:
        dims, count = _extent(shape)
        pairs = (count + 1) // 2
        u1 = self.uniform(pairs)
        u2 = self.uniform(pairs)
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * np.pi * u2
        z = np.empty(2 * pairs)
        z[0::2] = radius * np.cos(angle)
        z[1::2] = radius * np.sin(angle)
        return (mean + std * z[:count]).reshape(dims)

    def integers(self, high: int, shape: Shape = ()) -> np.ndarray:
        """Integers in [0, high)."""
        draws = np.floor(self.uniform(shape) * high).astype(np.int64)
        return np.minimum(draws, high - 1)

    def permutation(self, n: int) -> np.ndarray:
        return np.argsort(self.uniform(n), kind="stable")

    def choice(self, probs: Sequence[float], size: Optional[int] = None) -> np.ndarray:
        """Draw category indices according to ``probs``."""
        edges = np.cumsum(np.asarray(probs, dtype=np.float64))
        draws = self.uniform(size if size is not None else ())
        picked = np.searchsorted(edges / edges[-1], draws, side="right")
        return np.minimum(picked, len(edges) - 1)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, spawn_key={self.spawn_key})"
