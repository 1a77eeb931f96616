"""Reproducible random streams.

Every replica owns one :class:`RngStream`, a PCG64 bit generator keyed by
``(seed, replica)`` through :class:`numpy.random.SeedSequence`.  Only raw
64-bit words are taken from numpy; the transforms to uniforms, exponential
gaps and bounded integers are defined here (and mirrored exactly in the
compiled kernels) so that both kernel backends consume identical words and
produce identical trajectories.
"""
from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
_TWO_M53 = 1.0 / 9007199254740992.0  # 2**-53


class RngStream:
    """Splittable 64-bit random stream for one replica."""

    def __init__(self, seed: int = 0, replica: int = 0):
        if seed < 0 or replica < 0:
            raise ValueError("seed and replica must be non-negative")
        self.seed = int(seed)
        self.replica = int(replica)
        self.bitgen = np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=(self.replica,)))
        self._raw = self.bitgen.random_raw

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, replica={self.replica})"

    def child(self, index: int) -> "RngStream":
        """Independent sub-stream, e.g. for re-drawing a rejected replica."""
        s = RngStream.__new__(RngStream)
        s.seed = self.seed
        s.replica = self.replica
        s.bitgen = np.random.PCG64(
            np.random.SeedSequence(self.seed, spawn_key=(self.replica, int(index) + 1))
        )
        s._raw = s.bitgen.random_raw
        return s

    def raw(self) -> int:
        return self._raw()

    def uniform(self) -> float:
        """Uniform on the open interval (0, 1)."""
        return ((self._raw() >> 11) + 0.5) * _TWO_M53

    def exponential(self, rate: float) -> float:
        """Exponential waiting time with the given rate (strictly positive)."""
        return -math.log(((self._raw() >> 11) + 0.5) * _TWO_M53) / rate

    def below(self, m: int) -> int:
        """Uniform integer in ``[0, m)`` by Lemire's multiply-and-reject method."""
        if m <= 0:
            raise ValueError("m must be positive")
        prod = self._raw() * m
        low = prod & _MASK64
        if low < m:
            threshold = ((1 << 64) - m) % m
            while low < threshold:
                prod = self._raw() * m
                low = prod & _MASK64
        return prod >> 64

    def bernoulli_field(self, size: int, p: float = 0.5) -> np.ndarray:
        """``size`` independent Bernoulli(p) bits as uint8."""
        words = self.bitgen.random_raw(size)  # same words as `size` scalar draws
        u = ((words >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53
        return (u < p).astype(np.uint8)
