"""Deterministic random numbers for reproducible pipelines.

Every draw of randomness in this package goes through :class:`Rng`, a pcg32
generator (PCG XSL-RR 64/32): a 64-bit linear-congruential state advanced by
``state * 6364136223846793005 + inc`` whose output is a rotated xorshift of
the previous state, truncated to 32 bits.  Pure integer arithmetic, so an
identical seed yields a bit-identical stream on every platform.

Derived streams come from :meth:`Rng.child`: the child is seeded with
``parent_seed XOR stream_id`` on pcg32 sequence number ``stream_id``, which
keeps sibling streams disjoint even when the XOR collides.

Draw conventions (all documented because downstream tests replay them):

* ``uniform()`` consumes two 32-bit outputs and builds a 53-bit double in
  ``[0, 1)``.
* ``randint(low, high)`` uses unbiased rejection sampling on 32-bit words
  (64-bit words for ranges wider than 2**32).
* ``standard_normal(n)`` uses Box-Muller pairs; ``u1`` is forced into
  ``(0, 1]`` so the logarithm is finite, and the second deviate of the final
  pair is discarded when ``n`` is odd.
* ``shuffle`` is a Fisher-Yates pass from the last index down to 1.
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
_MULT = 6364136223846793005
_TWO53_INV = 2.0 ** -53


class Rng:
    """pcg32 stream with float, integer, normal and shuffle helpers."""

    def __init__(self, seed: int, seq: int = 0):
        seed = int(seed) & _MASK64
        seq = int(seq) & _MASK64
        self.seed = seed
        self.seq = seq
        self._inc = ((seq << 1) | 1) & _MASK64
        self._state = 0
        self._next_u32()
        self._state = (self._state + seed) & _MASK64
        self._next_u32()

    def __repr__(self):
        return f"Rng(seed={self.seed}, seq={self.seq})"

    def child(self, stream_id: int) -> "Rng":
        """Independent derived stream: seed XOR stream-id on its own sequence."""
        stream_id = int(stream_id)
        return Rng(self.seed ^ stream_id, seq=stream_id)

    def _next_u32(self) -> int:
        old = self._state
        self._state = (old * _MULT + self._inc) & _MASK64
        xorshifted = (((old >> 18) ^ old) >> 27) & 0xFFFFFFFF
        rot = old >> 59
        return ((xorshifted >> rot) | (xorshifted << ((32 - rot) & 31))) & 0xFFFFFFFF

    def _next_u64(self) -> int:
        hi = self._next_u32()
        return (hi << 32) | self._next_u32()

    def uniform(self) -> float:
        """Uniform double in [0, 1) from 53 random bits."""
        return (self._next_u64() >> 11) * _TWO53_INV

    def randint(self, low: int, high: int) -> int:
        """Uniform integer in [low, high) via rejection sampling."""
        if high <= low:
            raise ValueError(f"empty range [{low}, {high})")
        bound = high - low
        if bound == 1:
            return low
        if bound <= 1 << 32:
            span = 1 << 32
            draw = self._next_u32
        else:
            span = 1 << 64
            draw = self._next_u64
        limit = (span // bound) * bound
        r = draw()
        while r >= limit:
            r = draw()
        return low + (r % bound)

    def standard_normal(self, n: int) -> np.ndarray:
        """``n`` standard-normal deviates via Box-Muller pairs."""
        out = np.empty(n, dtype=np.float64)
        for i in range(0, n, 2):
            u1 = ((self._next_u64() >> 11) + 1) * _TWO53_INV  # (0, 1]
            u2 = self.uniform()
            r = math.sqrt(-2.0 * math.log(u1))
            t = 2.0 * math.pi * u2
            out[i] = r * math.cos(t)
            if i + 1 < n:
                out[i + 1] = r * math.sin(t)
        return out

    def shuffle(self, values) -> None:
        """In-place Fisher-Yates shuffle of a list or 1-D array."""
        n = len(values)
        for i in range(n - 1, 0, -1):
            j = self.randint(0, i + 1)
            values[i], values[j] = values[j], values[i]

    def permutation(self, n: int) -> np.ndarray:
        """Shuffled ``arange(n)``."""
        idx = np.arange(n)
        self.shuffle(idx)
        return idx
