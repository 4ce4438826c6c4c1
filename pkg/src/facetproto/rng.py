"""Deterministic, cross-platform PRNG primitives.

Every random choice in the package flows through the two algorithms pinned
here, so any reimplementation (in any language) can reproduce the exact
streams:

* ``mix(seed, j)`` — the j-th output of splitmix64 started at ``seed``.
  splitmix64 advances its 64-bit state by the golden-ratio increment and
  finalizes with two xor-multiply rounds (Steele & Vigna's constants).
* ``Xoshiro256StarStar`` — xoshiro256** seeded from four consecutive
  splitmix64 outputs. ``shuffle`` is a backwards Fisher-Yates draw using
  ``next_u64() % n`` (the modulo bias at 64 bits is below 2**-52 for any
  n this package uses).
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64_finalize(state: int) -> int:
    z = state & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns ``(output, next_state)``."""
    state = (state + _GOLDEN) & _MASK64
    return _splitmix64_finalize(state), state


def mix(seed: int, j: int) -> int:
    """Seed for the j-th item of a stream rooted at ``seed`` (j >= 0).

    Equals the (j+1)-th splitmix64 output from initial state ``seed``,
    computed in O(1) because the state after j+1 steps is
    ``seed + (j+1) * GOLDEN  (mod 2**64)``.
    """
    return _splitmix64_finalize((seed + (j + 1) * _GOLDEN) & _MASK64)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """xoshiro256** with splitmix64 seeding; all arithmetic mod 2**64."""

    __slots__ = ("_s0", "_s1", "_s2", "_s3", "_gauss")

    def __init__(self, seed: int):
        state = seed & _MASK64
        self._s0, state = splitmix64(state)
        self._s1, state = splitmix64(state)
        self._s2, state = splitmix64(state)
        self._s3, state = splitmix64(state)
        self._gauss: float | None = None

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return result

    def below(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        return self.next_u64() % n

    def shuffle(self, items: list) -> None:
        """In-place backwards Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def uniform(self) -> float:
        """Float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def normal(self) -> float:
        """Standard normal deviate via Box-Muller (pair cached)."""
        if self._gauss is not None:
            z = self._gauss
            self._gauss = None
            return z
        # u1 in (0, 1] so log() is finite
        u1 = ((self.next_u64() >> 11) + 1) * (2.0 ** -53)
        u2 = (self.next_u64() >> 11) * (2.0 ** -53)
        r = math.sqrt(-2.0 * math.log(u1))
        self._gauss = r * math.sin(2.0 * math.pi * u2)
        return r * math.cos(2.0 * math.pi * u2)
