"""Deterministic random primitives built on the splitmix64 generator.

Prompt composition, co-occurrence sampling, zero-shot splits and review-batch
sampling all have to be reproducible across machines and across language
runtimes, so nothing in this package uses the interpreter's global RNG.
splitmix64 is a tiny, well-known mixer (the seeding generator of the xoshiro
family); its output for a given seed is fully specified by the constants
below, which makes every sampling decision in this toolkit portable.
"""

from __future__ import annotations

from typing import Sequence, TypeVar

_MASK64 = (1 << 64) - 1

T = TypeVar("T")


class SplitMix64:
    """splitmix64 stream plus the small sampling helpers the toolkit needs.

    All helpers consume a documented number of draws from the stream, so the
    sequence of values produced by a fixed seed is stable across versions.
    """

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_uint64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return (z ^ (z >> 31)) & _MASK64

    def randrange(self, n: int) -> int:
        """Unbiased integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError(f"randrange needs a positive bound, got {n}")
        limit = _MASK64 + 1 - ((_MASK64 + 1) % n)
        while True:
            r = self.next_uint64()
            if r < limit:
                return r % n

    def choice(self, seq: Sequence[T]) -> T:
        if not seq:
            raise ValueError("cannot choose from an empty sequence")
        return seq[self.randrange(len(seq))]

    def sample(self, seq: Sequence[T], k: int) -> list[T]:
        """k distinct elements, partial Fisher-Yates order. Requires k <= len(seq)."""
        n = len(seq)
        if k < 0 or k > n:
            raise ValueError(f"sample size {k} out of range for sequence of length {n}")
        idx = list(range(n))
        for i in range(k):
            j = i + self.randrange(n - i)
            idx[i], idx[j] = idx[j], idx[i]
        return [seq[i] for i in idx[:k]]

    def weighted_index(self, weights: Sequence[int]) -> int:
        """Index drawn proportionally to non-negative integer weights.

        Integer weights keep the draw exact (no floating-point cumsum), which
        matters for cross-implementation reproducibility.
        """
        total = 0
        for w in weights:
            if w < 0:
                raise ValueError("weights must be non-negative")
            total += w
        if total == 0:
            raise ValueError("at least one weight must be positive")
        r = self.randrange(total)
        acc = 0
        for i, w in enumerate(weights):
            acc += w
            if r < acc:
                return i
        raise AssertionError("unreachable")
