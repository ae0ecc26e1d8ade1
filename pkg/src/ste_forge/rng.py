"""Counter-based deterministic RNG for order-independent parallel generation.

SplitMix64 advances a 64-bit counter by a fixed increment and scrambles it
with an avalanche mix, so every draw depends only on the seed and the draw
index. Per-sample seeds are derived from (master_seed, sample_index, retry)
the same way, which makes dataset generation a pure function of the config
regardless of worker scheduling. Pure integer arithmetic; identical output
on every platform.
"""

from __future__ import annotations

from typing import Sequence, TypeVar

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

T = TypeVar("T")


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int, retry: int = 0) -> int:
    """Stateless per-sample seed from (master_seed, index, retry)."""
    s = _mix((master_seed + _GOLDEN) & _MASK64)
    s = _mix((s ^ ((index + 1) * _GOLDEN)) & _MASK64)
    if retry:
        s = _mix((s ^ ((retry + 1) * 0xD1342543DE82EF95)) & _MASK64)
    return s


class SplitMix64:
    """Deterministic stream of draws keyed solely by its seed."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix(self._state)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        u = (self.next_u64() >> 11) * 2.0**-53  # 53-bit mantissa in [0,1)
        return lo + (hi - lo) * u

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n) via the multiply-shift reduction."""
        if n <= 0:
            raise ValueError("n must be positive")
        return (self.next_u64() * n) >> 64

    def choice(self, seq: Sequence[T]) -> T:
        return seq[self.randint(len(seq))]

    def chance(self, p: float) -> bool:
        return self.uniform() < p
