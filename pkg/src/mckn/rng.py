"""Deterministic 64-bit generator used by every randomized battery.

SplitMix64 progression: state advances by the golden-ratio increment
0x9E3779B97F4A7C15 and each output is finalized with two xor-shift-multiply
rounds (constants 0xBF58476D1CE4E5B9, 0x94D049BB133111EB).  Pure integer
arithmetic, so streams are identical on every platform.  Named substreams
are derived by folding an FNV-1a hash of the label into the seed.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1


def _fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for ch in text.encode("utf-8"):
        h ^= ch
        h = (h * 0x100000001B3) & _MASK
    return h


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        u = self.next_u64() >> 11          # 53 random bits
        return lo + (hi - lo) * (u * (1.0 / (1 << 53)))

    def uniforms(self, k: int, lo: float = 0.0, hi: float = 1.0) -> list[float]:
        return [self.uniform(lo, hi) for _ in range(k)]

    def substream(self, label: str) -> "SplitMix64":
        return SplitMix64(self.state ^ _fnv1a64(label))


def stream(seed: int, label: str) -> SplitMix64:
    """Named substream of the master seed."""
    return SplitMix64(seed ^ _fnv1a64(label))
