"""Deterministic 64-bit PRNG (splitmix64) used for every random choice."""
from __future__ import annotations

from dataclasses import dataclass

_MASK = (1 << 64) - 1


@dataclass
class SeededRng:
    """splitmix64 stream. Same seed, same call sequence, same outputs, any platform.

    The state is a plain integer so it can be stored inside a session document
    and resumed exactly where it left off.
    """

    state: int = 0

    def __post_init__(self):
        self.state &= _MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def next_index(self, n: int) -> int:
        """Uniform-ish index in [0, n) by modulo reduction."""
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next() % n


def fnv1a64(data: bytes) -> int:
    """FNV-1a, 64-bit. Small, stable, good enough for stub reply selection."""
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & _MASK
    return h
