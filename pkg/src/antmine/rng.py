"""Deterministic random number generation.

The simulation engines (pure-Python and numba) must consume *identical*
random streams for a given seed, so the generator is a hand-rolled
splitmix64: trivially portable, one 64-bit word of state, and good enough
statistically for agent simulation.  ``numpy.random`` generators are kept
for the evolutionary side, seeded through :func:`derive_seed`.
"""

from __future__ import annotations

MASK64 = 0xFFFFFFFFFFFFFFFF

_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def splitmix64_next(state: int) -> tuple[int, int]:
    """Advance one splitmix64 step; returns (new_state, output word)."""
    state = (state + _GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return state, z ^ (z >> 31)


class SplitMix64:
    """Minimal splitmix64 stream with the draw helpers the engines use."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state, out = splitmix64_next(self.state)
        return out

    def random(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return int(self.random() * n)


def fnv1a64(text: str) -> int:
    """64-bit FNV-1a hash of a UTF-8 string."""
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & MASK64
    return h


def derive_seed(master: int, label: str) -> int:
    """Derive a per-module seed from the master seed.

    Rule (documented so runs are reproducible across versions): XOR the
    master seed with the FNV-1a hash of the label, then apply one
    splitmix64 output step.
    """
    _, out = splitmix64_next((master & MASK64) ^ fnv1a64(label))
    return out
