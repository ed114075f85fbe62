"""SplitMix64, a 64-bit-state generator simple enough to reproduce anywhere.

Each output advances the state by the constant 0x9E3779B97F4A7C15 (mod 2**64)
and returns a mix of the new state::

    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)

Floats in [0, 1) are ``(output >> 11) * 2**-53``.
"""

from __future__ import annotations

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
MUL1 = 0xBF58476D1CE4E5B9
MUL2 = 0x94D049BB133111EB
MASK = (1 << 64) - 1


def _mix(z):
    z = (z ^ (z >> 30)) * MUL1 & MASK
    z = (z ^ (z >> 27)) * MUL2 & MASK
    return z ^ (z >> 31)


class SplitMix64:
    def __init__(self, seed: int):
        if not 0 <= int(seed) <= MASK:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.state = int(seed)

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK
        return _mix(self.state)

    def u64_array(self, count: int) -> np.ndarray:
        """The next ``count`` outputs, identical to calling next_u64 repeatedly."""
        steps = np.arange(1, count + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * np.uint64(GAMMA)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(MUL1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(MUL2)
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + count * GAMMA) & MASK
        return z

    def random(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def uniforms(self, count: int) -> np.ndarray:
        return (self.u64_array(count) >> np.uint64(11)).astype(np.float64) * 2.0**-53
