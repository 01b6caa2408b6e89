"""Portable seeded bit streams: splitmix64 seeding into xoshiro256**.

Implemented by hand so that sign assignments are identical on every
platform and numpy version.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state; return ``(new_state, output)``."""
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256StarStar:
    """xoshiro256** generator seeded from a 64-bit integer via splitmix64."""

    def __init__(self, seed: int = 0, state: tuple[int, int, int, int] | None = None):
        if state is None:
            sm = seed & MASK64
            s = []
            for _ in range(4):
                sm, out = splitmix64(sm)
                s.append(out)
            state = tuple(s)
        if not any(state):
            raise ValueError("xoshiro256** state must not be all zero")
        self.s = list(state)

    def next_u64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self) -> float:
        """Uniform float in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def below(self, k: int) -> int:
        """Uniform integer in [0, k) by rejection (unbiased)."""
        if k <= 0:
            raise ValueError("k must be positive")
        limit = (1 << 64) - ((1 << 64) % k)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % k

    def bits(self, count: int) -> np.ndarray:
        """``count`` fair bits as a uint8 array.

        Each 64-bit output supplies 64 bits, least significant first; a
        partially used word is discarded at the end of the call.
        """
        words = -(-count // 64)
        raw = np.array([self.next_u64() for _ in range(words)], dtype="<u8")
        bits = np.unpackbits(raw.view(np.uint8), bitorder="little")
        return bits[:count]
