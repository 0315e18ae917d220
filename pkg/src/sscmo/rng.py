"""xoshiro256** seeded through splitmix64.

Written out by hand (rather than numpy's bit generators) so that the stream is
specified bit-for-bit and can be reproduced in any language.
"""

from __future__ import annotations

MASK = (1 << 64) - 1


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK


def splitmix64(state: int) -> tuple[int, int]:
    """Returns (next_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return state, z ^ (z >> 31)


class Xoshiro256:
    def __init__(self, seed: int):
        sm = seed & MASK
        s = []
        for _ in range(4):
            sm, out = splitmix64(sm)
            s.append(out)
        self.s = s

    @classmethod
    def from_state(cls, state) -> Xoshiro256:
        """Generator with the raw 256-bit state given as four 64-bit words."""
        if len(state) != 4 or not any(state):
            raise ValueError("state must be four words, not all zero")
        rng = cls.__new__(cls)
        rng.s = [int(w) & MASK for w in state]
        return rng

    def next_u64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & MASK, 7) * 9) & MASK
        t = (s[1] << 17) & MASK
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self) -> float:
        """Uniform on [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def integers(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi]."""
        return lo + int(self.random() * (hi - lo + 1))


def substream(seed: int, name: str) -> Xoshiro256:
    """Independent stream per generator section, keyed by a stable name hash."""
    h = 0xCBF29CE484222325
    for byte in name.encode():
        h = ((h ^ byte) * 0x100000001B3) & MASK  # FNV-1a
    _, mixed = splitmix64((seed & MASK) ^ h)
    return Xoshiro256(mixed)
