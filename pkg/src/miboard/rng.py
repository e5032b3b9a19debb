"""Deterministic, portable random number generation.

Replays and simulations must be reproducible across processes, platforms,
and reimplementations in other languages, so all game randomness goes
through Pcg32 (PCG XSH-RR 64/32) instead of Python's ``random``. Seed
derivation for batches uses SplitMix64. Both algorithms have published
reference sequences; the test suite pins them (see tests/test_rng.py and
docs/determinism.md).
"""

from __future__ import annotations

from dataclasses import dataclass

_MASK64 = (1 << 64) - 1

PCG_MULTIPLIER = 6364136223846793005
PCG_DEFAULT_STREAM = 54


def splitmix64(seed: int) -> int:
    """Advance one SplitMix64 step and return the mixed 64-bit output.

    Used to derive independent sub-seeds (e.g. one seed per simulated game)
    from a single master seed: seed_i = splitmix64(master + i * GOLDEN).
    """
    z = (seed + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, index: int) -> int:
    """Derive the index-th 64-bit sub-seed from a master seed."""
    return splitmix64((master + index * 0x9E3779B97F4A7C15) & _MASK64)


@dataclass
class Pcg32:
    """PCG XSH-RR 64/32: 64-bit LCG state, 32-bit rotated-xorshift output.

    State advances as ``state = state * PCG_MULTIPLIER + inc`` (mod 2^64)
    where ``inc`` is odd. Seeding follows the reference implementation:
    start from state 0, advance once, add the seed, advance again.
    """

    state: int = 0
    inc: int = 0

    @classmethod
    def seeded(cls, seed: int, stream: int = PCG_DEFAULT_STREAM) -> "Pcg32":
        rng = cls(state=0, inc=((stream << 1) | 1) & _MASK64)
        rng.next_u32()
        rng.state = (rng.state + (seed & _MASK64)) & _MASK64
        rng.next_u32()
        return rng

    def next_u32(self) -> int:
        """Return the next 32-bit output and advance the state."""
        old = self.state
        self.state = (old * PCG_MULTIPLIER + self.inc) & _MASK64
        xorshifted = (((old >> 18) ^ old) >> 27) & 0xFFFFFFFF
        rot = old >> 59
        return ((xorshifted >> rot) | (xorshifted << (32 - rot))) & 0xFFFFFFFF

    def randbound(self, bound: int) -> int:
        """Uniform integer in [0, bound) via the reference rejection scheme.

        Rejects outputs below ``2^32 mod bound`` so the modulo is unbiased.
        """
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        threshold = (1 << 32) % bound
        while True:
            r = self.next_u32()
            if r >= threshold:
                return r % bound

    def roll_die(self, sides: int) -> int:
        """Uniform die roll in [1, sides]."""
        return self.randbound(sides) + 1

    def choice(self, seq):
        """Uniform pick from a non-empty sequence."""
        return seq[self.randbound(len(seq))]

    def shuffle(self, seq: list) -> None:
        """In-place Fisher-Yates shuffle, drawing j = randbound(i + 1)
        for i from len-1 down to 1."""
        for i in range(len(seq) - 1, 0, -1):
            j = self.randbound(i + 1)
            seq[i], seq[j] = seq[j], seq[i]

    def clone(self) -> "Pcg32":
        return Pcg32(state=self.state, inc=self.inc)
