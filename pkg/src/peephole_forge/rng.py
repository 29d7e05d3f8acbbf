"""SplitMix64: a tiny, fully specified 64-bit generator.

Generated test sources embed drawn constants, so the stream must be
identical on every platform and Python version.
"""

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * MIX1) & MASK64
        z = ((z ^ (z >> 27)) * MIX2) & MASK64
        return z ^ (z >> 31)

    def next_signed(self, bits: int) -> int:
        """Low ``bits`` of the next output as a two's-complement integer."""
        v = self.next_u64() & ((1 << bits) - 1)
        return v - (1 << bits) if v >> (bits - 1) else v
