"""Counter-based 64-bit random streams (SplitMix64).

Replicate ``i`` of a run seeded with ``seed`` draws from the stream whose
k-th output is ``mix64(key(seed, i) + (k + 1) * GOLDEN)``.  Streams are
therefore addressable without any shared state, which is what makes Monte
Carlo results independent of thread count and scheduling.  The compiled
kernel implements the same arithmetic.
"""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_STREAM_SALT = 0xD1B54A32D192ED03


def mix64(z):
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream_key(seed, index):
    return mix64((seed & MASK64) ^ mix64(index * GOLDEN + _STREAM_SALT))


def direction(r, twod):
    """Map a 64-bit draw to a step index in ``range(twod)``."""
    return ((r >> 32) * twod) >> 32


class SplitMixStream:
    __slots__ = ("state",)

    def __init__(self, seed, index=0):
        self.state = stream_key(seed, index)

    def next(self):
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)
