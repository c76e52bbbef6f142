"""Counter-based, keyed pseudo-random streams.

Every random quantity in the package is a pure function of a tuple of
64-bit words (seed, stream tag, counters...). The mixing function is the
SplitMix64 finalizer; words are absorbed one at a time::

    h = 0
    for w in words:
        h = mix64((h ^ w) + GAMMA)

Because nothing depends on call order, results are identical across
platforms, thread counts and chunkings.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# stream tags
STREAM_SAMPLER = 1
STREAM_PATH = 2
STREAM_SEQUENCE = 3
STREAM_SLOW_GROWTH = 4
STREAM_FIXTURE = 5

TWO53 = 1 << 53


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def keyed_u64(*words: int) -> int:
    h = 0
    for w in words:
        h = mix64(((h ^ (w & MASK64)) + GAMMA) & MASK64)
    return h


def keyed_uniform53(*words: int) -> int:
    """Integer k in [0, 2^53); the uniform draw is k / 2^53."""
    return keyed_u64(*words) >> 11


def keyed_uniform(*words: int) -> Fraction:
    return Fraction(keyed_uniform53(*words), TWO53)


def heap_index(sigma: str) -> int:
    """Injective code of a bit string: the integer with binary digits '1' + sigma."""
    return int("1" + sigma, 2)


# vectorised twins (uint64 arithmetic wraps modulo 2^64)

def mix64_np(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    with np.errstate(over="ignore"):
        z ^= z >> np.uint64(30)
        z *= np.uint64(_M1)
        z ^= z >> np.uint64(27)
        z *= np.uint64(_M2)
        z ^= z >> np.uint64(31)
    return z


def keyed_u64_np(*words) -> np.ndarray:
    """Broadcasting version of :func:`keyed_u64`; words may be ints or uint64 arrays."""
    h = np.zeros(np.broadcast(*[np.asarray(w) for w in words]).shape, dtype=np.uint64)
    for w in words:
        w = np.asarray(w, dtype=np.uint64) if not isinstance(w, int) else np.uint64(w & MASK64)
        with np.errstate(over="ignore"):
            h = mix64_np((h ^ w) + np.uint64(GAMMA))
    return h


def keyed_uniform53_np(*words) -> np.ndarray:
    return keyed_u64_np(*words) >> np.uint64(11)
