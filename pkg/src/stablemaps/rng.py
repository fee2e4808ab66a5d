"""Splittable counter-based random streams.

Every stochastic routine in the package draws from a stream derived from
a campaign seed plus a tuple of integer indices (sample index, stage tag,
...).  Streams are backed by Philox, so distinct index tuples give
statistically independent generators and work can be farmed out to
workers in any order without changing the output.
"""

from __future__ import annotations

import numpy as np

# stage tags, kept stable so that published seeds keep reproducing
STAGE_BRIDGE = 1
STAGE_BLACKS = 2
STAGE_LABELS = 3
STAGE_MARKS = 4
STAGE_DELAY = 5
STAGE_FIELD = 6

_MASK = (1 << 64) - 1
_MIX = 0x9E3779B97F4A7C15


def _fold(indices: tuple[int, ...]) -> np.uint64:
    h = 0xCBF29CE484222325
    for ix in indices:
        h = ((h ^ (ix & _MASK)) * _MIX) & _MASK
    return np.uint64(h)


def stream(seed: int, *indices: int) -> np.random.Generator:
    """Generator for the stream keyed by ``(seed, *indices)``."""
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), _fold(indices)],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
