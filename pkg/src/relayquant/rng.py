"""Counter-based random streams for reproducible, schedule-independent sampling.

Every stream is addressed by (seed, lane, block) through the 256-bit Philox
counter, so the values drawn from one stream never depend on how many other
streams were consumed, in which order, or on which thread.  Monte Carlo code
assigns one lane per power-grid point and one block per trial chunk.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def stream(seed: int, lane: int, block: int) -> np.random.Generator:
    """Return the generator for a given (seed, lane, block) address.

    Two calls with identical arguments yield identical generators; distinct
    addresses give statistically independent streams with disjoint counter
    ranges (each block owns 2^64 Philox states).
    """
    key = np.array([seed & _MASK64, (seed >> 64) & _MASK64], dtype=np.uint64)
    counter = np.array([0, block & _MASK64, lane & _MASK64, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))
