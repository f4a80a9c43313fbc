"""Counter-based random streams keyed by (seed, index).

Each work unit (a Monte Carlo batch, an experiment sample) owns the Philox
stream keyed by its index, so results do not depend on scheduling.
"""

import numpy as np

_MASK = (1 << 64) - 1


def stream(seed: int, index: int) -> np.random.Generator:
    if not 0 <= seed <= _MASK:
        raise ValueError("seed must be a 64-bit unsigned integer")
    key = np.array([seed, index & _MASK], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def uniform_sample(seed: int, index: int, high: float) -> float:
    """The index-th point of a uniform sample on [0, high)."""
    return float(stream(seed, index).random()) * high
