"""Counter-based random streams for order-independent reproducibility."""

from __future__ import annotations

import numpy as np


def stream(seed: int, index: int) -> np.random.Generator:
    """Independent generator keyed by (seed, index).

    Randomness is a pure function of the key, so per-trial results do
    not depend on evaluation order or worker count.
    """
    if seed < 0 or index < 0:
        raise ValueError("seed and index must be nonnegative")
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_indices(probs: np.ndarray, uniforms) -> np.ndarray:
    """Inverse-CDF sampling of symbol indices from uniforms in [0, 1)."""
    support = np.flatnonzero(probs > 0)
    edges = np.cumsum(probs[support])
    k = np.searchsorted(edges, np.asarray(uniforms), side="right")
    return support[np.minimum(k, support.size - 1)]
