"""Weighted with-replacement row sampling."""

import numpy as np

from .errors import InvalidInputError


def normalize_probabilities(weights):
    """Turn nonnegative weights into a probability vector."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise InvalidInputError("weights must be a non-empty 1-d array")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise InvalidInputError("weights must be finite and nonnegative")
    total = w.sum()
    if total <= 0:
        raise InvalidInputError("weights sum to zero")
    return w / total


def sample_with_replacement(probs, size, rng):
    """Draw ``size`` category indices i.i.d. from a probability vector.

    Inverse-CDF search: O(n) setup plus O(size log n) per draw batch, fully
    vectorized.  In the subsampling regime here (size << n) this beats an
    alias table, whose O(n) construction would dominate.
    """
    probs = np.asarray(probs, dtype=np.float64)
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0  # guard against rounding in the last bin
    idx = np.searchsorted(cdf, rng.random(int(size)), side="right")
    return np.minimum(idx, probs.size - 1)
