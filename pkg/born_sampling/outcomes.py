"""Inverse-transform sampling of measurement outcomes."""

from __future__ import annotations

import numpy as np


def _check_rng(rng: np.random.Generator) -> None:
    if not isinstance(rng, np.random.Generator) or not isinstance(
        rng.bit_generator, np.random.PCG64
    ):
        raise TypeError("rng must be numpy.random.Generator using PCG64")


def sample_binary(p_first, rng: np.random.Generator) -> np.ndarray:
    """Draw outcome 0 with probability ``p_first`` and 1 otherwise.

    ``p_first`` may be a scalar or an array (one probability per draw).  Each
    draw consumes one double ``u = (x >> 11) · 2⁻⁵³`` from ``rng`` and yields
    0 iff ``u < p_first``, so a probability of exactly 0 or 1 is never
    violated.
    """
    _check_rng(rng)
    p = np.asarray(p_first, dtype=float)
    if np.any((p < 0.0) | (p > 1.0)):
        raise ValueError("probabilities must lie in [0, 1]")
    u = rng.random(p.shape)
    return np.where(u < p, 0, 1).astype(np.int64)


def sample_binary_n(p_first: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` independent draws sharing the same probability."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return sample_binary(np.full(n, float(p_first)), rng)


__all__ = ["sample_binary", "sample_binary_n"]
