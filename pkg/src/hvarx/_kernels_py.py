"""NumPy implementations of the solver inner kernels.

These are the fallback for :mod:`hvarx._kernels_c`; both modules expose the
same three functions and must stay numerically interchangeable.

A "paths" array has one coefficient path per row, lag-ascending along the
columns, so ``w[i, l:]`` is the suffix group starting at lag ``l + 1``.
"""

from __future__ import annotations

import numpy as np


def hier_prox_inplace(w: np.ndarray, tau: float) -> None:
    """Apply the nested suffix-group proximal map to every row of ``w``.

    Each row is replaced by the minimizer of
    ``0.5 * ||u - row||^2 + tau * sum_l ||u[l:]||_2``.

    Sequential group soft-thresholding from the innermost suffix outward is
    exact for nested groups. Because the thresholded suffix norm is
    ``max(0, norm - tau)``, the per-group shrinkage factors can be computed
    in one right-to-left sweep without touching the entries, then applied as
    prefix products.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    n, q = w.shape
    if n == 0 or q == 0:
        return
    if tau == 0.0:
        return
    scales = np.empty_like(w)
    cur = np.zeros(n)
    for l in range(q - 1, -1, -1):
        nrm = np.hypot(w[:, l], cur)
        scale = np.zeros(n)
        alive = nrm > tau
        scale[alive] = 1.0 - tau / nrm[alive]
        scales[:, l] = scale
        cur = np.maximum(nrm - tau, 0.0)
    np.cumprod(scales, axis=1, out=scales)
    w *= scales


def soft_threshold_inplace(w: np.ndarray, tau: float) -> None:
    """Elementwise soft-threshold: ``sign(x) * max(|x| - tau, 0)``."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if tau == 0.0:
        return
    np.multiply(np.sign(w), np.maximum(np.abs(w) - tau, 0.0), out=w)


def hier_penalty(w: np.ndarray) -> float:
    """Sum of all suffix-group norms over the rows of ``w``.

    Returns ``sum_i sum_l ||w[i, l:]||_2`` (unweighted groups).
    """
    if w.size == 0:
        return 0.0
    suffix_sq = np.cumsum(np.square(w)[:, ::-1], axis=1)[:, ::-1]
    return float(np.sqrt(suffix_sq).sum())
