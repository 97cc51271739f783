"""Proximal operators for the l1 and nested lag-suffix group penalties.

A coefficient "path" is the vector of coefficients of one (equation, series)
pair across lags 1..q. The hierarchical penalty sums the norms of all suffix
slices ``v[l:]`` of a path, which forces higher lags to zero before lower
ones; its proximal map is computed exactly by group soft-thresholding the
suffixes from the innermost outward.

Two interchangeable kernel backends exist: a compiled Cython extension and a
NumPy fallback. Selection happens at import time and can be forced with the
``HVARX_BACKEND`` environment variable (``auto``, ``compiled``, ``python``).
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

_IMPL = _kernels_py
_BACKEND_NAME = "python"

_requested = os.environ.get("HVARX_BACKEND", "auto").lower()
if _requested not in ("auto", "compiled", "python"):
    raise ImportError(
        f"HVARX_BACKEND={_requested!r} not recognized; use auto, compiled, or python"
    )
if _requested in ("auto", "compiled"):
    try:
        from . import _kernels_c

        _IMPL = _kernels_c
        _BACKEND_NAME = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "HVARX_BACKEND=compiled but the hvarx._kernels_c extension is "
                "not built; reinstall the package or use HVARX_BACKEND=python"
            ) from None


def backend() -> str:
    """Name of the active kernel backend: 'compiled' or 'python'."""
    return _BACKEND_NAME


def set_backend(name: str) -> None:
    """Switch the kernel backend at runtime (used by tests and benchmarks)."""
    global _IMPL, _BACKEND_NAME
    if name == "python":
        _IMPL = _kernels_py
        _BACKEND_NAME = "python"
    elif name == "compiled":
        from . import _kernels_c

        _IMPL = _kernels_c
        _BACKEND_NAME = "compiled"
    else:
        raise ValueError(f"unknown backend {name!r}")


def _as_paths(v: np.ndarray) -> np.ndarray:
    out = np.array(v, dtype=np.float64, order="C", copy=True)
    if out.ndim != 1:
        raise ValueError("expected a 1-D vector")
    return out.reshape(1, -1)


def group_soft_threshold(v: np.ndarray, tau: float) -> np.ndarray:
    """Multiplicative shrinkage of a whole vector: ``max(0, 1 - tau/||v||) * v``.

    Returns the zero vector whenever ``||v||_2 <= tau`` (in particular for
    ``v = 0``), which is the closed-form limit at the tie ``||v|| = tau``.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    v = np.asarray(v, dtype=np.float64)
    nrm = float(np.linalg.norm(v))
    if nrm <= tau:
        return np.zeros_like(v)
    return (1.0 - tau / nrm) * v


def prox_hier_suffix(v: np.ndarray, tau: float) -> np.ndarray:
    """Exact proximal map of the nested suffix-group penalty for one path.

    Minimizes ``0.5 * ||w - v||^2 + tau * sum_{l=1}^{q} ||w[l:]||_2``. The
    result's zero pattern is a suffix: once a suffix group is zero, every
    higher lag is zero too.
    """
    w = _as_paths(v)
    _IMPL.hier_prox_inplace(w, float(tau))
    return w[0]


def prox_l1(v: np.ndarray, tau: float) -> np.ndarray:
    """Elementwise soft-threshold: ``sign(v) * max(|v| - tau, 0)``."""
    w = _as_paths(v)
    _IMPL.soft_threshold_inplace(w, float(tau))
    return w[0]


def hier_prox_paths_inplace(w: np.ndarray, tau: float) -> None:
    """Apply :func:`prox_hier_suffix` to every row of a paths matrix, in place."""
    _IMPL.hier_prox_inplace(w, float(tau))


def soft_threshold_paths_inplace(w: np.ndarray, tau: float) -> None:
    """Elementwise soft-threshold of a 2-D array, in place."""
    _IMPL.soft_threshold_inplace(w, float(tau))


def hier_penalty_value(w: np.ndarray) -> float:
    """Sum of all suffix-group norms over the rows of a paths matrix."""
    return float(_IMPL.hier_penalty(np.ascontiguousarray(w, dtype=np.float64)))
