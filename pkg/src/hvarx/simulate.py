"""Stable synthetic VARX processes with known sparse lag structure.

Coefficients are drawn on the support implied by per-pair maximal lag
matrices (nonzero exactly at lags 1..L, so the truth obeys the suffix
pattern the estimator targets), the endogenous block is rescaled so the
companion spectral radius hits an exact target below 1, and series are
produced by the noisy recursion after a burn-in from zero initial state.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .data import (
    CoefficientSet,
    VarxDataset,
    VarxSpec,
    companion_spectral_radius,
    load_and_center,
)


@dataclass(frozen=True)
class SimDesign:
    """Dimensions, true lag structure, and draw parameters for generate()."""

    k: int
    m: int
    p: int
    s: int
    T: int
    true_lag_matrix_phi: np.ndarray
    true_lag_matrix_b: np.ndarray
    coefficient_scale: float = 1.0
    target_spectral_radius: float = 0.8
    innovation_sd: float = 1.0
    seed: int = 0
    burn_in: int = 200

    def __post_init__(self) -> None:
        if self.k < 1 or self.p < 1 or self.m < 0 or self.s < 0:
            raise ValueError("need k >= 1, p >= 1, m >= 0, s >= 0")
        if (self.m == 0) != (self.s == 0):
            raise ValueError(f"m={self.m} and s={self.s} must be zero together")
        if self.T < 2:
            raise ValueError(f"T must be >= 2, got {self.T}")
        if self.burn_in < 0:
            raise ValueError("burn_in must be nonnegative")
        if not self.coefficient_scale > 0:
            raise ValueError("coefficient_scale must be positive")
        if not self.innovation_sd > 0:
            raise ValueError("innovation_sd must be positive")
        if not 0.0 < self.target_spectral_radius < 1.0:
            raise ValueError(
                f"target_spectral_radius must be in (0, 1), got {self.target_spectral_radius}"
            )
        l_phi = np.asarray(self.true_lag_matrix_phi, dtype=np.intp).reshape(self.k, self.k)
        l_b = np.asarray(self.true_lag_matrix_b, dtype=np.intp).reshape(self.k, self.m)
        if l_phi.min() < 0 or l_phi.max() > self.p:
            raise ValueError(f"endogenous lag entries must lie in [0, {self.p}]")
        if l_b.size and (l_b.min() < 0 or l_b.max() > self.s):
            raise ValueError(f"exogenous lag entries must lie in [0, {self.s}]")
        l_phi.setflags(write=False)
        l_b.setflags(write=False)
        object.__setattr__(self, "true_lag_matrix_phi", l_phi)
        object.__setattr__(self, "true_lag_matrix_b", l_b)

    @property
    def spec(self) -> VarxSpec:
        return VarxSpec(p=self.p, s=self.s)


def replication_seed(seed: int, index: int) -> int:
    """Seed splitting rule for Monte Carlo replications: base plus index."""
    return seed + index


def replication_design(design: SimDesign, index: int) -> SimDesign:
    return replace(design, seed=replication_seed(design.seed, index))


def random_lag_matrices(
    rng: np.random.Generator, k: int, m: int, max_lag_phi: int, max_lag_b: int
) -> tuple:
    """Uniform lag matrices with every diagonal entry at least 1, so each
    series keeps some own-lag signal."""
    l_phi = rng.integers(0, max_lag_phi + 1, size=(k, k))
    np.fill_diagonal(l_phi, np.maximum(l_phi.diagonal(), 1))
    l_b = rng.integers(0, max_lag_b + 1, size=(k, m)) if m else np.zeros((k, 0), dtype=int)
    return l_phi, l_b


def _draw_on_support(
    rng: np.random.Generator, lag_matrix: np.ndarray, n_lags: int, scale: float
) -> np.ndarray:
    """Uniform(-scale, scale) draws at lags 1..L per pair, row-major order."""
    rows, cols = lag_matrix.shape
    block = np.zeros((rows, cols * n_lags))
    for i in range(rows):
        for d in range(cols):
            depth = int(lag_matrix[i, d])
            if depth:
                draws = rng.uniform(-scale, scale, size=depth)
                block[i, (np.arange(depth) * cols) + d] = draws
    return block


def _rescale_to_radius(phi: np.ndarray, target: float) -> np.ndarray:
    """Scalar multiple of phi whose companion spectral radius equals target
    within 1e-8, found by bracketing and bisection."""
    hi = 1.0
    for _ in range(200):
        if companion_spectral_radius(hi * phi) >= target:
            break
        hi *= 2.0
    else:
        raise RuntimeError(
            "spectral-radius rescaling failed: radius stays below target "
            "after 200 bracketing doublings"
        )
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        radius = companion_spectral_radius(mid * phi)
        if abs(radius - target) <= 1e-8:
            return mid * phi
        if radius < target:
            lo = mid
        else:
            hi = mid
    raise RuntimeError("spectral-radius rescaling did not converge in 200 bisection steps")


def generate(design: SimDesign) -> tuple:
    """Draw one dataset and its ground-truth coefficients.

    Draw order is fixed (endogenous paths row-major, then exogenous paths,
    then the exogenous series, then innovations), so a seed pins the output
    bit-for-bit. The returned truth carries zero means: the process itself
    is mean zero, while the dataset records the sample means it was
    centered with.
    """
    rng = np.random.default_rng(design.seed)
    k, m, p, s = design.k, design.m, design.p, design.s
    phi = _draw_on_support(rng, design.true_lag_matrix_phi, p, design.coefficient_scale)
    if phi.any():
        phi = _rescale_to_radius(phi, design.target_spectral_radius)
    else:
        warnings.warn(
            "all-zero endogenous lag matrix: skipping spectral-radius rescaling",
            stacklevel=2,
        )
    b = (
        _draw_on_support(rng, design.true_lag_matrix_b, s, design.coefficient_scale)
        if m
        else np.zeros((k, 0))
    )
    total = design.burn_in + design.T
    x = rng.standard_normal((m, total)) if m else np.zeros((0, total))
    eps = design.innovation_sd * rng.standard_normal((k, total))
    y = np.zeros((k, total))
    for t in range(total):
        acc = eps[:, t].copy()
        for lag in range(1, min(p, t) + 1):
            acc += phi[:, (lag - 1) * k : lag * k] @ y[:, t - lag]
        for lag in range(1, min(s, t) + 1):
            acc += b[:, (lag - 1) * m : lag * m] @ x[:, t - lag]
        y[:, t] = acc
    dataset = load_and_center(
        y[:, design.burn_in :], x[:, design.burn_in :] if m else None
    )
    truth = CoefficientSet(
        phi=phi,
        b=b,
        spec=design.spec,
        endo_means=np.zeros(k),
        exog_means=np.zeros(m),
    )
    return dataset, truth


def write_design_csvs(dataset: VarxDataset, endo_path: str, exog_path: str | None) -> None:
    """Dump the raw (un-centered) series in the package CSV format."""
    from .data import write_series_csv

    write_series_csv(endo_path, dataset.endo_names, dataset.raw_endo())
    if exog_path is not None and dataset.n_exog:
        write_series_csv(exog_path, dataset.exog_names, dataset.raw_exog())
