"""Penalty-level selection: grid anchor, grid construction, time-series
cross-validation, and BIC scoring.

The grid is anchored at the smallest penalty pair that forces an all-zero
fit. Cross-validation splits the sample into training, a validation block,
and a held-out test block (each 15% of T rounded up, validation at least
2); each grid pair is fitted once on the training segment and scored by
one-step-ahead MSFE over the validation block with coefficients held
fixed. The held-out test block is never touched here.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .data import CompactForm, VarxDataset, VarxSpec, prefix_compact
from .evaluation import one_step_forecast
from .prox import hier_prox_paths_inplace
from .solver import FitResult, SolverConfig, fit, path_permutation

PAIRINGS = ("cartesian", "common_index")


@dataclass(frozen=True)
class LambdaGrid:
    """Descending penalty values per axis; pairs are either the full
    Cartesian product or matched by index."""

    phi_values: tuple
    b_values: tuple
    pairing: str = "cartesian"

    def __post_init__(self) -> None:
        phi = tuple(float(v) for v in self.phi_values)
        b = tuple(float(v) for v in self.b_values)
        for axis, values in (("phi", phi), ("b", b)):
            if not values:
                raise ValueError(f"{axis} grid is empty")
            if any(u <= v for u, v in zip(values, values[1:])):
                raise ValueError(f"{axis} grid values must be strictly descending")
            # a single 0.0 stands in for the b axis when there is no exogenous block
            if any(v < 0 for v in values) or (values[0] <= 0 and values != (0.0,)):
                raise ValueError(f"{axis} grid values must be positive")
        if self.pairing not in PAIRINGS:
            raise ValueError(f"pairing must be one of {PAIRINGS}, got {self.pairing!r}")
        if self.pairing == "common_index" and len(phi) != len(b):
            raise ValueError("common_index pairing needs equal-length axes")
        object.__setattr__(self, "phi_values", phi)
        object.__setattr__(self, "b_values", b)

    def pairs(self):
        """(row, col, lambda_phi, lambda_b) in descending-penalty scan order."""
        if self.pairing == "cartesian":
            return [
                (i, j, lp, lb)
                for i, lp in enumerate(self.phi_values)
                for j, lb in enumerate(self.b_values)
            ]
        return [(i, 0, lp, lb) for i, (lp, lb) in enumerate(zip(self.phi_values, self.b_values))]

    @property
    def surface_shape(self) -> tuple:
        if self.pairing == "cartesian":
            return (len(self.phi_values), len(self.b_values))
        return (len(self.phi_values), 1)


@dataclass(frozen=True)
class CvResult:
    """Selected penalty pair and the validation-MSFE surface behind it."""

    best_lambda_phi: float
    best_lambda_b: float
    cv_msfe_surface: np.ndarray
    split_boundary: int
    grid: LambdaGrid


class BicResult(float):
    """BIC value; degenerate marks a rank-deficient residual covariance."""

    degenerate: bool

    def __new__(cls, value: float, degenerate: bool):
        obj = super().__new__(cls, value)
        obj.degenerate = degenerate
        return obj


def _zeroing_threshold(paths: np.ndarray) -> float:
    """Smallest tau at which the suffix-group prox maps every path to zero.

    The all-zero outcome is monotone in tau, so bisection applies; the
    upper bracket endpoint is returned so the result itself already zeros.
    """
    if paths.size == 0:
        return 0.0
    paths = np.ascontiguousarray(paths)
    hi = float(np.linalg.norm(paths, axis=1).max())
    if hi == 0.0:
        return 0.0
    lo = 0.0
    while hi - lo > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        trial = paths.copy()
        hier_prox_paths_inplace(trial, mid)
        if trial.any():
            lo = mid
        else:
            hi = mid
    return hi


def lambda_max(data: CompactForm, penalty_kind: str = "hierarchical") -> tuple:
    """Smallest (lambda_phi, lambda_b) forcing the all-zero fit.

    Derived from the gradient at zero: the zero solution is a fixed point
    exactly when the prox (at any step size, by positive homogeneity) kills
    every path of YZᵀ and YXᵀ.
    """
    if not data.Y.any():
        raise ValueError("lambda_max is undefined for all-zero Y")
    grad_z = data.Y @ data.Z.T
    grad_x = data.Y @ data.X.T if data.X.shape[0] else np.zeros((data.Y.shape[0], 0))
    if penalty_kind == "l1":
        lphi = float(np.abs(grad_z).max())
        lb = float(np.abs(grad_x).max()) if grad_x.size else 0.0
        return lphi, lb
    if penalty_kind != "hierarchical":
        raise ValueError(f"unknown penalty_kind {penalty_kind!r}")
    p, s = data.spec.p, data.spec.s
    paths_z = grad_z[:, path_permutation(data.n_endo, p)].reshape(-1, p)
    lphi = _zeroing_threshold(paths_z)
    if grad_x.size:
        paths_x = grad_x[:, path_permutation(data.n_exog, s)].reshape(-1, s)
        lb = _zeroing_threshold(paths_x)
    else:
        lb = 0.0
    return lphi, lb


def build_grid(lmax_pair: tuple, n_points: int = 10, ratio: float = 1e-3) -> LambdaGrid:
    """Log-spaced grid from each lambda_max down to ratio times it."""
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")
    lp, lb = float(lmax_pair[0]), float(lmax_pair[1])
    if lp <= 0.0:
        raise ValueError("lambda_phi grid anchor must be positive")
    phi_values = tuple(np.geomspace(lp, ratio * lp, n_points))
    if lb <= 0.0:
        b_values = (0.0,)
    else:
        b_values = tuple(np.geomspace(lb, ratio * lb, n_points))
    return LambdaGrid(phi_values=phi_values, b_values=b_values)


def split_lengths(n_time: int) -> tuple:
    """(training, validation, test) lengths: 15% blocks rounded up, the
    validation block at least 2 points."""
    h_test = -(-3 * n_time // 20)
    h_val = max(2, h_test)
    return n_time - h_test - h_val, h_val, h_test


def training_compact(dataset: VarxDataset, spec: VarxSpec, n_train: int) -> CompactForm:
    """Compact form of the first n_train observations, re-centered on them."""
    return prefix_compact(dataset, spec, n_train)


def validation_forecasts(dataset: VarxDataset, coefs, times) -> np.ndarray:
    """One-step forecasts at the given time indices, each from history
    strictly before it; column t' holds the forecast for times[t']."""
    raw_endo = dataset.raw_endo()
    raw_exog = dataset.raw_exog() if dataset.n_exog else None
    cols = [
        one_step_forecast(
            coefs, raw_endo[:, :t], raw_exog[:, :t] if raw_exog is not None else None
        )
        for t in times
    ]
    return np.column_stack(cols)


def _validation_msfe(dataset: VarxDataset, coefs, start: int, stop: int) -> float:
    forecasts = validation_forecasts(dataset, coefs, range(start, stop))
    actual = dataset.raw_endo()[:, start:stop]
    return float(np.mean((actual - forecasts) ** 2))


def cross_validate(
    dataset: VarxDataset,
    spec: VarxSpec,
    grid: LambdaGrid,
    config: SolverConfig | None = None,
    mode: str = "warm",
) -> CvResult:
    """Score every grid pair by validation MSFE and pick the minimizer.

    mode "warm" runs the pairs sequentially in descending-penalty order,
    warm-starting each fit from the previous solution (the deterministic
    reference); "cold" fits all pairs independently in a thread pool
    (HVARX_THREADS caps the workers). Ties break toward the earlier pair
    in scan order, i.e. toward larger penalties.
    """
    if mode not in ("warm", "cold"):
        raise ValueError(f"mode must be 'warm' or 'cold', got {mode!r}")
    if config is None:
        config = SolverConfig(lambda_phi=0.0)
    n_train, h_val, _ = split_lengths(dataset.n_time)
    if n_train < spec.obar + 2:
        raise ValueError(
            f"training segment of {n_train} observations is too short for "
            f"max lag order {spec.obar} (needs at least {spec.obar + 2})"
        )
    compact = training_compact(dataset, spec, n_train)
    pairs = grid.pairs()
    surface = np.full(grid.surface_shape, np.nan)

    def fit_pair(lp: float, lb: float, warm) -> FitResult:
        pair_config = replace(config, lambda_phi=lp, lambda_b=lb)
        return fit(compact, pair_config, initial=warm)

    def score(coefs) -> float:
        return _validation_msfe(dataset, coefs, n_train, n_train + h_val)

    if mode == "warm":
        warm = None
        for i, j, lp, lb in pairs:
            try:
                result = fit_pair(lp, lb, warm)
            except ValueError:
                continue
            warm = result.coefficients
            surface[i, j] = score(result.coefficients)
    else:
        workers = int(os.environ.get("HVARX_THREADS", "0")) or min(32, os.cpu_count() or 1)

        def run(pair):
            i, j, lp, lb = pair
            try:
                result = fit_pair(lp, lb, None)
            except ValueError:
                return i, j, np.nan
            return i, j, score(result.coefficients)

        with ThreadPoolExecutor(max_workers=workers) as pool:
            for i, j, value in pool.map(run, pairs):
                surface[i, j] = value

    best = None
    for i, j, lp, lb in pairs:
        value = surface[i, j]
        if math.isnan(value):
            continue
        if best is None or value < best[0]:
            best = (value, lp, lb)
    if best is None:
        raise ValueError("cross-validation failed on every grid pair")
    surface.setflags(write=False)
    return CvResult(
        best_lambda_phi=best[1],
        best_lambda_b=best[2],
        cv_msfe_surface=surface,
        split_boundary=n_train,
        grid=grid,
    )


def select_lambdas(
    dataset: VarxDataset,
    spec: VarxSpec,
    config: SolverConfig | None = None,
    n_points: int = 10,
    ratio: float = 1e-3,
    mode: str = "warm",
) -> CvResult:
    """Anchor the grid on the training segment, then cross-validate."""
    kind = config.penalty_kind if config is not None else "hierarchical"
    n_train, _, _ = split_lengths(dataset.n_time)
    if n_train < spec.obar + 2:
        raise ValueError(
            f"training segment of {n_train} observations is too short for "
            f"max lag order {spec.obar} (needs at least {spec.obar + 2})"
        )
    anchor = lambda_max(training_compact(dataset, spec, n_train), kind)
    return cross_validate(dataset, spec, build_grid(anchor, n_points, ratio), config, mode)


def bic(fit_result: FitResult, data: CompactForm) -> BicResult:
    """log det of the residual covariance plus (log N / N) times the nonzero
    count; rank-deficient covariances use only eigenvalues above 1e-12 and
    flag the result as degenerate."""
    coefs = fit_result.coefficients
    residual = data.Y - coefs.phi @ data.Z
    if data.X.shape[0]:
        residual -= coefs.b @ data.X
    n = data.n_effective
    eigs = np.linalg.eigvalsh(residual @ residual.T / n)
    keep = eigs > 1e-12
    log_det = float(np.log(eigs[keep]).sum())
    df = int(np.count_nonzero(coefs.phi) + np.count_nonzero(coefs.b))
    return BicResult(log_det + math.log(n) / n * df, degenerate=bool(not keep.all()))
