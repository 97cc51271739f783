"""Lag-matrix extraction, one-step forecasting, expanding-window MSFE
evaluation, and the Diebold-Mariano comparison of two forecast paths.

Forecast accuracy is measured as MSFE, the mean of squared one-step-ahead
errors over every series and every step of the test block (the last 15%
of observations, rounded up). The model is re-centered and re-fitted on
all data before each test point with the penalty levels held fixed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .data import CoefficientSet, VarxDataset, VarxSpec, prefix_compact
from .solver import SolverConfig, fit


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LagMatrices:
    """Per-pair maximal nonzero lag orders: l_phi is (k, k) over endogenous
    predictors, l_b is (k, m) over exogenous ones; 0 marks an all-zero path."""

    l_phi: np.ndarray
    l_b: np.ndarray
    zero_threshold: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "l_phi", _freeze(np.asarray(self.l_phi, dtype=np.intp)))
        object.__setattr__(self, "l_b", _freeze(np.asarray(self.l_b, dtype=np.intp)))
        if self.zero_threshold < 0:
            raise ValueError("zero_threshold must be nonnegative")
        if self.l_phi.size and self.l_phi.min() < 0 or self.l_b.size and self.l_b.min() < 0:
            raise ValueError("lag orders cannot be negative")


@dataclass(frozen=True)
class ForecastReport:
    """Expanding-window forecasts with their actuals and summary scores.

    dm_statistic/dm_pvalue stay None until compare_forecasts stamps them
    against a competing report. fit_ok marks steps whose re-fit succeeded;
    failed steps fall back to the training-mean forecast.
    """

    forecasts: np.ndarray
    actuals: np.ndarray
    msfe: float
    horizon: int
    lambda_phi: float
    lambda_b: float
    penalty_kind: str
    fit_ok: np.ndarray
    all_converged: bool
    dm_statistic: float | None = None
    dm_pvalue: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "forecasts", _freeze(np.atleast_2d(self.forecasts)))
        object.__setattr__(self, "actuals", _freeze(np.atleast_2d(self.actuals)))
        object.__setattr__(self, "fit_ok", _freeze(np.asarray(self.fit_ok, dtype=bool)))
        if self.forecasts.shape != self.actuals.shape:
            raise ValueError(
                f"forecast shape {self.forecasts.shape} does not match "
                f"actuals {self.actuals.shape}"
            )
        if self.horizon != self.forecasts.shape[1]:
            raise ValueError(f"horizon {self.horizon} != {self.forecasts.shape[1]} steps")

    def errors(self) -> np.ndarray:
        return self.actuals - self.forecasts

    def to_dict(self) -> dict:
        return {
            "penalty_kind": self.penalty_kind,
            "lambda_phi": self.lambda_phi,
            "lambda_b": self.lambda_b,
            "horizon": self.horizon,
            "msfe": self.msfe,
            "dm_statistic": self.dm_statistic,
            "dm_pvalue": self.dm_pvalue,
            "all_converged": self.all_converged,
            "fit_ok": [bool(v) for v in self.fit_ok],
            "forecasts": self.forecasts.tolist(),
            "actuals": self.actuals.tolist(),
        }


def test_horizon(n_time: int) -> int:
    """Size of the held-out test block: 15% of T, rounded up."""
    return -(-3 * n_time // 20)


def extract_lag_matrices(coefs: CoefficientSet, zero_threshold: float = 0.0) -> LagMatrices:
    """Largest lag with |coefficient| > zero_threshold per equation/predictor
    pair; 0 when the whole path is zero. The solver produces exact zeros, so
    the default threshold is 0."""
    rows, p, s = coefs.phi.shape[0], coefs.spec.p, coefs.spec.s
    k, m = coefs.n_endo, coefs.n_exog

    def maximal(block: np.ndarray, n_series: int, n_lags: int) -> np.ndarray:
        active = np.abs(block).reshape(rows, n_lags, n_series) > zero_threshold
        lags = np.arange(1, n_lags + 1)[None, :, None]
        return (active * lags).max(axis=1)

    l_phi = maximal(coefs.phi, k, p)
    l_b = maximal(coefs.b, m, s) if m else np.zeros((rows, 0), dtype=np.intp)
    return LagMatrices(l_phi=l_phi, l_b=l_b, zero_threshold=zero_threshold)


def one_step_forecast(
    coefs: CoefficientSet, history_endo, history_exog=None
) -> np.ndarray:
    """Forecast the next endogenous vector from raw (un-centered) history.

    The stored means center the trailing lag windows and are added back to
    the result, so zero coefficients forecast the means themselves.
    """
    p, s = coefs.spec.p, coefs.spec.s
    k, m = coefs.n_endo, coefs.n_exog
    if coefs.phi.shape[0] != k or k != coefs.endo_means.shape[0]:
        raise ValueError("forecasting needs a full square system (one equation per series)")
    endo = np.atleast_2d(np.asarray(history_endo, dtype=np.float64))
    if endo.shape[0] != k:
        raise ValueError(f"history has {endo.shape[0]} endogenous series, expected {k}")
    if endo.shape[1] < p:
        raise ValueError(f"insufficient history: {endo.shape[1]} observations for p={p}")
    window = endo[:, endo.shape[1] - p :] - coefs.endo_means[:, None]
    z = np.concatenate([window[:, -lag] for lag in range(1, p + 1)])
    forecast = coefs.phi @ z
    if s:
        if history_exog is None:
            raise ValueError("model has exogenous terms but no exogenous history given")
        exog = np.atleast_2d(np.asarray(history_exog, dtype=np.float64))
        if exog.shape[0] != m:
            raise ValueError(f"history has {exog.shape[0]} exogenous series, expected {m}")
        if exog.shape[1] < s:
            raise ValueError(f"insufficient history: {exog.shape[1]} observations for s={s}")
        xwindow = exog[:, exog.shape[1] - s :] - coefs.exog_means[:, None]
        x = np.concatenate([xwindow[:, -lag] for lag in range(1, s + 1)])
        forecast = forecast + coefs.b @ x
    return forecast + coefs.endo_means


def expanding_window_eval(
    dataset: VarxDataset,
    spec: VarxSpec,
    config: SolverConfig,
    horizon: int | None = None,
) -> ForecastReport:
    """One-step-ahead evaluation over the final test block.

    For each test time t the model is re-centered and re-fitted on
    observations 1..t-1 at the fixed penalty levels in config (warm-started
    from the previous step), then forecasts t. A step whose fit raises is
    recorded in fit_ok and falls back to forecasting the training means.
    """
    n_time = dataset.n_time
    h = test_horizon(n_time) if horizon is None else int(horizon)
    if h < 2:
        raise ValueError(f"test block needs at least 2 points, got {h}")
    first_train = n_time - h
    if first_train < spec.obar + 2:
        raise ValueError(
            f"first training prefix has {first_train} observations, too short "
            f"for max lag order {spec.obar}"
        )
    k = dataset.n_endo
    raw_endo = dataset.raw_endo()
    raw_exog = dataset.raw_exog() if dataset.n_exog else None
    forecasts = np.empty((k, h))
    fit_ok = np.ones(h, dtype=bool)
    all_converged = True
    warm: CoefficientSet | None = None
    for step, t in enumerate(range(first_train, n_time)):
        try:
            compact = prefix_compact(dataset, spec, t)
            result = fit(compact, config, initial=warm)
            coefs = result.coefficients
            warm = coefs
            all_converged = all_converged and result.converged
        except ValueError:
            fit_ok[step] = False
            coefs = CoefficientSet(
                phi=np.zeros((k, k * spec.p)),
                b=np.zeros((k, dataset.n_exog * spec.s)),
                spec=spec,
                endo_means=raw_endo[:, :t].mean(axis=1),
                exog_means=raw_exog[:, :t].mean(axis=1) if raw_exog is not None else np.zeros(0),
            )
        forecasts[:, step] = one_step_forecast(
            coefs, raw_endo[:, :t], raw_exog[:, :t] if raw_exog is not None else None
        )
    actuals = raw_endo[:, first_train:]
    msfe = float(np.mean((actuals - forecasts) ** 2))
    return ForecastReport(
        forecasts=forecasts,
        actuals=actuals,
        msfe=msfe,
        horizon=h,
        lambda_phi=config.lambda_phi,
        lambda_b=config.lambda_b,
        penalty_kind=config.penalty_kind,
        fit_ok=fit_ok,
        all_converged=all_converged,
    )


def diebold_mariano(errors_a, errors_b) -> tuple:
    """Equal-accuracy test on two (k, H) forecast-error matrices.

    The loss differential at each step is the cross-series mean of squared
    errors of a minus that of b, so a positive statistic means a forecast
    worse. The statistic is the differential mean over its standard error
    (sample variance, no HAC lags: appropriate for one-step errors) with a
    two-sided normal p-value. A zero-variance differential returns (0, 1).
    """
    a = np.atleast_2d(np.asarray(errors_a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(errors_b, dtype=np.float64))
    if a.shape != b.shape:
        raise ValueError(f"error matrices differ in shape: {a.shape} vs {b.shape}")
    h = a.shape[1]
    if h < 2:
        raise ValueError(f"need at least 2 forecast steps, got {h}")
    d = np.mean(a * a - b * b, axis=0)
    variance = float(d.var(ddof=1))
    if variance == 0.0:
        return 0.0, 1.0
    statistic = float(d.mean() / math.sqrt(variance / h))
    pvalue = math.erfc(abs(statistic) / math.sqrt(2.0))
    return statistic, pvalue


def compare_forecasts(a: ForecastReport, b: ForecastReport) -> tuple:
    """Stamp both reports with the Diebold-Mariano comparison of a vs b."""
    statistic, pvalue = diebold_mariano(a.errors(), b.errors())
    return (
        replace(a, dm_statistic=statistic, dm_pvalue=pvalue),
        replace(b, dm_statistic=-statistic if statistic else 0.0, dm_pvalue=pvalue),
    )


def write_lag_matrix_csv(path: str, matrix, row_names: list[str], col_names: list[str]) -> None:
    """Integer lag matrix with equation rows and predictor columns."""
    matrix = np.atleast_2d(np.asarray(matrix))
    if matrix.shape != (len(row_names), len(col_names)):
        raise ValueError(
            f"matrix shape {matrix.shape} does not match "
            f"{len(row_names)} rows x {len(col_names)} columns"
        )
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["equation", *col_names])
        for name, row in zip(row_names, matrix):
            writer.writerow([name, *(int(v) for v in row)])
