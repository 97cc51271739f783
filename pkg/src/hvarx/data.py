"""Domain types, CSV ingestion, mean-centering, and design-matrix assembly.

Series matrices are stored with one row per series and one column per time
point, columns ascending in time. A VARX system relates a k-dimensional
endogenous block to its own past p values and the past s values of an
m-dimensional exogenous block; stacking the lagged columns yields the
compact regression form ``Y ~ Phi @ Z + B @ X``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def _check_finite(values: np.ndarray, block: str, names: list[str] | None = None) -> None:
    bad = ~np.isfinite(values)
    if bad.any():
        i, t = np.argwhere(bad)[0]
        label = names[i] if names else f"row {i}"
        raise ValueError(f"non-finite value in {block} series {label!r} at time index {t}")


def _check_names(names: list[str], block: str, count: int) -> list[str]:
    if len(names) != count:
        raise ValueError(f"{block}: {len(names)} names for {count} series")
    seen: set[str] = set()
    for name in names:
        if name in seen:
            raise ValueError(f"duplicate series name {name!r} in {block} block")
        seen.add(name)
    return list(names)


@dataclass(frozen=True)
class VarxDataset:
    """Aligned endogenous and exogenous series with centering metadata.

    ``endo`` is (k, T) and ``exog`` is (m, T) with m >= 0; the recorded means
    are whatever was subtracted when the dataset was built (zero for raw
    data), so ``endo + endo_means[:, None]`` recovers the original scale.
    Instances are immutable value objects; the arrays are marked read-only.
    """

    endo: np.ndarray
    exog: np.ndarray
    endo_names: list[str]
    exog_names: list[str]
    endo_means: np.ndarray
    exog_means: np.ndarray

    def __post_init__(self) -> None:
        endo = np.atleast_2d(np.asarray(self.endo, dtype=np.float64))
        exog = np.asarray(self.exog, dtype=np.float64).reshape(-1, endo.shape[1])
        if endo.shape[1] < 2:
            raise ValueError(f"need at least 2 time points, got {endo.shape[1]}")
        if exog.size and exog.shape[1] != endo.shape[1]:
            raise ValueError(
                f"dimension mismatch: endo has {endo.shape[1]} time points, "
                f"exog has {exog.shape[1]}"
            )
        object.__setattr__(self, "endo_names", _check_names(self.endo_names, "endogenous", endo.shape[0]))
        object.__setattr__(self, "exog_names", _check_names(self.exog_names, "exogenous", exog.shape[0]))
        _check_finite(endo, "endogenous", self.endo_names)
        _check_finite(exog, "exogenous", self.exog_names)
        object.__setattr__(self, "endo", _freeze(endo))
        object.__setattr__(self, "exog", _freeze(exog))
        object.__setattr__(self, "endo_means", _freeze(np.asarray(self.endo_means).reshape(endo.shape[0])))
        object.__setattr__(self, "exog_means", _freeze(np.asarray(self.exog_means).reshape(exog.shape[0])))

    @property
    def n_endo(self) -> int:
        return self.endo.shape[0]

    @property
    def n_exog(self) -> int:
        return self.exog.shape[0]

    @property
    def n_time(self) -> int:
        return self.endo.shape[1]

    def raw_endo(self) -> np.ndarray:
        """Endogenous series on the original (un-centered) scale."""
        return self.endo + self.endo_means[:, None]

    def raw_exog(self) -> np.ndarray:
        """Exogenous series on the original (un-centered) scale."""
        if self.n_exog == 0:
            return self.exog.copy()
        return self.exog + self.exog_means[:, None]


@dataclass(frozen=True)
class VarxSpec:
    """Model orders: endogenous lag order p >= 1 and exogenous lag order s >= 0."""

    p: int
    s: int = 0

    def __post_init__(self) -> None:
        if self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if self.s < 0:
            raise ValueError(f"s must be >= 0, got {self.s}")

    @property
    def obar(self) -> int:
        """Largest lag order, max(p, s); the first obar columns are burned."""
        return max(self.p, self.s)


def auto_order(n_time: int) -> int:
    """Default lag order floor(1.5 * sqrt(T)) used when orders are not given."""
    return int(math.floor(1.5 * math.sqrt(n_time)))


@dataclass(frozen=True)
class CompactForm:
    """Stacked regression matrices: Y (k, N), Z (k*p, N), X (m*s, N).

    Column t of Z stacks the endogenous vectors at lags 1..p (most recent
    first); column t of X stacks the exogenous vectors at lags 1..s. The
    effective sample count is N = T - max(p, s). Means are carried through
    from the dataset so fitted coefficients can un-center forecasts.
    """

    Y: np.ndarray
    Z: np.ndarray
    X: np.ndarray
    spec: VarxSpec
    endo_means: np.ndarray
    exog_means: np.ndarray

    def __post_init__(self) -> None:
        for name in ("Y", "Z", "X", "endo_means", "exog_means"):
            object.__setattr__(self, name, _freeze(np.asarray(getattr(self, name))))

    @property
    def n_effective(self) -> int:
        return self.Y.shape[1]

    @property
    def n_endo(self) -> int:
        return self.Z.shape[0] // self.spec.p

    @property
    def n_exog(self) -> int:
        return self.X.shape[0] // self.spec.s if self.spec.s else 0


@dataclass(frozen=True)
class CoefficientSet:
    """Estimated coefficient blocks plus the means needed for forecasting.

    ``phi`` is (rows, k*p) laid out as the horizontal concatenation of the
    lag-1..p endogenous matrices; ``b`` is (rows, m*s) laid out analogously.
    ``rows`` equals k for a full system fit.
    """

    phi: np.ndarray
    b: np.ndarray
    spec: VarxSpec
    endo_means: np.ndarray
    exog_means: np.ndarray

    def __post_init__(self) -> None:
        phi = np.atleast_2d(np.asarray(self.phi, dtype=np.float64))
        b = np.asarray(self.b, dtype=np.float64).reshape(phi.shape[0], -1)
        if phi.shape[1] % self.spec.p:
            raise ValueError(
                f"phi has {phi.shape[1]} columns, not a multiple of p={self.spec.p}"
            )
        if self.spec.s == 0 and b.shape[1]:
            raise ValueError("b must be empty when s = 0")
        if self.spec.s and b.shape[1] % self.spec.s:
            raise ValueError(
                f"b has {b.shape[1]} columns, not a multiple of s={self.spec.s}"
            )
        if not np.isfinite(phi).all() or not np.isfinite(b).all():
            raise ValueError("coefficients contain non-finite values")
        object.__setattr__(self, "phi", _freeze(phi))
        object.__setattr__(self, "b", _freeze(b))
        object.__setattr__(self, "endo_means", _freeze(np.asarray(self.endo_means).ravel()))
        object.__setattr__(self, "exog_means", _freeze(np.asarray(self.exog_means).ravel()))

    @property
    def n_endo(self) -> int:
        """Number of endogenous series entering the lag structure."""
        return self.phi.shape[1] // self.spec.p

    @property
    def n_exog(self) -> int:
        return self.b.shape[1] // self.spec.s if self.spec.s else 0

    def phi_at_lag(self, lag: int) -> np.ndarray:
        """The (rows, k) endogenous coefficient block for one lag in 1..p."""
        k = self.n_endo
        return self.phi[:, (lag - 1) * k : lag * k]

    def b_at_lag(self, lag: int) -> np.ndarray:
        """The (rows, m) exogenous coefficient block for one lag in 1..s."""
        m = self.n_exog
        return self.b[:, (lag - 1) * m : lag * m]


def load_and_center(
    endo,
    exog=None,
    *,
    endo_names: list[str] | None = None,
    exog_names: list[str] | None = None,
) -> VarxDataset:
    """Validate raw series tables, subtract per-series means, record them.

    ``endo`` and ``exog`` are (series, time) tables; ``exog`` may be None or
    empty. Centering is idempotent on the recorded-raw scale: re-centering
    the raw series always reproduces the same dataset.
    """
    endo = np.atleast_2d(np.asarray(endo, dtype=np.float64))
    if exog is None:
        exog = np.zeros((0, endo.shape[1]))
    exog = np.asarray(exog, dtype=np.float64)
    if exog.size == 0:
        exog = exog.reshape(0, endo.shape[1])
    exog = np.atleast_2d(exog)
    if endo.shape[1] < 2:
        raise ValueError(f"need at least 2 time points, got {endo.shape[1]}")
    if exog.shape[0] and exog.shape[1] != endo.shape[1]:
        raise ValueError(
            f"dimension mismatch: endo has {endo.shape[1]} time points, "
            f"exog has {exog.shape[1]}"
        )
    if endo_names is None:
        endo_names = [f"y{i + 1}" for i in range(endo.shape[0])]
    if exog_names is None:
        exog_names = [f"x{i + 1}" for i in range(exog.shape[0])]
    _check_finite(endo, "endogenous", endo_names)
    _check_finite(exog, "exogenous", exog_names)
    endo_means = endo.mean(axis=1)
    exog_means = exog.mean(axis=1) if exog.shape[0] else np.zeros(0)
    return VarxDataset(
        endo=endo - endo_means[:, None],
        exog=exog - exog_means[:, None] if exog.shape[0] else exog,
        endo_names=endo_names,
        exog_names=exog_names,
        endo_means=endo_means,
        exog_means=exog_means,
    )


def build_compact(dataset: VarxDataset, spec: VarxSpec) -> CompactForm:
    """Assemble the compact matrices Y, Z, X for the given lag orders."""
    if (spec.s == 0) != (dataset.n_exog == 0):
        raise ValueError(
            f"s={spec.s} inconsistent with {dataset.n_exog} exogenous series "
            "(s must be 0 exactly when there are none)"
        )
    T = dataset.n_time
    if spec.obar >= T - 1:
        raise ValueError(
            f"max lag order {spec.obar} leaves fewer than 2 effective samples "
            f"for T={T}"
        )
    obar = spec.obar
    Y = dataset.endo[:, obar:]
    Z = np.vstack([dataset.endo[:, obar - l : T - l] for l in range(1, spec.p + 1)])
    if spec.s:
        X = np.vstack([dataset.exog[:, obar - j : T - j] for j in range(1, spec.s + 1)])
    else:
        X = np.zeros((0, T - obar))
    return CompactForm(
        Y=Y,
        Z=Z,
        X=X,
        spec=spec,
        endo_means=dataset.endo_means,
        exog_means=dataset.exog_means,
    )


def prefix_compact(dataset: VarxDataset, spec: VarxSpec, n_obs: int) -> CompactForm:
    """Compact form of the first n_obs observations, re-centered on them so
    later observations leak nothing into the fit."""
    raw_exog = dataset.raw_exog()[:, :n_obs] if dataset.n_exog else None
    prefix = load_and_center(
        dataset.raw_endo()[:, :n_obs],
        raw_exog,
        endo_names=dataset.endo_names,
        exog_names=dataset.exog_names,
    )
    return build_compact(prefix, spec)


def companion_matrix(phi: np.ndarray) -> np.ndarray:
    """Companion form of an endogenous block [Phi_1 ... Phi_p], shape (kp, kp)."""
    phi = np.atleast_2d(np.asarray(phi, dtype=np.float64))
    k = phi.shape[0]
    if k == 0 or phi.shape[1] % k:
        raise ValueError(f"phi shape {phi.shape} is not (k, k*p)")
    p = phi.shape[1] // k
    if p < 1:
        raise ValueError("phi must contain at least one lag block")
    if p == 1:
        return phi.copy()
    comp = np.zeros((k * p, k * p))
    comp[:k, :] = phi
    comp[k:, : k * (p - 1)] = np.eye(k * (p - 1))
    return comp


def companion_spectral_radius(phi: np.ndarray) -> float:
    """Spectral radius of the companion matrix; < 1 means a stable recursion."""
    return float(np.abs(np.linalg.eigvals(companion_matrix(phi))).max())


def read_series_csv(path: str) -> tuple[list[str], np.ndarray, list[str] | None]:
    """Read a series table: header of names, one row per time point ascending.

    Uses '.' as the decimal separator and ',' as the delimiter. An optional
    first column named "date" is returned as labels and excluded from the
    numeric block. Returns (names, values with shape (series, T), dates).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        has_date = bool(header) and header[0].lower() == "date"
        names = header[1:] if has_date else header
        if not names:
            raise ValueError(f"{path}: header contains no series names")
        dates: list[str] = []
        rows: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(
                    f"{path}: row {lineno} has {len(row)} fields, expected {len(header)}"
                )
            if has_date:
                dates.append(row[0])
                row = row[1:]
            parsed = []
            for name, cell in zip(names, row):
                cell = cell.strip()
                if not cell:
                    raise ValueError(f"{path}: empty cell at row {lineno}, column {name!r}")
                try:
                    value = float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}: cannot parse {cell!r} at row {lineno}, column {name!r}"
                    ) from None
                if not math.isfinite(value):
                    raise ValueError(
                        f"{path}: non-finite value at row {lineno}, column {name!r}"
                    )
                parsed.append(value)
            rows.append(parsed)
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least 2 time points, got {len(rows)}")
    _check_names(names, path, len(names))
    values = np.asarray(rows, dtype=np.float64).T
    return names, values, dates if has_date else None


def write_series_csv(path: str, names: list[str], values: np.ndarray) -> None:
    """Write a (series, T) table in the format read_series_csv expects."""
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if values.shape[0] != len(names):
        raise ValueError(f"{len(names)} names for {values.shape[0]} series")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for t in range(values.shape[1]):
            writer.writerow([format(v, ".17g") for v in values[:, t]])
