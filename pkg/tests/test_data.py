"""Dataset construction, compact form, CSV I/O, and companion matrix tests."""

from __future__ import annotations

import numpy as np
import pytest

from hvarx import (
    CoefficientSet,
    VarxDataset,
    VarxSpec,
    auto_order,
    build_compact,
    companion_matrix,
    companion_spectral_radius,
    load_and_center,
    prefix_compact,
    read_series_csv,
    write_series_csv,
)

from oracles import companion_radius_naive


def _raw_dataset(endo, exog=None):
    """Dataset with zero recorded means so the arrays are used as-is."""
    endo = np.atleast_2d(np.asarray(endo, dtype=np.float64))
    if exog is None:
        exog = np.zeros((0, endo.shape[1]))
    exog = np.atleast_2d(np.asarray(exog, dtype=np.float64))
    return VarxDataset(
        endo=endo,
        exog=exog,
        endo_names=[f"y{i + 1}" for i in range(endo.shape[0])],
        exog_names=[f"x{i + 1}" for i in range(exog.shape[0])],
        endo_means=np.zeros(endo.shape[0]),
        exog_means=np.zeros(exog.shape[0]),
    )


def test_build_compact_literal_example():
    # one series 1,2,3,4 with p=2: usable targets are t=3,4; the lag-1 row of
    # Z holds the previous value and the lag-2 row the one before that
    data = build_compact(_raw_dataset([[1.0, 2.0, 3.0, 4.0]]), VarxSpec(p=2))
    np.testing.assert_array_equal(data.Y, [[3.0, 4.0]])
    np.testing.assert_array_equal(data.Z, [[2.0, 3.0], [1.0, 2.0]])
    assert data.X.shape == (0, 2)
    assert data.n_effective == 2


def test_build_compact_with_exogenous_and_unequal_orders():
    rng = np.random.default_rng(0)
    endo = rng.normal(size=(2, 9))
    exog = rng.normal(size=(1, 9))
    spec = VarxSpec(p=2, s=3)
    data = build_compact(_raw_dataset(endo, exog), spec)
    assert spec.obar == 3
    assert data.Y.shape == (2, 6)
    assert data.Z.shape == (4, 6)
    assert data.X.shape == (3, 6)
    # column for target time t stacks y_{t-1}, y_{t-2} and x_{t-1..t-3}
    t = 5
    col = t - spec.obar
    np.testing.assert_array_equal(data.Y[:, col], endo[:, t])
    np.testing.assert_array_equal(data.Z[:2, col], endo[:, t - 1])
    np.testing.assert_array_equal(data.Z[2:, col], endo[:, t - 2])
    np.testing.assert_array_equal(data.X[:, col], exog[0, [t - 1, t - 2, t - 3]])


def test_build_compact_validation():
    ds = _raw_dataset(np.arange(8.0).reshape(1, 8))
    with pytest.raises(ValueError):
        build_compact(ds, VarxSpec(p=7))
    with pytest.raises(ValueError):
        build_compact(ds, VarxSpec(p=1, s=1))
    ds2 = _raw_dataset(np.arange(8.0).reshape(1, 8), np.ones((1, 8)))
    with pytest.raises(ValueError):
        build_compact(ds2, VarxSpec(p=1, s=0))


def test_varx_spec_validation():
    assert VarxSpec(p=3, s=1).obar == 3
    assert VarxSpec(p=1, s=4).obar == 4
    with pytest.raises(ValueError):
        VarxSpec(p=0)
    with pytest.raises(ValueError):
        VarxSpec(p=1, s=-1)


def test_auto_order_floor_rule():
    assert auto_order(76) == 13
    assert auto_order(100) == 15
    assert auto_order(4) == 3


def test_load_and_center_literal_example():
    ds = load_and_center(np.array([[1.0, 2.0, 3.0]]))
    np.testing.assert_array_equal(ds.endo, [[-1.0, 0.0, 1.0]])
    np.testing.assert_array_equal(ds.endo_means, [2.0])


def test_load_and_center_subtracts_means_and_is_idempotent():
    rng = np.random.default_rng(1)
    endo = rng.normal(size=(3, 40)) + np.array([[5.0], [-2.0], [0.5]])
    exog = rng.normal(size=(2, 40)) + 3.0
    ds = load_and_center(endo, exog)
    np.testing.assert_allclose(ds.endo.mean(axis=1), 0.0, atol=1e-10)
    np.testing.assert_allclose(ds.exog.mean(axis=1), 0.0, atol=1e-10)
    np.testing.assert_allclose(ds.endo_means, endo.mean(axis=1))
    np.testing.assert_allclose(ds.raw_endo(), endo, rtol=1e-14, atol=1e-14)
    # centering already-centered data changes nothing beyond rounding
    again = load_and_center(ds.endo, ds.exog)
    np.testing.assert_allclose(again.endo, ds.endo, rtol=0, atol=1e-12)
    np.testing.assert_allclose(again.endo_means, 0.0, atol=1e-12)


def test_dataset_arrays_are_read_only():
    ds = load_and_center(np.arange(10.0).reshape(2, 5))
    with pytest.raises(ValueError):
        ds.endo[0, 0] = 1.0


def test_dataset_rejects_bad_shapes_and_values():
    with pytest.raises(ValueError):
        load_and_center(np.ones((1, 1)))
    with pytest.raises(ValueError):
        load_and_center(np.ones((2, 5)), np.ones((1, 4)))
    bad = np.ones((2, 5))
    bad[1, 3] = np.nan
    with pytest.raises(ValueError, match="y2"):
        load_and_center(bad)
    with pytest.raises(ValueError, match="duplicate"):
        load_and_center(np.ones((2, 5)), endo_names=["a", "a"])


def test_prefix_compact_recenters_on_prefix_only():
    rng = np.random.default_rng(2)
    ds = load_and_center(rng.normal(size=(2, 30)), rng.normal(size=(1, 30)))
    spec = VarxSpec(p=2, s=1)
    sub = prefix_compact(ds, spec, 20)
    direct = build_compact(
        load_and_center(ds.raw_endo()[:, :20], ds.raw_exog()[:, :20]), spec
    )
    np.testing.assert_array_equal(sub.Y, direct.Y)
    np.testing.assert_array_equal(sub.Z, direct.Z)
    np.testing.assert_array_equal(sub.X, direct.X)
    np.testing.assert_array_equal(sub.endo_means, direct.endo_means)

    # changing anything at or after the cut must not affect the prefix form
    # (up to the rounding from reconstructing the raw scale)
    raw = ds.raw_endo().copy()
    raw[:, 20:] += 100.0
    other = prefix_compact(
        load_and_center(raw, ds.raw_exog()), spec, 20
    )
    np.testing.assert_allclose(other.Y, sub.Y, rtol=0, atol=1e-12)
    np.testing.assert_allclose(other.endo_means, sub.endo_means, rtol=0, atol=1e-12)


def test_coefficient_set_lag_blocks():
    spec = VarxSpec(p=2, s=1)
    phi = np.array([[1.0, 2.0, 3.0, 4.0], [5.0, 6.0, 7.0, 8.0]])
    b = np.array([[9.0], [10.0]])
    coefs = CoefficientSet(
        phi=phi, b=b, spec=spec, endo_means=np.zeros(2), exog_means=np.zeros(1)
    )
    assert coefs.n_endo == 2
    assert coefs.n_exog == 1
    np.testing.assert_array_equal(coefs.phi_at_lag(1), [[1.0, 2.0], [5.0, 6.0]])
    np.testing.assert_array_equal(coefs.phi_at_lag(2), [[3.0, 4.0], [7.0, 8.0]])
    np.testing.assert_array_equal(coefs.b_at_lag(1), b)


def test_coefficient_set_validation():
    spec = VarxSpec(p=2)
    with pytest.raises(ValueError):
        CoefficientSet(
            phi=np.ones((2, 3)),
            b=np.zeros((2, 0)),
            spec=spec,
            endo_means=np.zeros(2),
            exog_means=np.zeros(0),
        )
    with pytest.raises(ValueError):
        CoefficientSet(
            phi=np.ones((2, 4)),
            b=np.ones((2, 1)),
            spec=spec,
            endo_means=np.zeros(2),
            exog_means=np.zeros(1),
        )


def test_series_csv_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    values = rng.normal(size=(3, 17)) * np.array([[1e-7], [1.0], [1e6]])
    path = str(tmp_path / "series.csv")
    write_series_csv(path, ["alpha", "beta", "gamma"], values)
    names, back, dates = read_series_csv(path)
    assert names == ["alpha", "beta", "gamma"]
    assert dates is None
    np.testing.assert_array_equal(back, values)


def test_series_csv_date_column(tmp_path):
    path = tmp_path / "dated.csv"
    path.write_text("date,y1,y2\n2020-01,1.5,2\n2020-02,2.5,3\n2020-03,-1,0\n")
    names, values, dates = read_series_csv(str(path))
    assert names == ["y1", "y2"]
    assert dates == ["2020-01", "2020-02", "2020-03"]
    np.testing.assert_array_equal(values, [[1.5, 2.5, -1.0], [2.0, 3.0, 0.0]])


def test_series_csv_errors_name_the_cell(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("y1,y2\n1.0,2.0\n1.0,oops\n")
    with pytest.raises(ValueError, match=r"row 3.*'y2'"):
        read_series_csv(str(path))
    path.write_text("y1,y2\n1.0,2.0\n1.0\n")
    with pytest.raises(ValueError, match="row 3"):
        read_series_csv(str(path))
    path.write_text("y1,y2\n1.0,2.0\n")
    with pytest.raises(ValueError, match="at least 2"):
        read_series_csv(str(path))
    path.write_text("")
    with pytest.raises(ValueError, match="empty"):
        read_series_csv(str(path))
    path.write_text("y1,y2\n1.0,2.0\n3.0,inf\n")
    with pytest.raises(ValueError, match="non-finite"):
        read_series_csv(str(path))


def test_companion_matrix_layout():
    phi = np.array([[0.5, 0.1, 0.2, 0.0], [0.0, 0.4, 0.1, 0.3]])
    comp = companion_matrix(phi)
    assert comp.shape == (4, 4)
    np.testing.assert_array_equal(comp[:2, :], phi)
    np.testing.assert_array_equal(comp[2:, :2], np.eye(2))
    np.testing.assert_array_equal(comp[2:, 2:], np.zeros((2, 2)))


def test_companion_spectral_radius_scalar_case():
    assert companion_spectral_radius(np.array([[0.7]])) == pytest.approx(0.7)
    assert companion_spectral_radius(np.array([[-0.9]])) == pytest.approx(0.9)


def test_companion_spectral_radius_matches_naive():
    rng = np.random.default_rng(4)
    for _ in range(20):
        k = int(rng.integers(1, 4))
        p = int(rng.integers(1, 4))
        blocks = [rng.normal(size=(k, k)) * 0.3 for _ in range(p)]
        expected = companion_radius_naive(blocks)
        got = companion_spectral_radius(np.hstack(blocks))
        assert got == pytest.approx(expected, rel=1e-10)
