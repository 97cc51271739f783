"""Synthetic data generator tests: reproducibility, stability, support."""

from __future__ import annotations

import numpy as np
import pytest

from hvarx import (
    SimDesign,
    companion_spectral_radius,
    extract_lag_matrices,
    generate,
    random_lag_matrices,
    replication_design,
    replication_seed,
)


def _design(seed=0, k=3, m=2, p=3, s=2, T=120, radius=0.8, **kwargs):
    rng = np.random.default_rng(seed + 500)
    l_phi, l_b = random_lag_matrices(rng, k, m, p, s if m else 0)
    return SimDesign(
        k=k,
        m=m,
        p=p,
        s=s,
        T=T,
        true_lag_matrix_phi=l_phi,
        true_lag_matrix_b=l_b,
        target_spectral_radius=radius,
        seed=seed,
        **kwargs,
    )


def test_same_seed_reproduces_bit_for_bit():
    design = _design(1)
    ds1, truth1 = generate(design)
    ds2, truth2 = generate(design)
    np.testing.assert_array_equal(ds1.endo, ds2.endo)
    np.testing.assert_array_equal(ds1.exog, ds2.exog)
    np.testing.assert_array_equal(ds1.endo_means, ds2.endo_means)
    np.testing.assert_array_equal(truth1.phi, truth2.phi)
    np.testing.assert_array_equal(truth1.b, truth2.b)


def test_different_seeds_differ():
    ds1, _ = generate(_design(2))
    ds2, _ = generate(replication_design(_design(2), 1))
    assert not np.array_equal(ds1.endo, ds2.endo)
    assert replication_seed(7, 3) == 10


def test_shapes_and_centering():
    design = _design(3, T=90)
    dataset, truth = generate(design)
    assert dataset.endo.shape == (3, 90)
    assert dataset.exog.shape == (2, 90)
    np.testing.assert_allclose(dataset.endo.mean(axis=1), 0.0, atol=1e-10)
    assert truth.phi.shape == (3, 9)
    assert truth.b.shape == (3, 4)
    np.testing.assert_array_equal(truth.endo_means, np.zeros(3))


def test_spectral_radius_hits_target():
    for seed, target in [(4, 0.8), (5, 0.5), (6, 0.95)]:
        _, truth = generate(_design(seed, radius=target))
        assert companion_spectral_radius(truth.phi) == pytest.approx(
            target, abs=1e-8
        )


def test_scalar_autoregression_coefficient_magnitude():
    # k=1, p=1: the companion radius IS |phi|, so rescaling pins it exactly
    design = SimDesign(
        k=1,
        m=0,
        p=1,
        s=0,
        T=50,
        true_lag_matrix_phi=np.array([[1]]),
        true_lag_matrix_b=np.zeros((1, 0), dtype=int),
        target_spectral_radius=0.5,
        seed=7,
    )
    _, truth = generate(design)
    assert abs(truth.phi[0, 0]) == pytest.approx(0.5, abs=1e-8)


def test_truth_respects_its_lag_support():
    design = _design(8)
    _, truth = generate(design)
    lags = extract_lag_matrices(truth)
    # nonzero exactly at lags 1..L per pair: uniform draws are never 0, so
    # the maximal active lag equals the designed one
    np.testing.assert_array_equal(lags.l_phi, design.true_lag_matrix_phi)
    np.testing.assert_array_equal(lags.l_b, design.true_lag_matrix_b)
    # and the support is dense below the maximal lag (suffix-consistent)
    k = design.k
    for i in range(k):
        for j in range(k):
            path = truth.phi[i, j::k]
            depth = int(design.true_lag_matrix_phi[i, j])
            assert np.all(path[:depth] != 0.0)
            assert np.all(path[depth:] == 0.0)


def test_all_zero_lag_matrix_warns_and_yields_noise():
    design = SimDesign(
        k=2,
        m=0,
        p=1,
        s=0,
        T=400,
        true_lag_matrix_phi=np.zeros((2, 2), dtype=int),
        true_lag_matrix_b=np.zeros((2, 0), dtype=int),
        seed=9,
    )
    with pytest.warns(UserWarning, match="all-zero"):
        dataset, truth = generate(design)
    assert not truth.phi.any()
    # white noise: lag-1 autocorrelation within 4 standard errors of zero
    for row in dataset.endo:
        r = float(np.corrcoef(row[:-1], row[1:])[0, 1])
        assert abs(r) < 4.0 / np.sqrt(400)


def test_innovation_sd_scales_output():
    quiet, _ = generate(_design(10, innovation_sd=0.1))
    loud, _ = generate(_design(10, innovation_sd=10.0))
    assert loud.endo.std() > 10 * quiet.endo.std()


def test_random_lag_matrices_bounds_and_diagonal():
    rng = np.random.default_rng(11)
    for _ in range(20):
        l_phi, l_b = random_lag_matrices(rng, 4, 3, 2, 3)
        assert l_phi.shape == (4, 4) and l_b.shape == (4, 3)
        assert l_phi.min() >= 0 and l_phi.max() <= 2
        assert l_b.min() >= 0 and l_b.max() <= 3
        assert np.all(l_phi.diagonal() >= 1)


def test_design_validation():
    good = _design(12)
    with pytest.raises(ValueError, match="zero together"):
        SimDesign(
            k=2,
            m=1,
            p=1,
            s=0,
            T=50,
            true_lag_matrix_phi=np.ones((2, 2), dtype=int),
            true_lag_matrix_b=np.zeros((2, 1), dtype=int),
        )
    with pytest.raises(ValueError, match="radius"):
        SimDesign(
            k=2,
            m=0,
            p=1,
            s=0,
            T=50,
            true_lag_matrix_phi=np.ones((2, 2), dtype=int),
            true_lag_matrix_b=np.zeros((2, 0), dtype=int),
            target_spectral_radius=1.0,
        )
    with pytest.raises(ValueError, match=r"\[0, 1\]"):
        SimDesign(
            k=2,
            m=0,
            p=1,
            s=0,
            T=50,
            true_lag_matrix_phi=np.full((2, 2), 3, dtype=int),
            true_lag_matrix_b=np.zeros((2, 0), dtype=int),
        )
    assert good.spec.p == 3 and good.spec.s == 2


def test_burn_in_changes_the_sample():
    short, _ = generate(_design(13, burn_in=0))
    long, _ = generate(_design(13))
    assert short.endo.shape == long.endo.shape
    assert not np.array_equal(short.endo, long.endo)
