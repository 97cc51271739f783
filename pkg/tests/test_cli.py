"""End-to-end command-line tests: artifacts, exit codes, determinism."""

from __future__ import annotations

import json

import numpy as np
import pytest

from hvarx import CoefficientSet, VarxSpec
from hvarx.cli import main, read_coefficients_csv, write_coefficients_csv


def _simulate_into(tmp_path, name="sim", extra=()):
    out = tmp_path / name
    code = main(
        [
            "simulate",
            "--k", "2",
            "--m", "1",
            "--t", "48",
            "--p", "2",
            "--s", "1",
            "--seed", "3",
            "-o", str(out),
            *extra,
        ]
    )
    assert code == 0
    return out


def _report(path):
    body = json.loads((path / "report.json").read_text())
    assert set(body["metadata"]) == {"created_unix", "tool", "version"}
    return body


def test_simulate_writes_all_artifacts(tmp_path):
    out = _simulate_into(tmp_path)
    for name in (
        "endo.csv",
        "exog.csv",
        "coefficients_true.csv",
        "lag_matrix_phi_true.csv",
        "lag_matrix_b_true.csv",
        "report.json",
    ):
        assert (out / name).exists(), name
    body = _report(out)
    assert body["command"] == "simulate"
    assert body["design"]["k"] == 2
    assert len(body["true_lag_matrix_phi"]) == 2


def test_simulate_argument_consistency(tmp_path, capsys):
    code = main(["simulate", "--k", "2", "--t", "40", "--s", "1",
                 "-o", str(tmp_path / "x")])
    assert code == 1
    assert "--m" in capsys.readouterr().err


def test_fit_writes_artifacts_and_round_trips(tmp_path):
    sim = _simulate_into(tmp_path)
    out = tmp_path / "fit"
    code = main(
        [
            "fit",
            "--endo", str(sim / "endo.csv"),
            "--exog", str(sim / "exog.csv"),
            "--p", "2",
            "--s", "1",
            "-o", str(out),
        ]
    )
    assert code == 0
    for name in (
        "coefficients.csv",
        "lag_matrix_phi.csv",
        "lag_matrix_b.csv",
        "heatmap_phi.csv",
        "heatmap_b.csv",
        "report.json",
    ):
        assert (out / name).exists(), name
    body = _report(out)
    assert body["command"] == "fit"
    assert body["orders"] == {"p": 2, "s": 1}
    assert body["converged"] is True

    coefs, endo_names, exog_names = read_coefficients_csv(str(out / "coefficients.csv"))
    assert endo_names == ["y1", "y2"]
    assert exog_names == ["x1"]
    assert coefs.phi.shape == (2, 4)
    assert coefs.b.shape == (2, 1)


def test_coefficients_csv_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    # adversarial values: tiny, huge, negative, and exact zeros
    phi = rng.normal(size=(2, 6)) * np.array([1e-13, 1.0, 1e14, -1.0, 0.3, 2.0])
    phi[0, 3] = 0.0
    b = rng.normal(size=(2, 2)) * 1e-7
    coefs = CoefficientSet(
        phi=phi,
        b=b,
        spec=VarxSpec(p=3, s=2),
        endo_means=rng.normal(size=2) * 100,
        exog_means=rng.normal(size=1),
    )
    path = tmp_path / "coefficients.csv"
    write_coefficients_csv(str(path), coefs, ["alpha", "beta"], ["driver"])
    back, endo_names, exog_names = read_coefficients_csv(str(path))
    assert endo_names == ["alpha", "beta"]
    assert exog_names == ["driver"]
    np.testing.assert_array_equal(back.phi, coefs.phi)
    np.testing.assert_array_equal(back.b, coefs.b)
    np.testing.assert_array_equal(back.endo_means, coefs.endo_means)
    np.testing.assert_array_equal(back.exog_means, coefs.exog_means)
    assert back.spec.p == 3 and back.spec.s == 2


def test_fit_exit_code_signals_nonconvergence(tmp_path):
    sim = _simulate_into(tmp_path)
    code = main(
        [
            "fit",
            "--endo", str(sim / "endo.csv"),
            "--exog", str(sim / "exog.csv"),
            "--p", "2",
            "--s", "1",
            "--max-iter", "1",
            "--lambda-phi", "0.0001",
            "--lambda-b", "0.0001",
            "-o", str(tmp_path / "nc"),
        ]
    )
    assert code == 2
    body = _report(tmp_path / "nc")
    assert body["converged"] is False


def test_missing_input_file_exits_1(tmp_path, capsys):
    code = main(["fit", "--endo", str(tmp_path / "nope.csv"), "-o", str(tmp_path / "o")])
    assert code == 1
    assert "nope.csv" in capsys.readouterr().err


def test_malformed_csv_exits_1_naming_the_cell(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("y1,y2\n1.0,2.0\n1.0,oops\n")
    code = main(["fit", "--endo", str(bad), "-o", str(tmp_path / "o")])
    assert code == 1
    err = capsys.readouterr().err
    assert "row 3" in err and "y2" in err


def test_s_without_exog_exits_1(tmp_path, capsys):
    sim = _simulate_into(tmp_path)
    code = main(
        ["fit", "--endo", str(sim / "endo.csv"), "--s", "1", "-o", str(tmp_path / "o")]
    )
    assert code == 1
    assert "exog" in capsys.readouterr().err


def test_auto_orders_use_the_time_length(tmp_path):
    sim_out = tmp_path / "sim76"
    assert main(["simulate", "--k", "2", "--t", "76", "--p", "2",
                 "--seed", "5", "-o", str(sim_out)]) == 0
    out = tmp_path / "fit76"
    code = main(
        [
            "fit",
            "--endo", str(sim_out / "endo.csv"),
            "--lambda-phi", "50.0",
            "-o", str(out),
        ]
    )
    assert code == 0
    body = _report(out)
    # floor(1.5 * sqrt(76)) = 13
    assert body["orders"] == {"p": 13, "s": 0}


def test_cv_selects_within_the_grid(tmp_path):
    sim = _simulate_into(tmp_path)
    out = tmp_path / "cv"
    code = main(
        [
            "cv",
            "--endo", str(sim / "endo.csv"),
            "--exog", str(sim / "exog.csv"),
            "--p", "2",
            "--s", "1",
            "--n-points", "4",
            "-o", str(out),
        ]
    )
    assert code == 0
    body = _report(out)
    cv = body["cv"]
    assert cv["best_lambda_phi"] in cv["phi_values"]
    assert cv["best_lambda_b"] in cv["b_values"]
    surface = np.asarray(cv["msfe_surface"], dtype=np.float64)
    assert surface.shape == (4, 4)
    assert (out / "coefficients.csv").exists()


def test_evaluate_produces_comparison_and_both_artifact_sets(tmp_path):
    sim = _simulate_into(tmp_path)
    out = tmp_path / "eval"
    code = main(
        [
            "evaluate",
            "--endo", str(sim / "endo.csv"),
            "--exog", str(sim / "exog.csv"),
            "--p", "2",
            "--s", "1",
            "--n-points", "3",
            "-o", str(out),
        ]
    )
    assert code in (0, 2)
    for name in (
        "coefficients.csv",
        "coefficients_l1.csv",
        "lag_matrix_phi.csv",
        "lag_matrix_phi_l1.csv",
        "heatmap_phi.csv",
        "heatmap_phi_l1.csv",
        "report.json",
    ):
        assert (out / name).exists(), name
    body = _report(out)
    for section in ("hvarx", "l1"):
        assert body[section]["msfe"] > 0
        assert body[section]["horizon"] == 8  # ceil(0.15 * 48)
        assert body[section]["lambda_source"] == "cv"
        assert "bic" in body[section]
    assert body["dm"]["statistic"] == body["hvarx"]["dm_statistic"]
    assert body["l1"]["dm_statistic"] == pytest.approx(-body["dm"]["statistic"])


def test_evaluate_reports_are_identical_modulo_metadata(tmp_path):
    sim = _simulate_into(tmp_path)
    bodies = []
    for name in ("eval_a", "eval_b"):
        out = tmp_path / name
        code = main(
            [
                "evaluate",
                "--endo", str(sim / "endo.csv"),
                "--exog", str(sim / "exog.csv"),
                "--p", "2",
                "--s", "1",
                "--n-points", "3",
                "-o", str(out),
            ]
        )
        assert code in (0, 2)
        body = json.loads((out / "report.json").read_text())
        body.pop("metadata")
        bodies.append(json.dumps(body, sort_keys=True))
    assert bodies[0] == bodies[1]


def test_config_file_supplies_defaults_but_flags_win(tmp_path):
    sim = _simulate_into(tmp_path)
    config = tmp_path / "run.cfg"
    config.write_text(
        "# solver settings\n"
        "lambda-phi = 123.0\n"
        "lambda-b = 9.0\n"
    )
    common = [
        "fit",
        "--config", str(config),
        "--endo", str(sim / "endo.csv"),
        "--exog", str(sim / "exog.csv"),
        "--p", "2",
        "--s", "1",
    ]

    plain = tmp_path / "cfg_only"
    assert main([*common, "-o", str(plain)]) == 0
    body = _report(plain)
    assert body["lambda_phi"] == 123.0
    assert body["lambda_b"] == 9.0

    overridden = tmp_path / "cfg_flagged"
    assert main([*common, "--lambda-phi", "77.0", "-o", str(overridden)]) == 0
    body = _report(overridden)
    assert body["lambda_phi"] == 77.0  # flag beats the config value
    assert body["lambda_b"] == 9.0  # untouched key still comes from the config


def test_config_file_can_hold_required_flags(tmp_path):
    # a run must be describable by the file alone, input paths included
    sim = _simulate_into(tmp_path)
    config = tmp_path / "run.cfg"
    config.write_text(
        f"endo = {sim / 'endo.csv'}\n"
        f"exog = {sim / 'exog.csv'}\n"
        "p = 2\n"
        "s = 1\n"
        "lambda-phi = 0.5\n"
    )
    out = tmp_path / "from_config"
    assert main(["fit", "--config", str(config), "-o", str(out)]) == 0
    body = _report(out)
    assert body["lambda_phi"] == 0.5
    assert body["orders"] == {"p": 2, "s": 1}


def test_config_file_unknown_key_exits_1(tmp_path, capsys):
    sim = _simulate_into(tmp_path)
    config = tmp_path / "bad.cfg"
    config.write_text("lambda-quux = 1\n")
    code = main(
        [
            "fit",
            "--config", str(config),
            "--endo", str(sim / "endo.csv"),
            "--exog", str(sim / "exog.csv"),
            "-o", str(tmp_path / "o"),
        ]
    )
    assert code == 1
    assert "lambda_quux" in capsys.readouterr().err


def test_unknown_flag_exits_1(tmp_path, capsys):
    code = main(["fit", "--endo", "x.csv", "--frobnicate", "-o", str(tmp_path / "o")])
    assert code == 1
    assert capsys.readouterr().err


def test_simulate_is_deterministic(tmp_path):
    a = _simulate_into(tmp_path, "a")
    b = _simulate_into(tmp_path, "b")
    assert (a / "endo.csv").read_text() == (b / "endo.csv").read_text()
    assert (a / "coefficients_true.csv").read_text() == (
        b / "coefficients_true.csv"
    ).read_text()
