"""Command-line pipeline: simulate data, fit one model, cross-validate
penalties, or run the full forecast comparison, writing flat-file artifacts.

Exit codes: 0 success, 1 validation/input error (the message names the
offending file or field), 2 solver non-convergence (artifacts are still
written, with flags in report.json).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import replace

import numpy as np

from . import __version__
from .data import (
    CoefficientSet,
    VarxDataset,
    VarxSpec,
    auto_order,
    build_compact,
    load_and_center,
    read_series_csv,
)
from .evaluation import (
    compare_forecasts,
    expanding_window_eval,
    extract_lag_matrices,
    write_lag_matrix_csv,
)
from .select import bic, lambda_max, select_lambdas
from .simulate import SimDesign, generate, random_lag_matrices, write_design_csvs
from .solver import SolverConfig, fit

PENALTY_BY_NAME = {"hvarx": "hierarchical", "l1": "l1"}


class CliError(Exception):
    """Invalid input or configuration; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _build_parser():
    parser = _Parser(prog="hvarx", description=__doc__)
    subparsers = parser.add_subparsers(dest="command", required=True)
    by_command = {}

    def sub(name: str, help_text: str):
        p = subparsers.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", help="key = value file; command-line flags win")
        p.add_argument("--output-dir", "-o", default=".", help="artifact directory")
        p.add_argument("-v", "--verbose", action="count", default=0)
        by_command[name] = p
        return p

    def add_data_options(p):
        p.add_argument("--endo", required=True, help="endogenous series CSV")
        p.add_argument("--exog", help="exogenous series CSV")
        p.add_argument("--p", default="auto", help="endogenous lag order or 'auto'")
        p.add_argument("--s", default="auto", help="exogenous lag order or 'auto'")

    def add_solver_options(p):
        p.add_argument("--tol", type=float, default=1e-5)
        p.add_argument("--max-iter", type=int, default=10000)
        p.add_argument("--acceleration", type=_parse_bool, default=True)

    def add_grid_options(p):
        p.add_argument("--n-points", type=int, default=10, help="grid points per axis")
        p.add_argument("--ratio", type=float, default=1e-3, help="smallest grid value / largest")
        p.add_argument(
            "--parallel-cv",
            type=_parse_bool,
            default=False,
            help="fit grid points cold in a thread pool instead of the warm chain",
        )

    p = sub("simulate", "generate a synthetic stable VARX dataset with known lag structure")
    p.add_argument("--k", type=int, required=True, help="endogenous series count")
    p.add_argument("--m", type=int, default=0, help="exogenous series count")
    p.add_argument("--t", type=int, required=True, help="observation count")
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--s", type=int, default=0)
    p.add_argument("--max-lag-phi", type=int, help="cap on true endogenous lags (default p)")
    p.add_argument("--max-lag-b", type=int, help="cap on true exogenous lags (default s)")
    p.add_argument("--coefficient-scale", type=float, default=1.0)
    p.add_argument("--radius", type=float, default=0.8, help="target companion spectral radius")
    p.add_argument("--innovation-sd", type=float, default=1.0)
    p.add_argument("--burn-in", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)

    p = sub("fit", "fit one penalized VARX model at fixed penalty levels")
    add_data_options(p)
    add_solver_options(p)
    p.add_argument("--penalty", choices=sorted(PENALTY_BY_NAME), default="hvarx")
    p.add_argument("--lambda-phi", type=float, help="default: 0.1 of the all-zero threshold")
    p.add_argument("--lambda-b", type=float)

    p = sub("cv", "select penalty levels by time-series cross-validation, then refit")
    add_data_options(p)
    add_solver_options(p)
    add_grid_options(p)
    p.add_argument("--penalty", choices=sorted(PENALTY_BY_NAME), default="hvarx")

    p = sub("evaluate", "expanding-window forecast comparison of both penalties")
    add_data_options(p)
    add_solver_options(p)
    add_grid_options(p)
    p.add_argument("--lambda-phi", type=float, help="skip CV for the hierarchical model")
    p.add_argument("--lambda-b", type=float)
    p.add_argument("--lambda-phi-l1", type=float, help="skip CV for the l1 model")
    p.add_argument("--lambda-b-l1", type=float)
    p.add_argument("--horizon", type=int, help="test-block override (default: 15%% of T)")

    return parser, by_command


def load_config_file(path: str) -> dict:
    pairs = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise CliError(f"cannot read config file {path}: {exc}") from None
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise CliError(f"{path}: line {lineno} is not in 'key = value' form")
        pairs[key.strip().replace("-", "_")] = value.strip()
    return pairs


def _config_value(argv: list[str]) -> str | None:
    """--config's value straight from raw argv. Required flags may live in
    the file, so it must be read before the strict parse; last one wins,
    matching argparse."""
    found = None
    for i, token in enumerate(argv):
        if token == "--config" and i + 1 < len(argv):
            found = argv[i + 1]
        elif token.startswith("--config="):
            found = token.split("=", 1)[1]
    return found


def parse_args(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, by_command = _build_parser()
    config_path = _config_value(argv)
    if config_path is None or not argv or argv[0] not in by_command:
        return parser.parse_args(argv)
    command = argv[0]
    config = load_config_file(config_path)
    valid = {
        option.lstrip("-").replace("-", "_")
        for action in by_command[command]._actions
        for option in action.option_strings
        if option.startswith("--")
    }
    tokens = []
    for key, value in config.items():
        if key == "config" or key not in valid:
            raise CliError(f"{config_path}: unknown config key {key!r}")
        tokens.extend(["--" + key.replace("_", "-"), value])
    # config becomes defaults by preceding the original flags, which win
    return parser.parse_args([command, *tokens, *argv[1:]])


def _float_cell(value: float) -> str:
    return format(float(value), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(key): _jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    return obj


def write_report(path: str, body: dict) -> None:
    """Deterministic JSON: sorted keys, all volatile fields under metadata."""
    document = dict(body)
    document["metadata"] = {
        "created_unix": time.time(),
        "tool": "hvarx",
        "version": __version__,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(document), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_coefficients_csv(
    path: str, coefs: CoefficientSet, endo_names: list[str], exog_names: list[str]
) -> None:
    """Flat long format. Lag-0 rows carry the per-series means (equation
    left blank); every coefficient is written, zeros included, so the file
    alone reconstructs the full set bit-exactly."""
    k, m = len(endo_names), len(exog_names)
    p, s = coefs.spec.p, coefs.spec.s
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["equation", "series", "lag", "block", "value"])
        for i, name in enumerate(endo_names):
            writer.writerow(["", name, 0, "endo", _float_cell(coefs.endo_means[i])])
        for r, name in enumerate(exog_names):
            writer.writerow(["", name, 0, "exo", _float_cell(coefs.exog_means[r])])
        for i in range(coefs.phi.shape[0]):
            equation = endo_names[i]
            for lag in range(1, p + 1):
                for d in range(k):
                    writer.writerow(
                        [equation, endo_names[d], lag, "endo",
                         _float_cell(coefs.phi[i, (lag - 1) * k + d])]
                    )
            for lag in range(1, s + 1):
                for r in range(m):
                    writer.writerow(
                        [equation, exog_names[r], lag, "exo",
                         _float_cell(coefs.b[i, (lag - 1) * m + r])]
                    )


def read_coefficients_csv(path: str):
    """Inverse of write_coefficients_csv: (CoefficientSet, endo, exog names)."""
    endo_names, exog_names = [], []
    means = {}
    entries = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["equation", "series", "lag", "block", "value"]:
            raise CliError(f"{path}: not a coefficients file (unexpected header)")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise CliError(f"{path}: row {lineno} has {len(row)} fields, expected 5")
            equation, series, lag_text, block, value_text = row
            if block not in ("endo", "exo"):
                raise CliError(f"{path}: row {lineno} has unknown block {block!r}")
            try:
                lag = int(lag_text)
                value = float(value_text)
            except ValueError:
                raise CliError(f"{path}: row {lineno} has a malformed lag or value") from None
            if lag == 0:
                names = endo_names if block == "endo" else exog_names
                if series not in names:
                    names.append(series)
                means[(block, series)] = value
            else:
                entries.append((lineno, equation, series, lag, block, value))
    if not endo_names:
        raise CliError(f"{path}: no endogenous mean rows found")
    p = max((e[3] for e in entries if e[4] == "endo"), default=0)
    s = max((e[3] for e in entries if e[4] == "exo"), default=0)
    if p == 0:
        raise CliError(f"{path}: no endogenous coefficient rows found")
    k, m = len(endo_names), len(exog_names)
    endo_index = {name: i for i, name in enumerate(endo_names)}
    exog_index = {name: i for i, name in enumerate(exog_names)}
    phi = np.zeros((k, k * p))
    b = np.zeros((k, m * s))
    for lineno, equation, series, lag, block, value in entries:
        if equation not in endo_index:
            raise CliError(f"{path}: row {lineno} names unknown equation {equation!r}")
        i = endo_index[equation]
        if block == "endo":
            if series not in endo_index:
                raise CliError(f"{path}: row {lineno} names unknown series {series!r}")
            phi[i, (lag - 1) * k + endo_index[series]] = value
        else:
            if series not in exog_index:
                raise CliError(f"{path}: row {lineno} names unknown series {series!r}")
            b[i, (lag - 1) * m + exog_index[series]] = value
    coefs = CoefficientSet(
        phi=phi,
        b=b,
        spec=VarxSpec(p=p, s=s),
        endo_means=np.array([means[("endo", n)] for n in endo_names]),
        exog_means=np.array([means[("exo", n)] for n in exog_names]),
    )
    return coefs, endo_names, exog_names


def write_heatmap_csv(path: str, matrix, row_names: list[str], col_names: list[str]) -> None:
    """Long-format plot data: one (row_label, col_label, value) line per cell."""
    matrix = np.atleast_2d(np.asarray(matrix))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row_label", "col_label", "value"])
        for i, row_name in enumerate(row_names):
            for j, col_name in enumerate(col_names):
                writer.writerow([row_name, col_name, int(matrix[i, j])])


def _resolve_order(text, n_time: int, minimum: int, flag: str) -> int:
    if isinstance(text, int):
        value = text
    elif str(text).strip().lower() == "auto":
        value = auto_order(n_time)
    else:
        try:
            value = int(str(text).strip())
        except ValueError:
            raise CliError(f"{flag} must be an integer or 'auto', got {text!r}") from None
    if value < minimum:
        raise CliError(f"{flag} must be >= {minimum}, got {value}")
    return value


def _load_dataset(args) -> VarxDataset:
    endo_names, endo, _ = read_series_csv(args.endo)
    if args.exog:
        exog_names, exog, _ = read_series_csv(args.exog)
        if exog.shape[1] != endo.shape[1]:
            raise CliError(
                f"{args.exog}: {exog.shape[1]} time points but {args.endo} has {endo.shape[1]}"
            )
    else:
        exog_names, exog = [], None
    return load_and_center(endo, exog, endo_names=endo_names, exog_names=exog_names)


def _resolve_spec(args, dataset: VarxDataset) -> VarxSpec:
    p = _resolve_order(args.p, dataset.n_time, 1, "--p")
    if dataset.n_exog == 0:
        if str(args.s).strip().lower() not in ("auto", "0"):
            raise CliError(f"--s {args.s} requires an exogenous input (missing exog_path)")
        s = 0
    else:
        s = _resolve_order(args.s, dataset.n_time, 1, "--s")
    return VarxSpec(p=p, s=s)


def _write_model_artifacts(out_dir, suffix, coefs, dataset, report_body):
    lag = extract_lag_matrices(coefs)
    write_coefficients_csv(
        os.path.join(out_dir, f"coefficients{suffix}.csv"),
        coefs,
        dataset.endo_names,
        dataset.exog_names,
    )
    write_lag_matrix_csv(
        os.path.join(out_dir, f"lag_matrix_phi{suffix}.csv"),
        lag.l_phi,
        dataset.endo_names,
        dataset.endo_names,
    )
    write_heatmap_csv(
        os.path.join(out_dir, f"heatmap_phi{suffix}.csv"),
        lag.l_phi,
        dataset.endo_names,
        dataset.endo_names,
    )
    write_lag_matrix_csv(
        os.path.join(out_dir, f"lag_matrix_b{suffix}.csv"),
        lag.l_b,
        dataset.endo_names,
        dataset.exog_names,
    )
    write_heatmap_csv(
        os.path.join(out_dir, f"heatmap_b{suffix}.csv"),
        lag.l_b,
        dataset.endo_names,
        dataset.exog_names,
    )
    report_body["lag_matrix_phi"] = lag.l_phi
    report_body["lag_matrix_b"] = lag.l_b


def _note(args, message: str) -> None:
    if args.verbose:
        print(message, file=sys.stderr)


def _cmd_simulate(args) -> int:
    if args.m == 0 and args.s != 0:
        raise CliError(f"--s {args.s} requires --m > 0")
    if args.m > 0 and args.s == 0:
        raise CliError("--m > 0 requires --s >= 1")
    rng = np.random.default_rng(args.seed)
    max_phi = args.p if args.max_lag_phi is None else args.max_lag_phi
    max_b = args.s if args.max_lag_b is None else args.max_lag_b
    if not 1 <= max_phi <= args.p:
        raise CliError(f"--max-lag-phi must be in [1, {args.p}], got {max_phi}")
    if args.m and not 0 <= max_b <= args.s:
        raise CliError(f"--max-lag-b must be in [0, {args.s}], got {max_b}")
    l_phi, l_b = random_lag_matrices(rng, args.k, args.m, max_phi, max_b if args.m else 0)
    design = SimDesign(
        k=args.k,
        m=args.m,
        p=args.p,
        s=args.s,
        T=args.t,
        true_lag_matrix_phi=l_phi,
        true_lag_matrix_b=l_b,
        coefficient_scale=args.coefficient_scale,
        target_spectral_radius=args.radius,
        innovation_sd=args.innovation_sd,
        seed=args.seed,
        burn_in=args.burn_in,
    )
    dataset, truth = generate(design)
    out = args.output_dir
    endo_path = os.path.join(out, "endo.csv")
    exog_path = os.path.join(out, "exog.csv") if args.m else None
    write_design_csvs(dataset, endo_path, exog_path)
    write_coefficients_csv(
        os.path.join(out, "coefficients_true.csv"), truth, dataset.endo_names, dataset.exog_names
    )
    write_lag_matrix_csv(
        os.path.join(out, "lag_matrix_phi_true.csv"), l_phi, dataset.endo_names, dataset.endo_names
    )
    write_lag_matrix_csv(
        os.path.join(out, "lag_matrix_b_true.csv"), l_b, dataset.endo_names, dataset.exog_names
    )
    write_report(
        os.path.join(out, "report.json"),
        {
            "command": "simulate",
            "design": {
                "k": args.k, "m": args.m, "p": args.p, "s": args.s, "T": args.t,
                "coefficient_scale": args.coefficient_scale,
                "target_spectral_radius": args.radius,
                "innovation_sd": args.innovation_sd,
                "seed": args.seed, "burn_in": args.burn_in,
            },
            "true_lag_matrix_phi": l_phi,
            "true_lag_matrix_b": l_b,
            "series": {"endo": dataset.endo_names, "exog": dataset.exog_names},
        },
    )
    _note(args, f"wrote {endo_path}" + (f" and {exog_path}" if exog_path else ""))
    return 0


def _solver_config(args, penalty_kind: str, lambda_phi=0.0, lambda_b=0.0) -> SolverConfig:
    return SolverConfig(
        lambda_phi=lambda_phi,
        lambda_b=lambda_b,
        max_iter=args.max_iter,
        tol=args.tol,
        acceleration=args.acceleration,
        penalty_kind=penalty_kind,
    )


def _cmd_fit(args) -> int:
    dataset = _load_dataset(args)
    spec = _resolve_spec(args, dataset)
    compact = build_compact(dataset, spec)
    kind = PENALTY_BY_NAME[args.penalty]
    if args.lambda_phi is None:
        anchor = lambda_max(compact, kind)
        lambda_phi = 0.1 * anchor[0]
        lambda_b = 0.1 * anchor[1] if args.lambda_b is None else args.lambda_b
    else:
        lambda_phi = args.lambda_phi
        lambda_b = args.lambda_b if args.lambda_b is not None else 0.0
    if dataset.n_exog == 0:
        lambda_b = 0.0
    config = _solver_config(args, kind, lambda_phi, lambda_b)
    _note(args, f"fitting p={spec.p}, s={spec.s} at lambda=({lambda_phi:g}, {lambda_b:g})")
    result = fit(compact, config)
    score = bic(result, compact)
    body = {
        "command": "fit",
        "orders": {"p": spec.p, "s": spec.s},
        "series": {"endo": dataset.endo_names, "exog": dataset.exog_names},
        "penalty": args.penalty,
        "lambda_phi": lambda_phi,
        "lambda_b": lambda_b,
        "objective": float(result.objective_trace[-1]),
        "iterations": result.iterations,
        "converged": result.converged,
        "bic": float(score),
        "bic_degenerate": score.degenerate,
        "nonzero_phi": int(np.count_nonzero(result.coefficients.phi)),
        "nonzero_b": int(np.count_nonzero(result.coefficients.b)),
    }
    _write_model_artifacts(args.output_dir, "", result.coefficients, dataset, body)
    write_report(os.path.join(args.output_dir, "report.json"), body)
    return 0 if result.converged else 2


def _cv_section(cv_result) -> dict:
    return {
        "best_lambda_phi": cv_result.best_lambda_phi,
        "best_lambda_b": cv_result.best_lambda_b,
        "split_boundary": cv_result.split_boundary,
        "phi_values": list(cv_result.grid.phi_values),
        "b_values": list(cv_result.grid.b_values),
        "pairing": cv_result.grid.pairing,
        "msfe_surface": cv_result.cv_msfe_surface,
    }


def _cmd_cv(args) -> int:
    dataset = _load_dataset(args)
    spec = _resolve_spec(args, dataset)
    kind = PENALTY_BY_NAME[args.penalty]
    base = _solver_config(args, kind)
    mode = "cold" if args.parallel_cv else "warm"
    _note(args, f"cross-validating a {args.n_points}x{args.n_points} grid ({mode} starts)")
    cv_result = select_lambdas(dataset, spec, base, args.n_points, args.ratio, mode)
    compact = build_compact(dataset, spec)
    config = replace(
        base, lambda_phi=cv_result.best_lambda_phi, lambda_b=cv_result.best_lambda_b
    )
    result = fit(compact, config)
    score = bic(result, compact)
    body = {
        "command": "cv",
        "orders": {"p": spec.p, "s": spec.s},
        "series": {"endo": dataset.endo_names, "exog": dataset.exog_names},
        "penalty": args.penalty,
        "lambda_phi": cv_result.best_lambda_phi,
        "lambda_b": cv_result.best_lambda_b,
        "cv": _cv_section(cv_result),
        "objective": float(result.objective_trace[-1]),
        "iterations": result.iterations,
        "converged": result.converged,
        "bic": float(score),
        "bic_degenerate": score.degenerate,
    }
    _write_model_artifacts(args.output_dir, "", result.coefficients, dataset, body)
    write_report(os.path.join(args.output_dir, "report.json"), body)
    return 0 if result.converged else 2


def _cmd_evaluate(args) -> int:
    dataset = _load_dataset(args)
    spec = _resolve_spec(args, dataset)
    compact = build_compact(dataset, spec)
    sections = {}
    reports = {}
    clean = True
    for name in ("hvarx", "l1"):
        kind = PENALTY_BY_NAME[name]
        base = _solver_config(args, kind)
        given_phi = args.lambda_phi if name == "hvarx" else args.lambda_phi_l1
        given_b = args.lambda_b if name == "hvarx" else args.lambda_b_l1
        section = {"penalty": name}
        if given_phi is not None:
            lambda_phi = given_phi
            lambda_b = given_b if given_b is not None else 0.0
            section["lambda_source"] = "flags"
        else:
            mode = "cold" if args.parallel_cv else "warm"
            _note(args, f"{name}: selecting penalties on a {args.n_points}-point grid")
            cv_result = select_lambdas(dataset, spec, base, args.n_points, args.ratio, mode)
            lambda_phi, lambda_b = cv_result.best_lambda_phi, cv_result.best_lambda_b
            section["lambda_source"] = "cv"
            section["cv"] = _cv_section(cv_result)
        if dataset.n_exog == 0:
            lambda_b = 0.0
        config = _solver_config(args, kind, lambda_phi, lambda_b)
        _note(args, f"{name}: expanding-window evaluation at ({lambda_phi:g}, {lambda_b:g})")
        report = expanding_window_eval(dataset, spec, config, horizon=args.horizon)
        refit = fit(compact, config)
        score = bic(refit, compact)
        section["bic"] = float(score)
        section["bic_degenerate"] = score.degenerate
        section["refit_converged"] = refit.converged
        clean = clean and refit.converged and report.all_converged and bool(report.fit_ok.all())
        suffix = "" if name == "hvarx" else "_l1"
        _write_model_artifacts(args.output_dir, suffix, refit.coefficients, dataset, section)
        sections[name] = section
        reports[name] = report
    stamped_hvarx, stamped_l1 = compare_forecasts(reports["hvarx"], reports["l1"])
    sections["hvarx"].update(stamped_hvarx.to_dict())
    sections["l1"].update(stamped_l1.to_dict())
    body = {
        "command": "evaluate",
        "orders": {"p": spec.p, "s": spec.s},
        "series": {"endo": dataset.endo_names, "exog": dataset.exog_names},
        "hvarx": sections["hvarx"],
        "l1": sections["l1"],
        "dm": {
            "statistic": stamped_hvarx.dm_statistic,
            "pvalue": stamped_hvarx.dm_pvalue,
            "orientation": "positive statistic means the hvarx forecasts are worse",
        },
    }
    write_report(os.path.join(args.output_dir, "report.json"), body)
    return 0 if clean else 2


_COMMANDS = {
    "simulate": _cmd_simulate,
    "fit": _cmd_fit,
    "cv": _cmd_cv,
    "evaluate": _cmd_evaluate,
}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        os.makedirs(args.output_dir, exist_ok=True)
        return _COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
