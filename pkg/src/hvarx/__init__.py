"""Hierarchical-lag and l1 penalized VARX estimation, selection, and
forecast evaluation."""

__version__ = "0.1.0"

from .data import (
    CoefficientSet,
    CompactForm,
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
from .evaluation import (
    ForecastReport,
    LagMatrices,
    compare_forecasts,
    diebold_mariano,
    expanding_window_eval,
    extract_lag_matrices,
    one_step_forecast,
    test_horizon,
    write_lag_matrix_csv,
)
from .prox import (
    backend,
    group_soft_threshold,
    hier_penalty_value,
    hier_prox_paths_inplace,
    prox_hier_suffix,
    prox_l1,
    set_backend,
    soft_threshold_paths_inplace,
)
from .select import (
    BicResult,
    CvResult,
    LambdaGrid,
    bic,
    build_grid,
    cross_validate,
    lambda_max,
    select_lambdas,
    split_lengths,
    validation_forecasts,
)
from .simulate import (
    SimDesign,
    generate,
    random_lag_matrices,
    replication_design,
    replication_seed,
)
from .solver import (
    FitResult,
    SolverConfig,
    fit,
    lipschitz_constant,
    objective,
    prox_gradient_step,
    row_compact,
)

__all__ = [
    "BicResult",
    "CoefficientSet",
    "CompactForm",
    "CvResult",
    "FitResult",
    "ForecastReport",
    "LagMatrices",
    "LambdaGrid",
    "SimDesign",
    "SolverConfig",
    "VarxDataset",
    "VarxSpec",
    "auto_order",
    "backend",
    "bic",
    "build_compact",
    "build_grid",
    "companion_matrix",
    "companion_spectral_radius",
    "compare_forecasts",
    "cross_validate",
    "diebold_mariano",
    "expanding_window_eval",
    "extract_lag_matrices",
    "fit",
    "generate",
    "group_soft_threshold",
    "hier_penalty_value",
    "hier_prox_paths_inplace",
    "lambda_max",
    "lipschitz_constant",
    "load_and_center",
    "objective",
    "one_step_forecast",
    "prefix_compact",
    "prox_gradient_step",
    "prox_hier_suffix",
    "prox_l1",
    "random_lag_matrices",
    "read_series_csv",
    "replication_design",
    "replication_seed",
    "row_compact",
    "select_lambdas",
    "set_backend",
    "soft_threshold_paths_inplace",
    "split_lengths",
    "test_horizon",
    "validation_forecasts",
    "write_lag_matrix_csv",
    "write_series_csv",
]
