"""Sparse, low-bias vector autoregression.

Estimation pipeline: moving-block-bootstrap intersection of LASSO supports
(candidate selection) followed by bagged support-restricted least squares
(estimation), plus simulation, forecasting, fit metrics, and Granger-graph
export. See the cli module for the command-line front end.
"""

from .errors import (DataError, InsufficientDataError, InvalidParamsError,
                     NumericalError, SingularDesignError, UoivarError)
from .metrics import (ForecastAccuracy, GrangerGraph, SelectionScore, bic,
                      forecast_one_step, granger_graph, r_squared, rmse_forecast,
                      selection_score, sparsity_fraction)
from .resample import MbbPlan, effective_sample, mbb_plan, mbb_sample, mbb_sample_series
from .solvers import (KERNEL_BACKEND, LambdaPath, LassoFit, LassoOptions,
                      estimate_sigma, kkt_residual, lambda_path, lasso_fit,
                      lasso_objective, lasso_path_fit, ols_full, ols_restricted)
from .uoi import (FitResult, IntersectionResult, UoiConfig, fit_metric,
                  intersection_step, union_step, uoi_var)
from .varcore import (BlockDiagSpec, RegressionForm, Support, TimeSeries,
                      VarParams, build_regression, check_stability, companion_matrix,
                      difference, load_series_csv, random_sparse_var, save_series_csv,
                      simulate, spectral_radius, stationary_mean)

__version__ = "0.1.0"

__all__ = [
    "BlockDiagSpec", "DataError", "FitResult", "ForecastAccuracy", "GrangerGraph",
    "InsufficientDataError", "IntersectionResult", "InvalidParamsError",
    "KERNEL_BACKEND", "LambdaPath", "LassoFit", "LassoOptions", "MbbPlan",
    "NumericalError", "RegressionForm", "SelectionScore", "SingularDesignError",
    "Support", "TimeSeries", "UoiConfig", "UoivarError", "VarParams", "bic",
    "build_regression", "check_stability", "companion_matrix", "difference",
    "effective_sample", "estimate_sigma", "fit_metric", "forecast_one_step",
    "granger_graph", "intersection_step", "kkt_residual", "lambda_path",
    "lasso_fit", "lasso_objective", "lasso_path_fit", "load_series_csv",
    "mbb_plan", "mbb_sample", "mbb_sample_series", "ols_full", "ols_restricted",
    "r_squared", "random_sparse_var", "rmse_forecast", "save_series_csv",
    "selection_score", "simulate", "sparsity_fraction", "spectral_radius",
    "stationary_mean", "union_step", "uoi_var",
]
