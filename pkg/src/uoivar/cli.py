"""Command-line front end.

Subcommands: simulate (ground truth + realizations), fit (union-of-
intersections or cross-validated LASSO on a CSV series), forecast (one-step
predictions + accuracy), graph (causality graph export), benchmark (method
comparison over simulated realizations).

Configuration merges three layers: per-command defaults, a JSON config file
(--config; unknown keys rejected), and command-line flags whose long names
mirror the config keys. Exit codes: 0 success, 2 configuration error, 3 data
error, 4 numerical failure. UOIVAR_THREADS sets the default worker count;
--workers overrides it.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .errors import (DataError, InsufficientDataError, InvalidParamsError,
                     NumericalError, SingularDesignError)
from .metrics import (forecast_one_step, granger_graph, r_squared, rmse_forecast,
                      selection_score, sparsity_fraction)
from .rng import (TAG_REALIZATION, TAG_SIMULATE, TAG_SYSTEM, child_stream,
                  derive_seed)
from .solvers import (LambdaPath, LassoOptions, estimate_sigma, lambda_path,
                      lasso_path_fit)
from .uoi import SCHEMA_VERSION, FitResult, UoiConfig, fit_metric, uoi_var, _jsonable
from .varcore import (BlockDiagSpec, Support, TimeSeries, VarParams,
                      build_regression, check_stability, difference,
                      load_series_csv, random_sparse_var, save_series_csv,
                      simulate, write_matrix_csv)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

METHODS = ("uoi", "lasso_cv")


# ---------------------------------------------------------------------------
# file helpers

def write_json(path, doc) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def read_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from exc


def write_table_csv(path, header, rows) -> None:
    """CSV with arbitrary (string or numeric) cells; floats via repr."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(c)) if isinstance(c, float) else str(c)
                             for c in row])


def read_table_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        return list(header), [row for row in reader if row]


def params_to_json_dict(params: VarParams) -> dict:
    stable, rho = check_stability(params)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "var_params",
        "m": params.m,
        "d": params.d,
        "nu": _jsonable(params.nu),
        "a": [_jsonable(a_d) for a_d in params.a],
        "sigma": _jsonable(params.sigma),
        "spectral_radius": rho,
        "stable": stable,
    }


def params_from_json_dict(doc: dict) -> VarParams:
    try:
        return VarParams(nu=np.asarray(doc["nu"], dtype=np.float64),
                         a=tuple(np.asarray(a_d, dtype=np.float64) for a_d in doc["a"]),
                         sigma=np.asarray(doc["sigma"], dtype=np.float64))
    except KeyError as exc:
        raise DataError(f"parameter document is missing key {exc}") from exc


# ---------------------------------------------------------------------------
# configuration merging

class _Required:
    def __repr__(self):
        return "<required>"


REQUIRED = _Required()

_COMMON_UOI_DEFAULTS = {
    "lambda_count": 20,
    "lambda_min_ratio": 1e-3,
    "b1": 20,
    "b2": 30,
    "block_len": 7,
    "threshold": 1.0,
    "fit_metric": "bic",
    "raw_series_bootstrap": False,
    "max_iter": 10000,
    "tol": 1e-7,
    "workers": None,
}

_SIGMA_DEFAULTS = {
    "sigma_block_size": 4,
    "sigma_diag": 1.0,
    "sigma_offdiag": 0.25,
}

_SYSTEM_DEFAULTS = {
    "m": REQUIRED,
    "d": 1,
    "sparsity": 0.95,
    "magnitude_dist": "exp_away_from_zero",
    "target_rho": 0.7,
    **_SIGMA_DEFAULTS,
}

COMMAND_DEFAULTS = {
    "simulate": {
        **_SYSTEM_DEFAULTS,
        "t_len": REQUIRED,
        "reps": 1,
        "burn_in": None,
        "seed": 0,
        "out_dir": REQUIRED,
    },
    "fit": {
        "input": REQUIRED,
        "d": 1,
        "difference": 0,
        "method": "uoi",
        "folds": 5,
        "seed": 0,
        "out_prefix": REQUIRED,
        **_COMMON_UOI_DEFAULTS,
    },
    "forecast": {
        "input": REQUIRED,
        "fit": None,
        "params": None,
        "difference": None,
        "out_prefix": REQUIRED,
    },
    "graph": {
        "fit": REQUIRED,
        "tol": 0.0,
        "out_prefix": REQUIRED,
    },
    "benchmark": {
        **_SYSTEM_DEFAULTS,
        "t_len": 200,
        "reps": 20,
        "burn_in": None,
        "folds": 5,
        "seed": REQUIRED,
        "out_dir": REQUIRED,
        **_COMMON_UOI_DEFAULTS,
    },
}


def merge_config(command: str, args: argparse.Namespace) -> dict:
    """defaults <- config file <- explicit flags, rejecting unknown keys."""
    spec = COMMAND_DEFAULTS[command]
    cfg = {k: (None if v is REQUIRED else v) for k, v in spec.items()}
    provided = set()
    if getattr(args, "config", None):
        doc = read_json(args.config)
        if not isinstance(doc, dict):
            raise InvalidParamsError(f"{args.config}: config must be a JSON object")
        unknown = set(doc) - set(spec)
        if unknown:
            raise InvalidParamsError(
                f"{args.config}: unknown config keys {sorted(unknown)}")
        cfg.update(doc)
        provided |= set(doc)
    for key in spec:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
            provided.add(key)
    missing = [k for k, v in spec.items() if v is REQUIRED and cfg[k] is None]
    if missing:
        raise InvalidParamsError(
            f"{command}: missing required option(s): "
            + ", ".join("--" + k.replace("_", "-") for k in missing))
    return cfg


def resolve_workers(value) -> int:
    if value is not None:
        n = int(value)
    else:
        env = os.environ.get("UOIVAR_THREADS", "")
        n = int(env) if env else 1
    if n < 1:
        raise InvalidParamsError("worker count must be >= 1")
    return n


def _sigma_spec(cfg: dict) -> BlockDiagSpec:
    return BlockDiagSpec(block_size=int(cfg["sigma_block_size"]),
                         diag_value=float(cfg["sigma_diag"]),
                         offdiag_value=float(cfg["sigma_offdiag"]))


def _uoi_config(cfg: dict, path: LambdaPath, seed: int) -> UoiConfig:
    return UoiConfig(
        lambdas=path,
        b1=int(cfg["b1"]),
        b2=int(cfg["b2"]),
        block_len=int(cfg["block_len"]),
        threshold=float(cfg["threshold"]),
        fit_metric=str(cfg["fit_metric"]),
        seed=int(seed),
        raw_series_bootstrap=bool(cfg["raw_series_bootstrap"]),
        lasso_options=LassoOptions(max_iter=int(cfg["max_iter"]), tol=float(cfg["tol"])),
    )


# ---------------------------------------------------------------------------
# LASSO + cross-validation comparator

def lasso_cv_fit(reg, path: LambdaPath, n_folds: int = 5,
                 opts: LassoOptions | None = None) -> FitResult:
    """Path LASSO with V contiguous-fold cross-validation over the rows.

    Folds are contiguous row blocks (never shuffled) so held-out rows stay
    temporally coherent. The path value with the lowest mean held-out MSE is
    refit on the full data; the result mirrors the FitResult schema with a
    single candidate support and a one-hot choice histogram.
    """
    opts = opts or LassoOptions()
    n = reg.n_rows
    if n_folds < 2:
        raise InvalidParamsError("n_folds must be >= 2")
    if n < 2 * n_folds:
        raise InsufficientDataError(
            f"{n} rows is too short for {n_folds}-fold cross-validation")
    k_count = len(path)
    folds = np.array_split(np.arange(n), n_folds)
    cv_mse = np.zeros((n_folds, k_count))
    for v, test_idx in enumerate(folds):
        train_idx = np.concatenate([f for w, f in enumerate(folds) if w != v])
        train = reg.take_rows(train_idx)
        test = reg.take_rows(test_idx)
        fits = lasso_path_fit(train, path, opts)
        for k, fit in enumerate(fits):
            cv_mse[v, k] = fit_metric(fit.b, test, "mse")
    mean_mse = cv_mse.mean(axis=0)
    k_star = int(np.argmin(mean_mse))
    final = lasso_path_fit(reg, path, opts)[k_star]
    b_hat = final.b
    d = (reg.n_predictors - 1) // reg.m
    support = final.penalized_support().with_intercept()
    histogram = np.zeros(k_count, dtype=np.int64)
    histogram[k_star] = 1
    diagnostics = {
        "r2": r_squared(reg, b_hat),
        "bic": fit_metric(b_hat, reg, "bic"),
        "sparsity_fraction": sparsity_fraction(b_hat, d, reg.m),
        "n_star": None,
        "per_bootstrap_fit_scores": None,
        "cv_mse": [float(v) for v in mean_mse],
        "chosen_lambda_index": k_star,
        "chosen_lambda": float(path.values[k_star]),
        "converged": bool(final.converged),
    }
    return FitResult(b_hat=b_hat, sigma_hat=estimate_sigma(reg, b_hat),
                     supports=[support], chosen_k_histogram=histogram,
                     diagnostics=diagnostics)


# ---------------------------------------------------------------------------
# shared fit plumbing

def _prepare_series(series: TimeSeries, diff_order: int) -> TimeSeries:
    if diff_order:
        series = difference(series, diff_order)
    data = series.data
    spans = data.max(axis=0) - data.min(axis=0)
    dead = np.nonzero(spans == 0.0)[0]
    if dead.size:
        names = [series.column_names()[j] for j in dead]
        raise DataError("zero-variance column(s): " + ", ".join(names))
    return series


def run_fit(series: TimeSeries, cfg: dict, seed: int, workers: int):
    """(FitResult, method, lambda path, lag order) for either method."""
    d = int(cfg["d"])
    method = str(cfg["method"])
    if method not in METHODS:
        raise InvalidParamsError(f"method must be one of {METHODS}, got {method!r}")
    reg = build_regression(series, d)
    path = lambda_path(reg, int(cfg["lambda_count"]), float(cfg["lambda_min_ratio"]))
    if method == "uoi":
        ucfg = _uoi_config(cfg, path, seed)
        result = uoi_var(series, d, ucfg, n_workers=workers)
    else:
        opts = LassoOptions(max_iter=int(cfg["max_iter"]), tol=float(cfg["tol"]))
        result = lasso_cv_fit(reg, path, n_folds=int(cfg["folds"]), opts=opts)
    return result, method, path, d


def fit_document(result: FitResult, method: str, path: LambdaPath, d: int,
                 series: TimeSeries, cfg: dict, elapsed: float) -> dict:
    echo = {k: v for k, v in sorted(cfg.items())
            if k not in ("input", "out_prefix", "workers")}
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "fit_result",
        "method": method,
        "m": series.m,
        "d": d,
        "difference_order": int(cfg.get("difference") or 0),
        "column_names": list(series.column_names()),
        "lambda_path": [float(v) for v in path.values],
        "config": _jsonable(echo),
        "result": result.to_json_dict(),
        "elapsed_seconds": float(elapsed),
    }


# ---------------------------------------------------------------------------
# subcommands

def cmd_simulate(cfg: dict) -> int:
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = int(cfg["seed"])
    params = random_sparse_var(
        m=int(cfg["m"]), d=int(cfg["d"]), sparsity=float(cfg["sparsity"]),
        magnitude_dist=str(cfg["magnitude_dist"]),
        target_rho=float(cfg["target_rho"]),
        sigma_spec=_sigma_spec(cfg),
        stream=child_stream(seed, TAG_SYSTEM, 0))
    write_json(out_dir / "params.json", params_to_json_dict(params))
    burn_in = cfg["burn_in"]
    realizations = []
    for r in range(int(cfg["reps"])):
        stream = child_stream(seed, TAG_SIMULATE, r)
        series = simulate(params, int(cfg["t_len"]),
                          None if burn_in is None else int(burn_in), stream)
        name = f"realization_{r:03d}.csv"
        save_series_csv(out_dir / name, series)
        realizations.append({"index": r, "file": name,
                             "stream": {"seed": seed, "purpose": TAG_SIMULATE, "index": r}})
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "kind": "simulate_manifest",
        "seed": seed,
        "config": _jsonable({k: v for k, v in sorted(cfg.items()) if k != "out_dir"}),
        "params_file": "params.json",
        "realizations": realizations,
    }
    write_json(out_dir / "manifest.json", manifest)
    print(f"wrote {len(realizations)} realization(s) to {out_dir}")
    return EXIT_OK


def cmd_fit(cfg: dict) -> int:
    t0 = time.perf_counter()
    series = _prepare_series(load_series_csv(cfg["input"]), int(cfg["difference"]))
    workers = resolve_workers(cfg["workers"])
    seed = int(cfg["seed"])
    result, method, path, d = run_fit(series, cfg, seed, workers)
    doc = fit_document(result, method, path, d, series, cfg,
                       elapsed=time.perf_counter() - t0)
    prefix = Path(cfg["out_prefix"])
    prefix.parent.mkdir(parents=True, exist_ok=True)
    write_json(f"{prefix}.json", doc)
    write_matrix_csv(f"{prefix}_coefficients.csv", series.column_names(), result.b_hat)
    diag = result.diagnostics
    print(f"{method}: sparsity {diag['sparsity_fraction']:.4f}, "
          f"r2 {diag['r2']:.4f} -> {prefix}.json")
    return EXIT_OK


def cmd_forecast(cfg: dict) -> int:
    if (cfg["fit"] is None) == (cfg["params"] is None):
        raise InvalidParamsError("provide exactly one of --fit or --params")
    series = load_series_csv(cfg["input"])
    if cfg["fit"] is not None:
        doc = read_json(cfg["fit"])
        if doc.get("kind") != "fit_result":
            raise DataError(f"{cfg['fit']}: not a fit-result document")
        model = np.asarray(doc["result"]["b_hat"], dtype=np.float64)
        d = int(doc["d"])
        diff_order = int(cfg["difference"] if cfg["difference"] is not None
                         else doc.get("difference_order", 0))
    else:
        params = params_from_json_dict(read_json(cfg["params"]))
        model, d = params.coefficient_matrix(), params.d
        diff_order = int(cfg["difference"] or 0)
    if diff_order:
        series = difference(series, diff_order)
    if model.shape[1] != series.m:
        raise DataError(f"model is for m={model.shape[1]} components, "
                        f"series has m={series.m}")
    predicted = forecast_one_step(series, model, d)
    actual = TimeSeries(data=series.data[d:], columns=series.columns)
    acc = rmse_forecast(actual, predicted)

    prefix = Path(cfg["out_prefix"])
    prefix.parent.mkdir(parents=True, exist_ok=True)
    write_matrix_csv(f"{prefix}_forecasts.csv", series.column_names(), predicted.data)
    err = actual.data - predicted.data
    rmse_rows = np.column_stack([
        np.arange(series.m, dtype=np.float64),
        acc.per_component_rmse,
        err.mean(axis=0),
    ])
    write_matrix_csv(f"{prefix}_rmse.csv", ["component", "rmse", "mean_error"], rmse_rows)
    summary = {
        "schema_version": SCHEMA_VERSION,
        "kind": "forecast_summary",
        "overall_rmse": acc.overall_rmse,
        "mean_raw_error": acc.mean_error,
        "n_forecast_rows": int(predicted.data.shape[0]),
        "difference_order": diff_order,
        "per_component_rmse": {name: float(v) for name, v in
                               zip(series.column_names(), acc.per_component_rmse)},
    }
    write_json(f"{prefix}_summary.json", summary)
    print(f"overall RMSE {acc.overall_rmse:.6g}, mean raw error {acc.mean_error:.6g}")
    return EXIT_OK


def cmd_graph(cfg: dict) -> int:
    doc = read_json(cfg["fit"])
    if doc.get("kind") != "fit_result":
        raise DataError(f"{cfg['fit']}: not a fit-result document")
    b_hat = np.asarray(doc["result"]["b_hat"], dtype=np.float64)
    d, m = int(doc["d"]), int(doc["m"])
    nodes = tuple(doc.get("column_names") or (f"x{j}" for j in range(m)))
    graph = granger_graph(b_hat, d, m, tol=float(cfg["tol"]), nodes=nodes)

    prefix = Path(cfg["out_prefix"])
    prefix.parent.mkdir(parents=True, exist_ok=True)
    with open(f"{prefix}.dot", "w", encoding="utf-8") as fh:
        fh.write(graph.to_dot())
    edge_rows = np.asarray([[float(i), float(j), w] for i, j, w in graph.edge_rows()],
                           dtype=np.float64).reshape(-1, 3)
    write_matrix_csv(f"{prefix}_edges.csv", ["source", "target", "max_abs_coef"], edge_rows)
    degree_rows = np.column_stack([
        np.arange(m, dtype=np.float64), graph.in_degree, graph.out_degree])
    write_matrix_csv(f"{prefix}_degrees.csv", ["node", "in_degree", "out_degree"], degree_rows)
    print(f"{len(graph.edges)} edge(s) over {m} nodes -> {prefix}.dot")
    return EXIT_OK


def run_benchmark(cfg: dict, workers: int = 1):
    """Simulate one ground-truth system, fit every realization with both
    methods, and score against the truth. Returns the records the benchmark
    files are written from (also used directly by the acceptance suite)."""
    seed = int(cfg["seed"])
    m, d = int(cfg["m"]), int(cfg["d"])
    params = random_sparse_var(
        m=m, d=d, sparsity=float(cfg["sparsity"]),
        magnitude_dist=str(cfg["magnitude_dist"]),
        target_rho=float(cfg["target_rho"]),
        sigma_spec=_sigma_spec(cfg),
        stream=child_stream(seed, TAG_SYSTEM, 0))
    b_true = params.coefficient_matrix()
    truth_support = Support.from_matrix(b_true, include_intercept_row=False)

    per_rows = []
    estimates: dict[str, list[np.ndarray]] = {name: [] for name in METHODS}
    burn_in = cfg.get("burn_in")
    opts = LassoOptions(max_iter=int(cfg["max_iter"]), tol=float(cfg["tol"]))
    for r in range(int(cfg["reps"])):
        series = simulate(params, int(cfg["t_len"]),
                          None if burn_in is None else int(burn_in),
                          child_stream(seed, TAG_SIMULATE, r))
        reg = build_regression(series, d)
        path = lambda_path(reg, int(cfg["lambda_count"]), float(cfg["lambda_min_ratio"]))
        fits = {
            "uoi": uoi_var(series, d,
                           _uoi_config(cfg, path, derive_seed(seed, TAG_REALIZATION, r)),
                           n_workers=workers),
            "lasso_cv": lasso_cv_fit(reg, path, n_folds=int(cfg["folds"]), opts=opts),
        }
        for method, result in fits.items():
            estimates[method].append(result.b_hat)
            score = selection_score(result.penalized_support(), truth_support, d, m)
            per_rows.append({
                "method": method,
                "realization": r,
                "r2": result.diagnostics["r2"],
                "bic": result.diagnostics["bic"],
                "sparsity_fraction": result.diagnostics["sparsity_fraction"],
                "tp": score.tp, "fp": score.fp, "tn": score.tn, "fn": score.fn,
                "sensitivity": score.sensitivity,
                "specificity": score.specificity,
                "balanced_accuracy": score.balanced_accuracy,
            })

    truth_mask = b_true != 0
    truth_mask[0, :] = False
    bias_rows = []
    mean_estimates = {}
    for method in METHODS:
        stack = np.stack(estimates[method])
        mean_b = stack.mean(axis=0)
        mean_estimates[method] = mean_b
        bias = mean_b[truth_mask] - b_true[truth_mask]
        bias_rows.append({
            "method": method,
            "mean_abs_bias": float(np.abs(bias).mean()),
            "mean_signed_bias": float(bias.mean()),
            "n_true_nonzeros": int(truth_mask.sum()),
        })
    return {
        "params": params,
        "truth_support": truth_support,
        "per_realization": per_rows,
        "bias": bias_rows,
        "mean_estimates": mean_estimates,
        "truth_values": b_true[truth_mask],
    }


_SUMMARY_METRICS = ("r2", "bic", "balanced_accuracy", "sensitivity",
                    "specificity", "fp", "sparsity_fraction")


def summarize_benchmark(per_rows: list[dict]) -> list[dict]:
    out = []
    for method in METHODS:
        vals = [row for row in per_rows if row["method"] == method]
        for metric in _SUMMARY_METRICS:
            data = np.asarray([float(row[metric]) for row in vals])
            q25, med, q75 = np.percentile(data, [25, 50, 75])
            out.append({"method": method, "metric": metric,
                        "median": float(med), "q25": float(q25), "q75": float(q75)})
    return out


def cmd_benchmark(cfg: dict) -> int:
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    workers = resolve_workers(cfg["workers"])
    bench = run_benchmark(cfg, workers=workers)

    write_json(out_dir / "truth_params.json", params_to_json_dict(bench["params"]))

    per_header = ["method", "realization", "r2", "bic", "sparsity_fraction",
                  "tp", "fp", "tn", "fn", "sensitivity", "specificity",
                  "balanced_accuracy"]
    write_table_csv(out_dir / "per_realization.csv", per_header,
                    [[row[k] if isinstance(row[k], (int, str)) else float(row[k])
                      for k in per_header] for row in bench["per_realization"]])

    summary = summarize_benchmark(bench["per_realization"])
    write_table_csv(out_dir / "summary.csv",
                    ["method", "metric", "median", "q25", "q75"],
                    [[s["method"], s["metric"], s["median"], s["q25"], s["q75"]]
                     for s in summary])

    write_table_csv(out_dir / "bias.csv",
                    ["method", "mean_abs_bias", "mean_signed_bias", "n_true_nonzeros"],
                    [[b["method"], b["mean_abs_bias"], b["mean_signed_bias"],
                      b["n_true_nonzeros"]] for b in bench["bias"]])

    # pooled per-coefficient average estimates at the true nonzero positions,
    # binned alongside the true values
    truth_vals = bench["truth_values"]
    mask = bench["params"].coefficient_matrix() != 0
    mask[0, :] = False
    series_by_col = {"truth": truth_vals}
    for method in METHODS:
        series_by_col[method] = bench["mean_estimates"][method][mask]
    pooled = np.concatenate(list(series_by_col.values()))
    lo, hi = float(pooled.min()), float(pooled.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, 21)
    hist_rows = np.column_stack(
        [edges[:-1], edges[1:]]
        + [np.histogram(series_by_col[name], bins=edges)[0].astype(np.float64)
           for name in series_by_col])
    write_matrix_csv(out_dir / "histograms.csv",
                     ["bin_left", "bin_right"] + [f"count_{n}" for n in series_by_col],
                     hist_rows)

    manifest = {
        "schema_version": SCHEMA_VERSION,
        "kind": "benchmark_manifest",
        "seed": int(cfg["seed"]),
        "config": _jsonable({k: v for k, v in sorted(cfg.items()) if k != "out_dir"}),
        "files": ["truth_params.json", "per_realization.csv", "summary.csv",
                  "bias.csv", "histograms.csv"],
    }
    write_json(out_dir / "manifest.json", manifest)
    for row in summarize_benchmark(bench["per_realization"]):
        if row["metric"] == "balanced_accuracy":
            print(f"{row['method']}: median balanced accuracy {row['median']:.4f}")
    print(f"benchmark artifacts in {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file; flags override its keys")


def _add_uoi_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--lambda-count", type=int, dest="lambda_count")
    sub.add_argument("--lambda-min-ratio", type=float, dest="lambda_min_ratio")
    sub.add_argument("--b1", type=int)
    sub.add_argument("--b2", type=int)
    sub.add_argument("--block-len", type=int, dest="block_len")
    sub.add_argument("--threshold", type=float, help="selection threshold s in (0, 1]")
    sub.add_argument("--fit-metric", dest="fit_metric",
                     choices=["mse", "bic", "neg_loglik"])
    sub.add_argument("--raw-series-bootstrap", dest="raw_series_bootstrap",
                     action=argparse.BooleanOptionalAction, default=None)
    sub.add_argument("--max-iter", type=int, dest="max_iter")
    sub.add_argument("--tol", type=float)
    sub.add_argument("--workers", type=int,
                     help="worker threads (default: UOIVAR_THREADS or 1)")


def _add_system_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--m", type=int, help="process dimension")
    sub.add_argument("--d", type=int, help="lag order")
    sub.add_argument("--sparsity", type=float)
    sub.add_argument("--magnitude-dist", dest="magnitude_dist",
                     choices=["exp_away_from_zero", "laplace0", "uniform_pm1"])
    sub.add_argument("--target-rho", type=float, dest="target_rho")
    sub.add_argument("--sigma-block-size", type=int, dest="sigma_block_size")
    sub.add_argument("--sigma-diag", type=float, dest="sigma_diag")
    sub.add_argument("--sigma-offdiag", type=float, dest="sigma_offdiag")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uoivar",
        description="Sparse vector autoregression via bootstrapped support "
                    "intersection and bagged restricted least squares.")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("simulate", help="draw realizations of a random sparse system")
    _add_common(p)
    _add_system_flags(p)
    p.add_argument("--t-len", type=int, dest="t_len")
    p.add_argument("--reps", type=int)
    p.add_argument("--burn-in", type=int, dest="burn_in")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", dest="out_dir")

    p = subs.add_parser("fit", help="fit a CSV series (uoi or lasso_cv)")
    _add_common(p)
    p.add_argument("--input")
    p.add_argument("--d", type=int)
    p.add_argument("--difference", type=int, help="differencing order before fitting")
    p.add_argument("--method", choices=list(METHODS))
    p.add_argument("--folds", type=int, help="cross-validation folds for lasso_cv")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-prefix", dest="out_prefix")
    _add_uoi_flags(p)

    p = subs.add_parser("forecast", help="one-step forecasts and accuracy")
    _add_common(p)
    p.add_argument("--input")
    p.add_argument("--fit", help="fit-result JSON to forecast with")
    p.add_argument("--params", help="ground-truth parameter JSON to forecast with")
    p.add_argument("--difference", type=int)
    p.add_argument("--out-prefix", dest="out_prefix")

    p = subs.add_parser("graph", help="export the causality graph of a fit")
    _add_common(p)
    p.add_argument("--fit")
    p.add_argument("--tol", type=float)
    p.add_argument("--out-prefix", dest="out_prefix")

    p = subs.add_parser("benchmark", help="compare methods on simulated data")
    _add_common(p)
    _add_system_flags(p)
    p.add_argument("--t-len", type=int, dest="t_len")
    p.add_argument("--reps", type=int)
    p.add_argument("--burn-in", type=int, dest="burn_in")
    p.add_argument("--folds", type=int)
    p.add_argument("--seed", type=int, help="mandatory for benchmark runs")
    p.add_argument("--out-dir", dest="out_dir")
    _add_uoi_flags(p)

    return parser


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "forecast": cmd_forecast,
    "graph": cmd_graph,
    "benchmark": cmd_benchmark,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = merge_config(args.command, args)
        return COMMANDS[args.command](cfg)
    except InvalidParamsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, InsufficientDataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, SingularDesignError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
