"""Union-of-intersections VAR estimation.

Two stages over moving-block bootstrap samples of the stacked regression:

* intersection_step: for each of B1 bootstrap samples, run the LASSO along
  the regularization path and keep, per path value, the positions selected in
  at least a fraction s of the replicates. With s = 1 this is the strict
  intersection of the bootstrap supports.
* union_step: for each of B2 train/test bootstrap pairs, fit
  support-restricted least squares for every candidate support on the train
  sample, score it on the test sample, keep the winner, and average the B2
  winners into the final estimate.

Replicate random streams are derived from (seed, purpose, replicate index),
so output is identical no matter how many worker threads run the replicates.
"""

from __future__ import annotations

import math
import warnings
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import metrics as _metrics
from .errors import DataError, InvalidParamsError, NumericalError, UoivarError
from .resample import mbb_plan, mbb_sample, mbb_sample_series
from .rng import (TAG_INTERSECT, TAG_INTERSECT_RETRY, TAG_UNION_TEST,
                  TAG_UNION_TRAIN, child_stream)
from .solvers import (LambdaPath, LassoOptions, estimate_sigma, lasso_path_fit,
                      ols_restricted)
from .varcore import RegressionForm, Support, TimeSeries, build_regression

FIT_METRIC_KINDS = ("mse", "bic", "neg_loglik")

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class UoiConfig:
    """Hyperparameters: path, bootstrap counts B1/B2, block length L,
    selection threshold s, union-step fit metric, and master seed."""

    lambdas: LambdaPath
    b1: int = 20
    b2: int = 30
    block_len: int = 7
    threshold: float = 1.0
    fit_metric: str = "bic"
    seed: int = 0
    raw_series_bootstrap: bool = False
    lasso_options: LassoOptions = field(default_factory=LassoOptions)

    def __post_init__(self):
        if self.b1 < 1 or self.b2 < 1:
            raise InvalidParamsError("b1 and b2 must be >= 1")
        if not 0.0 < self.threshold <= 1.0:
            raise InvalidParamsError("threshold s must lie in (0, 1]")
        if self.block_len < 1:
            raise InvalidParamsError("block_len must be >= 1")
        if self.fit_metric not in FIT_METRIC_KINDS:
            raise InvalidParamsError(
                f"fit_metric must be one of {FIT_METRIC_KINDS}, got {self.fit_metric!r}")
        if self.seed < 0:
            raise InvalidParamsError("seed must be a non-negative 64-bit integer")

    @property
    def k(self) -> int:
        return len(self.lambdas)


@dataclass
class IntersectionResult:
    """Thresholded supports per path value, plus the per-replicate supports
    that produced them (penalized positions only) for diagnostics/oracles."""

    supports: list[Support]
    replicate_supports: list[list[Support]]
    n_dropped: int
    n_unconverged: int


@dataclass
class FitResult:
    """Final estimate, candidate supports, union-step choice histogram, and
    flat diagnostics (r2, bic, sparsity_fraction, n_star, fit scores, ...)."""

    b_hat: np.ndarray
    sigma_hat: np.ndarray
    supports: list[Support]
    chosen_k_histogram: np.ndarray
    diagnostics: dict

    def penalized_support(self) -> Support:
        return Support.from_matrix(self.b_hat, include_intercept_row=False)

    def to_json_dict(self) -> dict:
        return {
            "b_hat": _jsonable(self.b_hat),
            "sigma_hat": _jsonable(self.sigma_hat),
            "supports": [sorted([i, j] for i, j in s.entries) for s in self.supports],
            "chosen_k_histogram": _jsonable(self.chosen_k_histogram),
            "diagnostics": _jsonable(self.diagnostics),
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "FitResult":
        b_hat = np.asarray(doc["b_hat"], dtype=np.float64)
        p, m = b_hat.shape
        supports = [Support(frozenset((int(i), int(j)) for i, j in entries), p, m)
                    for entries in doc["supports"]]
        return cls(
            b_hat=b_hat,
            sigma_hat=np.asarray(doc["sigma_hat"], dtype=np.float64),
            supports=supports,
            chosen_k_histogram=np.asarray(doc["chosen_k_histogram"], dtype=np.int64),
            diagnostics=dict(doc["diagnostics"]),
        )


def _jsonable(x):
    """Plain-JSON view: numpy scalars/arrays to native types, non-finite
    floats to null (keeps serialized output strict and byte-stable)."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (float, np.floating)):
        f = float(x)
        return f if math.isfinite(f) else None
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if x is None or isinstance(x, str):
        return x
    raise TypeError(f"cannot serialize {type(x).__name__}")


def fit_metric(b, test: RegressionForm, kind: str) -> float:
    """Score an estimate on held-out data; lower is better for every kind.

    mse: mean squared residual. neg_loglik: Gaussian negative log-likelihood
    at the ML residual covariance. bic: N*logdet(Sigma_ML) + k_nz*log(N) with
    k_nz the nonzero count of b. Singular covariances are ridge-regularized
    by 1e-8*trace/M.
    """
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (test.n_predictors, test.m):
        raise InvalidParamsError(
            f"b has shape {b.shape}, expected ({test.n_predictors}, {test.m})")
    resid = test.y - test.u @ b
    n, m = test.n_rows, test.m
    if kind == "mse":
        return float(np.mean(resid ** 2))
    if kind not in ("bic", "neg_loglik"):
        raise InvalidParamsError(
            f"fit metric kind must be one of {FIT_METRIC_KINDS}, got {kind!r}")
    s = resid.T @ resid / n
    s = (s + s.T) / 2.0
    trace = float(np.trace(s))
    min_eig = float(np.linalg.eigvalsh(s).min())
    if min_eig <= 1e-12 * max(trace, 1e-300):
        ridge = 1e-8 * trace / m
        if ridge <= 0.0:
            ridge = 1e-8
        warnings.warn("singular residual covariance in fit metric; "
                      f"ridge-regularizing with {ridge:.3g}")
        s = s + ridge * np.eye(m)
    sign, logdet = np.linalg.slogdet(s)
    if sign <= 0 or not np.isfinite(logdet):
        return float("inf")
    if kind == "bic":
        return float(n * logdet + np.count_nonzero(b) * math.log(n))
    return float(0.5 * n * (m * math.log(2.0 * math.pi) + logdet + m))


def _map_indexed(fn, count: int, n_workers: int) -> list:
    """Run fn over range(count); output order is by index regardless of
    scheduling, which is what keeps parallel runs bit-identical."""
    if n_workers <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(fn, range(count)))


def _draw_sample(reg: RegressionForm, series: TimeSeries | None,
                 cfg: UoiConfig, stream: np.random.Generator) -> RegressionForm:
    if cfg.raw_series_bootstrap:
        if series is None:
            raise InvalidParamsError(
                "raw_series_bootstrap requires the original series")
        plan = mbb_plan(series.data.shape[0], cfg.block_len, stream)
        return build_regression(mbb_sample_series(series, plan), reg.d)
    plan = mbb_plan(reg.n_rows, cfg.block_len, stream)
    return mbb_sample(reg, plan)


_REPLICATE_ERRORS = (UoivarError, np.linalg.LinAlgError, FloatingPointError)


def intersection_step(reg: RegressionForm, cfg: UoiConfig,
                      series: TimeSeries | None = None,
                      n_workers: int = 1) -> IntersectionResult:
    """Bootstrap LASSO supports thresholded per path value.

    A position enters S_k when selected in at least ceil(s * B) of the B
    completed replicates (an epsilon guard keeps s = 1 exact in floating
    point). Intercept positions are always included. A failing replicate is
    retried once on a fresh stream, then dropped with a warning; the
    threshold then counts against the reduced replicate total.
    """
    p, m = reg.n_predictors, reg.m
    opts = cfg.lasso_options

    def one_replicate(b_idx: int):
        for tag in (TAG_INTERSECT, TAG_INTERSECT_RETRY):
            stream = child_stream(cfg.seed, tag, b_idx)
            try:
                sample = _draw_sample(reg, series, cfg, stream)
                fits = lasso_path_fit(sample, cfg.lambdas, opts)
            except _REPLICATE_ERRORS:
                continue
            supports = [fit.penalized_support() for fit in fits]
            unconverged = sum(not fit.converged for fit in fits)
            return supports, unconverged
        return None

    results = _map_indexed(one_replicate, cfg.b1, n_workers)
    kept = [r for r in results if r is not None]
    n_dropped = cfg.b1 - len(kept)
    if n_dropped:
        warnings.warn(f"{n_dropped} of {cfg.b1} intersection replicates failed "
                      "twice and were dropped")
    if not kept:
        raise NumericalError("every intersection replicate failed")

    replicate_supports = [r[0] for r in kept]
    n_unconverged = sum(r[1] for r in kept)
    b_eff = len(kept)
    need = max(math.ceil(cfg.threshold * b_eff - 1e-12), 1)
    intercept_entries = {(0, j) for j in range(m)}
    supports = []
    for k in range(cfg.k):
        counts: Counter = Counter()
        for rep in replicate_supports:
            counts.update(rep[k].entries)
        entries = {pos for pos, c in counts.items() if c >= need}
        supports.append(Support(frozenset(entries | intercept_entries), p, m))
    return IntersectionResult(supports=supports,
                              replicate_supports=replicate_supports,
                              n_dropped=n_dropped,
                              n_unconverged=n_unconverged)


def union_step(reg: RegressionForm, supports: list[Support], cfg: UoiConfig,
               series: TimeSeries | None = None,
               n_workers: int = 1) -> FitResult:
    """Bagged restricted least squares with bootstrap model choice.

    Each replicate draws independent train and test samples, fits every
    candidate support on the train sample, and keeps the candidate with the
    best test-sample fit metric (ties go to the smallest index, i.e. the
    sparsest candidate). The B2 winners are averaged; the residual covariance
    is estimated from the ORIGINAL data at the averaged estimate.
    """
    if not supports:
        raise InvalidParamsError("union_step needs at least one candidate support")
    k_count = len(supports)

    def one_replicate(b_idx: int):
        train = _draw_sample(reg, series, cfg,
                             child_stream(cfg.seed, TAG_UNION_TRAIN, b_idx))
        test = _draw_sample(reg, series, cfg,
                            child_stream(cfg.seed, TAG_UNION_TEST, b_idx))
        scores = np.full(k_count, np.inf)
        fits: list[np.ndarray | None] = [None] * k_count
        n_rank_deficient = 0
        for k, support in enumerate(supports):
            try:
                b_k, rank_deficient = ols_restricted(train, support)
                score = fit_metric(b_k, test, cfg.fit_metric)
            except _REPLICATE_ERRORS:
                continue
            if math.isnan(score):
                continue
            scores[k] = score
            fits[k] = b_k
            n_rank_deficient += rank_deficient
        if not np.isfinite(scores).any():
            return None
        j = int(np.argmin(scores))
        return fits[j], j, scores, n_rank_deficient

    results = _map_indexed(one_replicate, cfg.b2, n_workers)
    kept = [r for r in results if r is not None]
    n_dropped = cfg.b2 - len(kept)
    if n_dropped:
        warnings.warn(f"{n_dropped} of {cfg.b2} union replicates failed "
                      "for every candidate and were dropped")
    if not kept:
        raise NumericalError("every union replicate failed")

    b_hat = np.zeros((reg.n_predictors, reg.m))
    for b_rep, _, _, _ in kept:
        b_hat += b_rep
    b_hat /= len(kept)
    sigma_hat = estimate_sigma(reg, b_hat)

    histogram = np.zeros(k_count, dtype=np.int64)
    score_rows = []
    rank_deficient_total = 0
    for res in results:
        if res is None:
            score_rows.append([float("nan")] * k_count)
            continue
        _, j, scores, n_rd = res
        histogram[j] += 1
        rank_deficient_total += n_rd
        score_rows.append([float(v) for v in scores])

    d = (reg.n_predictors - 1) // reg.m
    try:
        r2 = _metrics.r_squared(reg, b_hat)
    except DataError:
        r2 = float("nan")
    diagnostics = {
        "r2": r2,
        "bic": fit_metric(b_hat, reg, "bic"),
        "sparsity_fraction": _metrics.sparsity_fraction(b_hat, d, reg.m),
        "n_star": max(cfg.block_len - d + 1, 0),
        "per_bootstrap_fit_scores": score_rows,
        "dropped_replicates_union": n_dropped,
        "rank_deficient_fits": int(rank_deficient_total),
    }
    return FitResult(b_hat=b_hat, sigma_hat=sigma_hat, supports=list(supports),
                     chosen_k_histogram=histogram, diagnostics=diagnostics)


def uoi_var(series: TimeSeries, d: int, cfg: UoiConfig,
            n_workers: int = 1) -> FitResult:
    """Composite estimator: stack the regression, run the intersection step,
    then the union step; diagnostics cover both stages."""
    reg = build_regression(series, d)
    inter = intersection_step(reg, cfg, series=series, n_workers=n_workers)
    result = union_step(reg, inter.supports, cfg, series=series, n_workers=n_workers)
    result.diagnostics["dropped_replicates_intersection"] = inter.n_dropped
    result.diagnostics["unconverged_lasso_fits"] = inter.n_unconverged
    return result
