"""Model fit, selection accuracy, one-step forecasting, and causality graphs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, InvalidParamsError
from .varcore import RegressionForm, Support, TimeSeries, VarParams, build_regression


@dataclass(frozen=True)
class SelectionScore:
    """Zero/nonzero classification counts over the D*M^2 penalized positions."""

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def sensitivity(self) -> float:
        pos = self.tp + self.fn
        return self.tp / pos if pos else 1.0

    @property
    def specificity(self) -> float:
        neg = self.tn + self.fp
        return self.tn / neg if neg else 1.0

    @property
    def balanced_accuracy(self) -> float:
        return (self.sensitivity + self.specificity) / 2.0


@dataclass(frozen=True)
class GrangerGraph:
    """Directed graph: edge i -> j when some lag links lagged component i to
    response j with a coefficient above tolerance. Edge weights hold the
    largest absolute coefficient across lags."""

    nodes: tuple[str, ...]
    edges: dict[tuple[int, int], float]

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def in_degree(self) -> np.ndarray:
        deg = np.zeros(self.n_nodes, dtype=np.int64)
        for _, j in self.edges:
            deg[j] += 1
        return deg

    @property
    def out_degree(self) -> np.ndarray:
        deg = np.zeros(self.n_nodes, dtype=np.int64)
        for i, _ in self.edges:
            deg[i] += 1
        return deg

    def edge_rows(self) -> list[tuple[int, int, float]]:
        """(source, target, max_abs_coef) rows, sorted for stable output."""
        return [(i, j, self.edges[(i, j)]) for i, j in sorted(self.edges)]

    def to_dot(self) -> str:
        lines = ["digraph granger {"]
        for idx, name in enumerate(self.nodes):
            lines.append(f'  n{idx} [label="{name}"];')
        for i, j, w in self.edge_rows():
            lines.append(f'  n{i} -> n{j} [weight="{w:.6g}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def r_squared(reg: RegressionForm, b: np.ndarray) -> float:
    """1 - RSS/TSS against the column-mean predictor; negative for fits worse
    than the mean. Errors out when the response is constant."""
    b = np.asarray(b, dtype=np.float64)
    resid = reg.y - reg.u @ b
    centered = reg.y - reg.y.mean(axis=0, keepdims=True)
    ss_tot = float(centered.ravel() @ centered.ravel())
    if ss_tot <= 0.0:
        raise DataError("response is constant: R^2 is undefined")
    ss_res = float(resid.ravel() @ resid.ravel())
    return 1.0 - ss_res / ss_tot


def bic(reg: RegressionForm, b: np.ndarray) -> float:
    from .uoi import fit_metric  # lazy: uoi imports this module
    return fit_metric(b, reg, "bic")


def selection_score(estimated: Support, truth: Support, d: int, m: int) -> SelectionScore:
    """Counts over penalized positions only; intercepts never enter."""
    p = d * m + 1
    for name, s in (("estimated", estimated), ("truth", truth)):
        if s.n_rows != p or s.n_cols != m:
            raise InvalidParamsError(
                f"{name} support dims ({s.n_rows}, {s.n_cols}) do not match ({p}, {m})")
    est = estimated.penalized()
    tru = truth.penalized()
    total = d * m * m
    tp = len(est & tru)
    fp = len(est - tru)
    fn = len(tru - est)
    tn = total - tp - fp - fn
    return SelectionScore(tp=tp, fp=fp, tn=tn, fn=fn)


def forecast_one_step(series: TimeSeries, params_or_b, d: int | None = None) -> TimeSeries:
    """Conditional one-step predictions X^hat_t = nu + sum_d A_d X_{t-d} for
    t = d..T, in chronological order.

    Accepts either VarParams or a stacked (d*M+1, M) coefficient matrix (pass
    d explicitly for the latter when it is ambiguous)."""
    if isinstance(params_or_b, VarParams):
        b = params_or_b.coefficient_matrix()
        d = params_or_b.d
    else:
        b = np.asarray(params_or_b, dtype=np.float64)
        if b.ndim != 2 or b.shape[1] != series.m:
            raise InvalidParamsError(
                f"coefficient matrix shape {b.shape} does not match series with m={series.m}")
        inferred, rem = divmod(b.shape[0] - 1, series.m)
        if rem != 0 or inferred < 1:
            raise InvalidParamsError(
                f"coefficient matrix with {b.shape[0]} rows does not stack lags of m={series.m}")
        if d is None:
            d = inferred
        elif d != inferred:
            raise InvalidParamsError(f"d={d} inconsistent with matrix rows ({inferred} lags)")
    reg = build_regression(series, d)
    preds = (reg.u @ b)[::-1]  # regression rows are newest-first
    return TimeSeries(data=preds, columns=series.columns)


@dataclass(frozen=True)
class ForecastAccuracy:
    overall_rmse: float
    per_component_rmse: np.ndarray
    mean_error: float  # average of raw errors actual - predicted


def rmse_forecast(actual: TimeSeries, predicted: TimeSeries) -> ForecastAccuracy:
    if actual.data.shape != predicted.data.shape:
        raise DataError(
            f"shape mismatch: actual {actual.data.shape} vs predicted {predicted.data.shape}")
    err = actual.data - predicted.data
    per_component = np.sqrt(np.mean(err ** 2, axis=0))
    overall = float(np.sqrt(np.mean(err ** 2)))
    return ForecastAccuracy(overall_rmse=overall,
                            per_component_rmse=per_component,
                            mean_error=float(err.mean()))


def granger_graph(b_hat: np.ndarray, d: int, m: int, tol: float = 0.0,
                  nodes: tuple[str, ...] | None = None) -> GrangerGraph:
    """Edges from the transition part of a stacked coefficient matrix.

    Edge i -> j exists when |coefficient of lagged component i in the
    equation for component j| exceeds tol at any lag. tol=0 keeps exact
    nonzeros, which is the right default here because the union-step average
    of restricted fits preserves structural zeros exactly.
    """
    b_hat = np.asarray(b_hat, dtype=np.float64)
    if b_hat.shape != (d * m + 1, m):
        raise InvalidParamsError(
            f"b_hat has shape {b_hat.shape}, expected ({d * m + 1}, {m})")
    if nodes is None:
        nodes = tuple(f"x{j}" for j in range(m))
    if len(nodes) != m:
        raise InvalidParamsError(f"{len(nodes)} node labels for {m} nodes")
    # lag block dd, row 1 + dd*m + i, column j  <=>  coefficient of X_{t-dd-1,i} on X_{t,j}
    lags = np.abs(b_hat[1:].reshape(d, m, m))
    weight = lags.max(axis=0)  # (i, j) -> max abs coefficient over lags
    edges = {(int(i), int(j)): float(weight[i, j])
             for i, j in zip(*np.nonzero(weight > tol))}
    return GrangerGraph(nodes=tuple(str(n) for n in nodes), edges=edges)


def sparsity_fraction(b_hat: np.ndarray, d: int, m: int) -> float:
    """1 - (nonzero penalized entries)/(d*m^2); intercepts never counted."""
    b_hat = np.asarray(b_hat)
    if b_hat.shape != (d * m + 1, m):
        raise InvalidParamsError(
            f"b_hat has shape {b_hat.shape}, expected ({d * m + 1}, {m})")
    return 1.0 - np.count_nonzero(b_hat[1:]) / (d * m * m)
