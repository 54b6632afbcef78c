"""Penalized and restricted least squares on the stacked VAR regression.

lasso_fit minimizes (1/N)||Y - U B||_F^2 + lambda * ||vec B_penalized||_1 by
cyclic coordinate descent; the problem decouples across the M response
columns. The intercept row is exempt from the penalty unless
penalize_intercept is set.

The per-column inner loop runs in a compiled kernel when the extension built;
otherwise a pure-Python kernel with the same update order is used. Set
UOIVAR_DISABLE_EXTENSION=1 to force the fallback.
"""

from __future__ import annotations

import contextlib
import os
from dataclasses import dataclass

import numpy as np

from . import _cd_python
from .errors import DataError, InvalidParamsError, SingularDesignError
from .varcore import RegressionForm, Support

if os.environ.get("UOIVAR_DISABLE_EXTENSION", "") not in ("", "0"):
    _kernel = _cd_python
else:
    try:
        from . import _cd_kernel as _kernel  # type: ignore[no-redef]
    except ImportError:
        _kernel = _cd_python

KERNEL_BACKEND = _kernel.BACKEND

# Relative pad on the path origin so the fit at values[0] is empty even when
# the kernel's dot products differ from the path construction by an ulp.
_PATH_PAD = 1e-10


def available_backends() -> dict:
    backends = {"python": _cd_python}
    try:
        from . import _cd_kernel
        backends["compiled"] = _cd_kernel
    except ImportError:
        pass
    return backends


@contextlib.contextmanager
def force_backend(name: str):
    """Temporarily run the solvers on a specific kernel ('python'/'compiled')."""
    global _kernel
    backends = available_backends()
    if name not in backends:
        raise InvalidParamsError(f"kernel backend {name!r} not available "
                                 f"(have {sorted(backends)})")
    previous = _kernel
    _kernel = backends[name]
    try:
        yield
    finally:
        _kernel = previous


@dataclass(frozen=True)
class LassoOptions:
    max_iter: int = 10000
    tol: float = 1e-7
    penalize_intercept: bool = False
    warm_start: np.ndarray | None = None
    check_objective: bool = False  # python kernel only: assert descent each sweep

    def __post_init__(self):
        if self.tol <= 0:
            raise InvalidParamsError("tol must be > 0")
        if self.max_iter < 1:
            raise InvalidParamsError("max_iter must be >= 1")


@dataclass(frozen=True)
class LambdaPath:
    """Strictly decreasing positive regularization values."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if values.size < 1:
            raise InvalidParamsError("lambda path must be nonempty")
        if not np.all(np.isfinite(values)) or values[-1] <= 0:
            raise InvalidParamsError("lambda values must be finite and positive")
        if values.size > 1 and not np.all(np.diff(values) < 0):
            raise InvalidParamsError("lambda values must be strictly decreasing")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class LassoFit:
    """Coordinate-descent solution; converged=False means max_iter ran out and
    b holds the best (last) iterate."""

    b: np.ndarray
    converged: bool
    n_sweeps: int

    def penalized_support(self) -> Support:
        return Support.from_matrix(self.b, include_intercept_row=False)


def _penalized_mask(n_predictors: int, penalize_intercept: bool) -> np.ndarray:
    mask = np.ones(n_predictors, dtype=np.uint8)
    if not penalize_intercept:
        mask[0] = 0
    return mask


def lasso_fit(reg: RegressionForm, lam: float, opts: LassoOptions | None = None) -> LassoFit:
    """Solve one LASSO problem; columns of B are independent subproblems.

    Cyclic order is fixed (coordinates 0..DM within response column 0, then
    column 1, ...) so duplicate-column degeneracies resolve deterministically.
    """
    opts = opts or LassoOptions()
    if not np.isfinite(lam) or lam < 0:
        raise InvalidParamsError(f"lambda must be finite and >= 0, got {lam}")
    u, y = reg.u, reg.y
    n, p = u.shape
    col_norms = np.einsum("ij,ij->j", u, u)
    penalized = _penalized_mask(p, opts.penalize_intercept)
    threshold = lam * n / 2.0
    if opts.warm_start is not None:
        b = np.array(opts.warm_start, dtype=np.float64, copy=True)
        if b.shape != (p, reg.m):
            raise InvalidParamsError(
                f"warm_start has shape {b.shape}, expected ({p}, {reg.m})")
    else:
        b = np.zeros((p, reg.m))
    converged = True
    n_sweeps = 0
    for j in range(reg.m):
        col = np.ascontiguousarray(b[:, j])
        sweeps, ok = _kernel.cd_column(
            u, col_norms, y[:, j], col, penalized, threshold,
            opts.max_iter, opts.tol,
            check_objective=opts.check_objective, lam=lam)
        b[:, j] = col
        converged &= ok
        n_sweeps = max(n_sweeps, sweeps)
    return LassoFit(b=b, converged=bool(converged), n_sweeps=n_sweeps)


def lasso_path_fit(reg: RegressionForm, path: LambdaPath,
                   opts: LassoOptions | None = None,
                   warm_start: bool = True) -> list[LassoFit]:
    """Fit the whole path, warm-starting each value from the previous one."""
    opts = opts or LassoOptions()
    fits: list[LassoFit] = []
    warm = opts.warm_start
    for lam in path.values:
        step_opts = LassoOptions(max_iter=opts.max_iter, tol=opts.tol,
                                 penalize_intercept=opts.penalize_intercept,
                                 warm_start=warm,
                                 check_objective=opts.check_objective)
        fit = lasso_fit(reg, float(lam), step_opts)
        fits.append(fit)
        if warm_start:
            warm = fit.b
    return fits


def lambda_path(reg: RegressionForm, k: int, min_ratio: float = 1e-3) -> LambdaPath:
    """Log-spaced path from lambda_max down to lambda_max * min_ratio.

    lambda_max = (2/N) max over penalized coordinates of |u_j' (y_k - mean)|,
    the smallest penalty with an empty penalized support. The whole path is
    padded by a relative 1e-10 so that property holds exactly in floating
    point; spacing ratios are unaffected.
    """
    if k < 2:
        raise InvalidParamsError("path length k must be >= 2")
    if not 0.0 < min_ratio < 1.0:
        raise InvalidParamsError("min_ratio must lie in (0, 1)")
    y_c = reg.y - reg.y.mean(axis=0, keepdims=True)
    corr = np.abs(reg.u[:, 1:].T @ y_c)
    lam_max = 2.0 / reg.n_rows * float(corr.max()) if corr.size else 0.0
    if lam_max <= 0.0:
        raise DataError("response has no variation: lambda path is degenerate")
    values = np.geomspace(lam_max, lam_max * min_ratio, k) * (1.0 + _PATH_PAD)
    return LambdaPath(values=values)


def ols_full(reg: RegressionForm) -> np.ndarray:
    """Unrestricted least squares; raises SingularDesignError when U is rank
    deficient (the error carries a condition-number estimate)."""
    u, y = reg.u, reg.y
    b, _, rank, sv = np.linalg.lstsq(u, y, rcond=None)
    if rank < u.shape[1]:
        cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
        raise SingularDesignError(
            f"design is rank deficient (rank {rank} < {u.shape[1]})",
            condition_number=cond)
    return b


def ols_restricted(reg: RegressionForm, support: Support) -> tuple[np.ndarray, bool]:
    """Per-column least squares on the supported coordinates.

    The intercept coordinate is always included. Entries outside the support
    are exactly zero. Rank-deficient column designs fall back to the
    minimum-norm solution; the second return value reports whether any
    column needed that fallback.
    """
    u, y = reg.u, reg.y
    p, m = reg.n_predictors, reg.m
    if support.n_rows != p or support.n_cols != m:
        raise InvalidParamsError(
            f"support dims ({support.n_rows}, {support.n_cols}) do not match ({p}, {m})")
    b = np.zeros((p, m))
    rank_deficient = False
    by_col: dict[int, list[int]] = {j: [0] for j in range(m)}
    for i, j in support.entries:
        if i != 0:
            by_col[j].append(i)
    for j in range(m):
        cols = sorted(by_col[j])
        sub = u[:, cols]
        coef, _, rank, _ = np.linalg.lstsq(sub, y[:, j], rcond=None)
        if rank < len(cols):
            rank_deficient = True
        b[cols, j] = coef
    return b, rank_deficient


def estimate_sigma(reg: RegressionForm, b: np.ndarray) -> np.ndarray:
    """Residual covariance (Y-UB)'(Y-UB)/(N-1), symmetrized bitwise."""
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (reg.n_predictors, reg.m):
        raise InvalidParamsError(
            f"b has shape {b.shape}, expected ({reg.n_predictors}, {reg.m})")
    resid = reg.y - reg.u @ b
    denom = max(reg.n_rows - 1, 1)
    s = resid.T @ resid / denom
    return (s + s.T) / 2.0


def lasso_objective(reg: RegressionForm, b: np.ndarray, lam: float,
                    penalize_intercept: bool = False) -> float:
    resid = reg.y - reg.u @ b
    penalty = np.abs(b).sum() if penalize_intercept else np.abs(b[1:]).sum()
    return float(resid.ravel() @ resid.ravel()) / reg.n_rows + lam * float(penalty)


def kkt_residual(reg: RegressionForm, b: np.ndarray, lam: float,
                 penalize_intercept: bool = False) -> float:
    """Largest violation of the stationarity conditions at b.

    Zero penalized coordinates require |(2/N) u_j'(y - Ub)| <= lambda; nonzero
    ones require equality with lambda * sign; unpenalized coordinates require
    an exactly orthogonal residual.
    """
    g = 2.0 / reg.n_rows * (reg.u.T @ (reg.y - reg.u @ b))
    penalized = _penalized_mask(reg.n_predictors, penalize_intercept).astype(bool)
    viol = np.abs(g.copy())
    pen_rows = penalized[:, np.newaxis] & np.ones(reg.m, dtype=bool)[np.newaxis, :]
    nonzero = b != 0
    at_zero = pen_rows & ~nonzero
    at_nonzero = pen_rows & nonzero
    viol[at_zero] = np.maximum(np.abs(g[at_zero]) - lam, 0.0)
    viol[at_nonzero] = np.abs(g[at_nonzero] - lam * np.sign(b[at_nonzero]))
    return float(viol.max()) if viol.size else 0.0
