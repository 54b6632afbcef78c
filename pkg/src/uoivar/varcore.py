"""VAR(D) processes: parameters, stability, simulation, regression stacking.

A process of dimension M and lag order D is
    X_t = nu + A_1 X_{t-1} + ... + A_D X_{t-D} + eps_t,   eps_t ~ N(0, Sigma).

Fitting works on the stacked multivariate regression Y = U B + E where rows
run in reverse time order (newest observation first) and the coefficient
matrix B = [nu; A_1'; ...; A_D'] has shape (D*M+1, M).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataError, InsufficientDataError, InvalidParamsError, NumericalError

STABILITY_MARGIN = 1e-9  # companion radius < 1 - margin counts as stable
_PSD_TOL = 1e-10

MAGNITUDE_DISTS = ("exp_away_from_zero", "laplace0", "uniform_pm1")


def _as_matrix(x, name: str) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise InvalidParamsError(f"{name} must be a 2-d array, got ndim={a.ndim}")
    return a


@dataclass(frozen=True)
class BlockDiagSpec:
    """Block-diagonal noise covariance: constant diagonal and within-block
    off-diagonal values; blocks of `block_size` (last block may be short)."""

    block_size: int = 4
    diag_value: float = 1.0
    offdiag_value: float = 0.25

    def __post_init__(self):
        if self.block_size < 1:
            raise InvalidParamsError("block_size must be >= 1")
        if self.diag_value <= abs(self.offdiag_value):
            raise InvalidParamsError(
                "diag_value must exceed |offdiag_value| for a positive definite block")

    def build(self, m: int) -> np.ndarray:
        sigma = np.zeros((m, m))
        for start in range(0, m, self.block_size):
            stop = min(start + self.block_size, m)
            sigma[start:stop, start:stop] = self.offdiag_value
        np.fill_diagonal(sigma, self.diag_value)
        return sigma


@dataclass(frozen=True)
class VarParams:
    """Generative parameters (nu, A_1..A_D, Sigma) of a VAR(D) process.

    Sigma must be symmetric positive definite. Stability is deliberately not
    an invariant: unstable parameter sets are constructible for negative
    tests and are rejected only where an operation requires stability.
    """

    nu: np.ndarray
    a: tuple[np.ndarray, ...]
    sigma: np.ndarray

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=np.float64).reshape(-1)
        if nu.size < 1:
            raise InvalidParamsError("process dimension M must be >= 1")
        m = nu.size
        if len(self.a) < 1:
            raise InvalidParamsError("lag order D must be >= 1")
        mats = []
        for d, a_d in enumerate(self.a, start=1):
            a_d = _as_matrix(a_d, f"A_{d}")
            if a_d.shape != (m, m):
                raise InvalidParamsError(
                    f"A_{d} has shape {a_d.shape}, expected ({m}, {m})")
            if not np.all(np.isfinite(a_d)):
                raise InvalidParamsError(f"A_{d} contains non-finite entries")
            mats.append(a_d)
        sigma = _as_matrix(self.sigma, "sigma")
        if sigma.shape != (m, m):
            raise InvalidParamsError(f"sigma has shape {sigma.shape}, expected ({m}, {m})")
        if not np.all(np.isfinite(sigma)):
            raise InvalidParamsError("sigma contains non-finite entries")
        if not np.allclose(sigma, sigma.T, atol=1e-12, rtol=1e-12):
            raise InvalidParamsError("sigma must be symmetric")
        if np.linalg.eigvalsh(sigma).min() <= -_PSD_TOL:
            raise InvalidParamsError("sigma must be positive definite")
        for arr in (nu, sigma, *mats):
            arr.setflags(write=False)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "a", tuple(mats))
        object.__setattr__(self, "sigma", sigma)

    @property
    def m(self) -> int:
        return self.nu.size

    @property
    def d(self) -> int:
        return len(self.a)

    def coefficient_matrix(self) -> np.ndarray:
        """Stacked (D*M+1, M) matrix [nu; A_1'; ...; A_D']."""
        return np.vstack([self.nu[np.newaxis, :]] + [a_d.T for a_d in self.a])


@dataclass(frozen=True)
class TimeSeries:
    """Observed series: row t of `data` is X_t, so T+1 rows hold times 0..T."""

    data: np.ndarray
    columns: tuple[str, ...] | None = None

    def __post_init__(self):
        data = _as_matrix(self.data, "data")
        if not np.all(np.isfinite(data)):
            raise DataError("series contains non-finite entries")
        if self.columns is not None:
            cols = tuple(str(c) for c in self.columns)
            if len(cols) != data.shape[1]:
                raise InvalidParamsError(
                    f"{len(cols)} column labels for {data.shape[1]} columns")
            object.__setattr__(self, "columns", cols)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def m(self) -> int:
        return self.data.shape[1]

    @property
    def t_len(self) -> int:
        """T: the index of the last observation (rows = T+1)."""
        return self.data.shape[0] - 1

    def column_names(self) -> tuple[str, ...]:
        if self.columns is not None:
            return self.columns
        return tuple(f"x{j}" for j in range(self.m))


@dataclass(frozen=True)
class RegressionForm:
    """Stacked regression Y = U B + E.

    Row r pairs the response X_{T-r} with the predictor
    (1, X_{T-r-1}', ..., X_{T-r-D}'): newest first, N = T - D + 1 rows.
    The first column of U is the all-ones intercept column.
    """

    y: np.ndarray
    u: np.ndarray
    d: int
    m: int

    def __post_init__(self):
        y = _as_matrix(self.y, "y")
        u = _as_matrix(self.u, "u")
        if self.d < 1:
            raise InvalidParamsError("lag order d must be >= 1")
        if y.shape[1] != self.m:
            raise InvalidParamsError(f"y has {y.shape[1]} columns, expected m={self.m}")
        if u.shape != (y.shape[0], self.d * self.m + 1):
            raise InvalidParamsError(
                f"u has shape {u.shape}, expected ({y.shape[0]}, {self.d * self.m + 1})")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(u))):
            raise DataError("regression form contains non-finite entries")
        if not np.array_equal(u[:, 0], np.ones(u.shape[0])):
            raise InvalidParamsError("first column of u must be all ones")
        # Fortran layout: the solvers walk columns.
        y = np.asfortranarray(y)
        u = np.asfortranarray(u)
        y.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "u", u)

    @property
    def n_rows(self) -> int:
        return self.y.shape[0]

    @property
    def n_predictors(self) -> int:
        """D*M + 1, the row count of the coefficient matrix."""
        return self.u.shape[1]

    def vec_dim(self) -> int:
        """q = M*(D*M+1): dimension of the column-stacked coefficient vector."""
        return self.m * self.n_predictors

    def take_rows(self, idx: np.ndarray) -> "RegressionForm":
        """New form from a row subset/multiset (bootstrap, CV folds)."""
        return RegressionForm(y=self.y[idx], u=self.u[idx], d=self.d, m=self.m)


@dataclass(frozen=True)
class Support:
    """Set of (row, col) coefficient positions declared nonzero.

    Row 0 is the intercept row; selection never removes intercept entries.
    """

    entries: frozenset[tuple[int, int]]
    n_rows: int
    n_cols: int

    def __post_init__(self):
        entries = frozenset((int(i), int(j)) for i, j in self.entries)
        for i, j in entries:
            if not (0 <= i < self.n_rows and 0 <= j < self.n_cols):
                raise InvalidParamsError(
                    f"support entry {(i, j)} outside ({self.n_rows}, {self.n_cols})")
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, pos) -> bool:
        return tuple(pos) in self.entries

    def penalized(self) -> frozenset[tuple[int, int]]:
        """Entries excluding the intercept row."""
        return frozenset(e for e in self.entries if e[0] != 0)

    def with_intercept(self) -> "Support":
        full = self.entries | {(0, j) for j in range(self.n_cols)}
        return Support(full, self.n_rows, self.n_cols)

    def mask(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols), dtype=bool)
        for i, j in self.entries:
            out[i, j] = True
        return out

    @classmethod
    def from_matrix(cls, b: np.ndarray, include_intercept_row: bool = True) -> "Support":
        """Support of the exact-nonzero pattern of a coefficient matrix."""
        b = np.asarray(b)
        rows, cols = np.nonzero(b)
        entries = {(int(i), int(j)) for i, j in zip(rows, cols)
                   if include_intercept_row or i != 0}
        return cls(frozenset(entries), b.shape[0], b.shape[1])


def companion_matrix(a: tuple[np.ndarray, ...] | list[np.ndarray]) -> np.ndarray:
    """DM x DM first-order companion form [[A_1 .. A_D]; [I 0]]."""
    d = len(a)
    m = a[0].shape[0]
    for d_i, a_d in enumerate(a, start=1):
        if np.asarray(a_d).shape != (m, m):
            raise InvalidParamsError(
                f"A_{d_i} has shape {np.asarray(a_d).shape}, expected ({m}, {m})")
    top = np.hstack([np.asarray(a_d, dtype=np.float64) for a_d in a])
    if d == 1:
        return top
    lower = np.hstack([np.eye(m * (d - 1)), np.zeros((m * (d - 1), m))])
    return np.vstack([top, lower])


def check_stability(params: VarParams) -> tuple[bool, float]:
    """(stable, spectral_radius) from the companion-form eigenvalues.

    Stable means radius < 1 - 1e-9; the margin makes near-unit-root
    classification deterministic in floating point.
    """
    comp = companion_matrix(params.a)
    rho = float(np.max(np.abs(np.linalg.eigvals(comp)))) if comp.size else 0.0
    return rho < 1.0 - STABILITY_MARGIN, rho


def spectral_radius(a: tuple[np.ndarray, ...] | list[np.ndarray]) -> float:
    comp = companion_matrix(a)
    return float(np.max(np.abs(np.linalg.eigvals(comp))))


def stationary_mean(params: VarParams) -> np.ndarray:
    """(I - sum A_d)^{-1} nu; only meaningful for stable parameters."""
    a_sum = np.sum(params.a, axis=0)
    try:
        return np.linalg.solve(np.eye(params.m) - a_sum, params.nu)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"stationary mean is undefined: {exc}") from exc


def default_burn_in(params: VarParams, rho: float | None = None) -> int:
    """10 * D * ceil(1/(1-rho)): long enough to kill the start-value transient."""
    if rho is None:
        rho = check_stability(params)[1]
    return 10 * params.d * math.ceil(1.0 / max(1.0 - rho, 1e-12))


def simulate(params: VarParams, t_len: int, burn_in: int | None = None,
             stream: np.random.Generator | None = None) -> TimeSeries:
    """Draw a realization of length T = t_len (returns t_len+1 rows).

    Innovations are N(0, Sigma) via the Cholesky factor. The recursion starts
    at the stationary mean, and `burn_in` extra steps (default
    10*D*ceil(1/(1-rho))) are discarded before the retained window.
    """
    if stream is None:
        stream = np.random.default_rng()
    if t_len < 0:
        raise InvalidParamsError("t_len must be >= 0")
    stable, rho = check_stability(params)
    if not stable:
        raise InvalidParamsError(
            f"refusing to simulate unstable parameters (spectral radius {rho:.6g})")
    if burn_in is None:
        burn_in = default_burn_in(params, rho)
    if burn_in < 0:
        raise InvalidParamsError("burn_in must be >= 0")
    try:
        chol = np.linalg.cholesky(params.sigma)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"sigma has no Cholesky factor: {exc}") from exc

    m, d = params.m, params.d
    total = burn_in + t_len + 1
    mean = stationary_mean(params)
    # lag buffer rows: X_{t-1}, ..., X_{t-D}, all seeded at the mean
    lags = np.tile(mean, (d, 1))
    out = np.empty((total, m))
    eps = stream.standard_normal((total, m)) @ chol.T
    for t in range(total):
        x = params.nu + eps[t]
        for k in range(d):
            x = x + params.a[k] @ lags[k]
        out[t] = x
        if d > 1:
            lags[1:] = lags[:-1].copy()
        lags[0] = x
    data = out[burn_in:]
    if not np.all(np.isfinite(data)):
        raise NumericalError("simulated series diverged to non-finite values")
    return TimeSeries(data=data)


def build_regression(series: TimeSeries, d: int) -> RegressionForm:
    """Stack the series into Y = U B + E with N = T - d + 1 rows.

    Rows run from time T down to time d; u row r is
    (1, X_{T-r-1}', ..., X_{T-r-d}').
    """
    if d < 1:
        raise InvalidParamsError("lag order d must be >= 1")
    t_len = series.t_len
    if t_len + 1 < d + 1:
        raise InsufficientDataError(
            f"series has {t_len + 1} rows, need at least {d + 1} for lag order {d}")
    x = series.data
    n = t_len - d + 1
    m = series.m
    # response times T, T-1, ..., d  (reverse chronological)
    times = np.arange(t_len, d - 1, -1)
    y = x[times]
    u = np.empty((n, d * m + 1))
    u[:, 0] = 1.0
    for k in range(1, d + 1):
        u[:, 1 + (k - 1) * m: 1 + k * m] = x[times - k]
    return RegressionForm(y=y, u=u, d=d, m=m)


def difference(series: TimeSeries, order: int = 1) -> TimeSeries:
    """Apply the difference operator `order` times; output is shorter by `order`."""
    if order < 1:
        raise InvalidParamsError("difference order must be >= 1")
    if order >= series.t_len + 1:
        raise InsufficientDataError(
            f"cannot difference {series.t_len + 1} rows {order} times")
    data = np.diff(series.data, n=order, axis=0)
    if data.shape[0] < 2:
        raise InsufficientDataError("differencing left fewer than 2 rows")
    return TimeSeries(data=data, columns=series.columns)


def _draw_magnitudes(dist: str, size: int, stream: np.random.Generator) -> np.ndarray:
    if dist == "exp_away_from_zero":
        # |v| with density ~ exp(kappa*|v|) on [0.1, 1.0], kappa = 3, random sign:
        # more mass near 1 than near 0.1, sampled by inverting the CDF.
        kappa, lo, hi = 3.0, 0.1, 1.0
        uu = stream.uniform(size=size)
        mags = np.log(np.exp(kappa * lo) + uu * (np.exp(kappa * hi) - np.exp(kappa * lo))) / kappa
        signs = stream.choice([-1.0, 1.0], size=size)
        return mags * signs
    if dist == "laplace0":
        return stream.laplace(0.0, 1.0, size=size)
    if dist == "uniform_pm1":
        return stream.uniform(-1.0, 1.0, size=size)
    raise InvalidParamsError(
        f"unknown magnitude_dist {dist!r}; choose one of {MAGNITUDE_DISTS}")


def _rescale_to_radius(mats: list[np.ndarray], target_rho: float,
                       tol: float = 1e-6, max_iter: int = 200) -> list[np.ndarray] | None:
    """Common scale factor c such that the companion radius of (c*A_d) hits
    target_rho within tol, found by bracketing + bisection. None if the
    bracket cannot be built (effectively zero draw)."""
    def radius(c: float) -> float:
        return spectral_radius([c * a_d for a_d in mats])

    base = radius(1.0)
    if base <= 0.0 or not np.isfinite(base):
        return None
    # start near the linear guess, then widen until the bracket holds
    hi = target_rho / base
    for _ in range(max_iter):
        if radius(hi) >= target_rho:
            break
        hi *= 2.0
    else:
        return None
    lo = 0.0
    c = hi
    for _ in range(max_iter):
        c = 0.5 * (lo + hi)
        r = radius(c)
        if abs(r - target_rho) <= tol:
            return [c * a_d for a_d in mats]
        if r < target_rho:
            lo = c
        else:
            hi = c
    if abs(radius(c) - target_rho) <= tol:
        return [c * a_d for a_d in mats]
    return None


def random_sparse_var(m: int, d: int, sparsity: float,
                      magnitude_dist: str = "exp_away_from_zero",
                      target_rho: float = 0.7,
                      sigma_spec: BlockDiagSpec | None = None,
                      stream: np.random.Generator | None = None) -> VarParams:
    """Random stable sparse system with ceil((1-sparsity)*d*m^2) nonzeros.

    Nonzero positions are uniform over all lag-matrix slots, magnitudes come
    from `magnitude_dist`, and all transition matrices are rescaled by one
    common factor so the companion spectral radius equals target_rho within
    1e-6. sparsity = 1 yields the all-zero system (target_rho is ignored with
    a warning, since a zero matrix cannot be scaled to a positive radius).
    """
    if stream is None:
        stream = np.random.default_rng()
    if not 0.0 <= sparsity <= 1.0:
        raise InvalidParamsError("sparsity must lie in [0, 1]")
    if sparsity < 1.0 and not 0.0 < target_rho < 1.0:
        raise InvalidParamsError("target_rho must lie in (0, 1)")
    if m < 1 or d < 1:
        raise InvalidParamsError("m and d must be >= 1")
    sigma_spec = sigma_spec or BlockDiagSpec()
    sigma = sigma_spec.build(m)
    nu = np.zeros(m)

    n_slots = d * m * m
    n_nonzero = math.ceil((1.0 - sparsity) * n_slots)
    if n_nonzero == 0:
        warnings.warn("sparsity = 1: returning an all-zero system; target_rho ignored")
        return VarParams(nu=nu, a=tuple(np.zeros((m, m)) for _ in range(d)), sigma=sigma)

    last_exc = None
    for _ in range(10):
        flat = stream.choice(n_slots, size=n_nonzero, replace=False)
        values = _draw_magnitudes(magnitude_dist, n_nonzero, stream)
        mats = [np.zeros((m, m)) for _ in range(d)]
        for pos, val in zip(flat, values):
            lag, rest = divmod(int(pos), m * m)
            i, j = divmod(rest, m)
            mats[lag][i, j] = val
        scaled = _rescale_to_radius(mats, target_rho)
        if scaled is None:
            last_exc = NumericalError("draw could not be rescaled to target_rho")
            continue
        params = VarParams(nu=nu, a=tuple(scaled), sigma=sigma)
        if check_stability(params)[0]:
            return params
        last_exc = NumericalError("rescaled draw not stable")
    raise NumericalError(f"random_sparse_var failed after 10 attempts: {last_exc}")


# ---------------------------------------------------------------------------
# CSV interchange: header row of column names, one row per time step, UTF-8,
# '.' decimal separator. NaN or empty cells are rejected on ingestion.

def write_matrix_csv(path, header: list[str] | tuple[str, ...], data: np.ndarray) -> None:
    data = np.atleast_2d(np.asarray(data, dtype=np.float64))
    if len(header) != data.shape[1]:
        raise InvalidParamsError(f"{len(header)} header names for {data.shape[1]} columns")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in data:
            writer.writerow([repr(float(v)) for v in row])


def read_matrix_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
            parsed = []
            for name, cell in zip(header, row):
                cell = cell.strip()
                if cell == "":
                    raise DataError(f"{path}:{lineno}: empty cell in column {name!r}")
                try:
                    val = float(cell)
                except ValueError:
                    raise DataError(f"{path}:{lineno}: cannot parse {cell!r} "
                                    f"in column {name!r}") from None
                if not np.isfinite(val):
                    raise DataError(f"{path}:{lineno}: non-finite value in column {name!r}")
                parsed.append(val)
            rows.append(parsed)
    if not rows:
        return list(header), np.empty((0, len(header)), dtype=np.float64)
    return list(header), np.asarray(rows, dtype=np.float64)


def save_series_csv(path, series: TimeSeries) -> None:
    write_matrix_csv(path, series.column_names(), series.data)


def load_series_csv(path) -> TimeSeries:
    header, data = read_matrix_csv(path)
    if data.shape[0] == 0:
        raise DataError(f"{path}: no data rows")
    return TimeSeries(data=data, columns=tuple(header))
