"""Acceptance suite.

Each test enforces one numbered exit criterion at its stated tolerance and
prints a single PASS/FAIL line. Criteria with runtime bounds assert them.
"""

import json
import math
import statistics
import time

import numpy as np

from uoivar import (LambdaPath, LassoOptions, Support, TimeSeries, UoiConfig,
                    VarParams, build_regression, intersection_step, lambda_path,
                    lasso_fit, lasso_path_fit, mbb_plan, mbb_sample,
                    rmse_forecast, save_series_csv, simulate, union_step,
                    uoi_var, forecast_one_step)
from uoivar.cli import main as cli_main
from uoivar.cli import run_benchmark
from uoivar.rng import TAG_INTERSECT, child_stream


def _criterion(num, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {num:2d} {status}: {detail}")
    assert ok, f"criterion {num} failed: {detail}"


# -------------------------------------------------------------------------
# 1. coordinate descent vs proximal-gradient oracle on small instances
# -------------------------------------------------------------------------

def _objective(u, y, b, lam):
    """Test-local objective; intercept coordinate unpenalized."""
    resid = y - u @ b
    return float(resid.ravel() @ resid.ravel()) / u.shape[0] + \
        lam * float(np.abs(b[1:]).sum())


def _kkt(u, y, b, lam):
    n = u.shape[0]
    g = 2.0 / n * (u.T @ (y - u @ b))
    viol = np.abs(g[:1]).max()  # intercept: exact orthogonality
    pen_g, pen_b = g[1:], b[1:]
    at_zero = pen_b == 0
    viol = max(viol, float(np.maximum(np.abs(pen_g[at_zero]) - lam, 0.0).max(initial=0.0)))
    nz = ~at_zero
    if nz.any():
        viol = max(viol, float(np.abs(pen_g[nz] - lam * np.sign(pen_b[nz])).max()))
    return viol


def _fista_lasso(u, y, lam, tol=1e-12, max_iter=200000):
    """Accelerated proximal gradient on the same objective, one column."""
    n, p = u.shape
    g_mat = u.T @ u
    c = u.T @ y
    lip = 2.0 / n * float(np.linalg.eigvalsh(g_mat).max())
    step = 1.0 / lip
    b = np.zeros(p)
    z = b.copy()
    t_acc = 1.0
    for _ in range(max_iter):
        grad = 2.0 / n * (g_mat @ z - c)
        v = z - step * grad
        b_new = v.copy()
        b_new[1:] = np.sign(v[1:]) * np.maximum(np.abs(v[1:]) - step * lam, 0.0)
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_acc * t_acc))
        z = b_new + (t_acc - 1.0) / t_new * (b_new - b)
        delta = np.abs(b_new - b).max()
        b, t_acc = b_new, t_new
        if delta < tol:
            break
    return b


def test_criterion_01_lasso_oracle_equivalence():
    rng = np.random.default_rng(101)
    shapes = [(1, d) for d in range(1, 6)] + [(2, 1)]  # q = m(dm+1) <= 6
    start = time.perf_counter()
    worst_gap, worst_kkt = -np.inf, -np.inf
    for i in range(200):
        m, d = shapes[int(rng.integers(len(shapes)))]
        p = d * m + 1
        n = int(rng.integers(8, 13))
        u = np.hstack([np.ones((n, 1)), rng.standard_normal((n, p - 1))])
        b0 = rng.standard_normal((p, m)) * (rng.random((p, m)) < 0.5)
        y = u @ b0 + 0.5 * rng.standard_normal((n, m))
        from conftest import raw_form
        reg = raw_form(y=y, u=u, m=m)
        path = lambda_path(reg, 5)
        for lam in path.values:
            fit = lasso_fit(reg, float(lam), LassoOptions(tol=1e-12, max_iter=100000))
            for j in range(m):
                cd_obj = _objective(u, y[:, [j]], fit.b[:, [j]], float(lam))
                oracle_b = _fista_lasso(u, y[:, j], float(lam))
                oracle_obj = _objective(u, y[:, [j]], oracle_b[:, None], float(lam))
                gap = cd_obj - oracle_obj
                kkt = _kkt(u, y[:, [j]], fit.b[:, [j]], float(lam))
                worst_gap = max(worst_gap, gap)
                worst_kkt = max(worst_kkt, kkt)
    elapsed = time.perf_counter() - start
    ok = worst_gap <= 1e-7 and worst_kkt <= 1e-6 and elapsed < 10.0
    _criterion(1, ok, f"200 instances x 5 path points: max objective gap "
                      f"{worst_gap:.3g} (<=1e-7), max KKT residual {worst_kkt:.3g} "
                      f"(<=1e-6), {elapsed:.1f}s (<10s)")


# -------------------------------------------------------------------------
# 2. orthonormal-design soft-threshold closed form
# -------------------------------------------------------------------------

def test_criterion_02_orthonormal_closed_form():
    worst = 0.0
    for seed in range(50):
        rng = np.random.default_rng(200 + seed)
        m = int(rng.integers(1, 4))
        d = int(rng.integers(1, 3))
        p_lag = d * m
        n = int(rng.integers(p_lag + 10, p_lag + 60))
        raw = rng.standard_normal((n, p_lag))
        raw -= raw.mean(axis=0, keepdims=True)
        q_mat, _ = np.linalg.qr(raw)
        u = np.hstack([np.ones((n, 1)), math.sqrt(n) * q_mat])
        y = rng.standard_normal((n, m))
        from conftest import raw_form
        reg = raw_form(y=y, u=u, m=m)
        ols = u.T @ y / n
        lam = float(rng.uniform(0.05, 1.5) * np.abs(ols[1:]).max() * 2.0)
        fit = lasso_fit(reg, lam, LassoOptions(tol=1e-13))
        expected = np.vstack([
            ols[:1],
            np.sign(ols[1:]) * np.maximum(np.abs(ols[1:]) - lam / 2.0, 0.0),
        ])
        worst = max(worst, float(np.abs(fit.b - expected).max()))
    ok = worst <= 1e-8
    _criterion(2, ok, f"50 instances: max |cd - soft_threshold| = {worst:.3g} (<=1e-8)")


# -------------------------------------------------------------------------
# 3. strict-intersection oracle at s = 1
# -------------------------------------------------------------------------

def test_criterion_03_strict_intersection_oracle():
    all_equal = True
    for run in range(20):
        data_stream = np.random.default_rng(300 + run)
        data = data_stream.standard_normal((81, 4))
        data[1:] += 0.5 * data[:-1]  # inject temporal dependence
        series = TimeSeries(data=data)
        reg = build_regression(series, 1)
        cfg = UoiConfig(lambdas=lambda_path(reg, 6), b1=6, b2=1,
                        block_len=10, threshold=1.0, seed=300 + run)
        result = intersection_step(reg, cfg)
        # independent oracle: rebuild each replicate from the derived stream
        # and intersect the penalized supports directly
        oracle = None
        for b_idx in range(cfg.b1):
            stream = child_stream(cfg.seed, TAG_INTERSECT, b_idx)
            sample = mbb_sample(reg, mbb_plan(reg.n_rows, cfg.block_len, stream))
            fits = lasso_path_fit(sample, cfg.lambdas, cfg.lasso_options)
            supports = [f.penalized_support().entries for f in fits]
            oracle = supports if oracle is None else [
                a & b for a, b in zip(oracle, supports)]
        intercepts = {(0, j) for j in range(reg.m)}
        for k in range(cfg.k):
            if result.supports[k].entries != (oracle[k] | intercepts):
                all_equal = False
    _criterion(3, all_equal, "20 seeded runs: thresholded output at s=1 equals "
                             "direct strict intersection (exact set equality)")


# -------------------------------------------------------------------------
# 4. no false positives at the top of the path on strong-signal systems
# -------------------------------------------------------------------------

def _strong_signal_params(seed, m=10):
    """Signed permutation support: magnitudes in [0.5, 0.7] with one cycle
    pinned at 0.7, so the spectral radius is exactly 0.7 and every nonzero
    entry is at least 0.5 in magnitude."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(m)
    mags = rng.uniform(0.5, 0.7, size=m)
    seen = np.zeros(m, dtype=bool)
    first_cycle = True
    for start in range(m):
        if seen[start]:
            continue
        node = start
        cycle = []
        while not seen[node]:
            seen[node] = True
            cycle.append(node)
            node = int(perm[node])
        if first_cycle:
            for idx in cycle:
                mags[idx] = 0.7
            first_cycle = False
    signs = rng.choice([-1.0, 1.0], size=m)
    a = np.zeros((m, m))
    for i in range(m):
        a[perm[i], i] = signs[i] * mags[i]
    return VarParams(nu=np.zeros(m), a=(a,), sigma=np.eye(m))


def test_criterion_04_no_false_positives_top_of_path():
    start = time.perf_counter()
    clean_runs = 0
    n_runs = 100
    for run in range(n_runs):
        params = _strong_signal_params(400 + run)
        assert abs(np.max(np.abs(np.linalg.eigvals(params.a[0]))) - 0.7) < 1e-9
        series = simulate(params, 400, stream=child_stream(400 + run, 1, 0))
        reg = build_regression(series, 1)
        cfg = UoiConfig(lambdas=lambda_path(reg, 20), b1=20, b2=1,
                        block_len=50, threshold=1.0, seed=400 + run)
        supports = intersection_step(reg, cfg).supports
        truth = {(1 + i, j) for j in range(10) for i in range(10)
                 if params.a[0][j, i] != 0.0}
        nonempty = [s.penalized() for s in supports if s.penalized()]
        top_three = nonempty[:3]
        if top_three and all(len(s - truth) == 0 for s in top_three):
            clean_runs += 1
    elapsed = time.perf_counter() - start
    ok = clean_runs >= 95 and elapsed < 300.0
    _criterion(4, ok, f"{clean_runs}/100 runs with zero false positives in the "
                      f"largest three nonempty supports (>=95), {elapsed:.0f}s (<300s)")


# -------------------------------------------------------------------------
# 5. desk-scale qualitative comparison against cross-validated LASSO
# -------------------------------------------------------------------------

def test_criterion_05_desk_scale_benchmark():
    cfg = dict(m=20, d=1, t_len=200, sparsity=0.95,
               magnitude_dist="exp_away_from_zero", target_rho=0.7,
               sigma_block_size=4, sigma_diag=1.0, sigma_offdiag=0.25,
               reps=20, burn_in=None, folds=5, seed=20260810,
               lambda_count=20, lambda_min_ratio=1e-3, b1=20, b2=30,
               block_len=7, threshold=1.0, fit_metric="bic",
               raw_series_bootstrap=False, max_iter=10000, tol=1e-7)
    start = time.perf_counter()
    bench = run_benchmark(cfg, workers=1)
    elapsed = time.perf_counter() - start

    rows = bench["per_realization"]
    med = {}
    for method in ("uoi", "lasso_cv"):
        sub = [r for r in rows if r["method"] == method]
        med[method] = {
            "ba": statistics.median(r["balanced_accuracy"] for r in sub),
            "fp": statistics.median(r["fp"] for r in sub),
        }
    bias = {b["method"]: b["mean_abs_bias"] for b in bench["bias"]}
    cond_a = med["uoi"]["ba"] >= med["lasso_cv"]["ba"]
    cond_b = med["uoi"]["fp"] <= 0.5 * med["lasso_cv"]["fp"]
    cond_c = bias["uoi"] <= bias["lasso_cv"]
    ok = cond_a and cond_b and cond_c and elapsed < 1200.0
    _criterion(5, ok,
               f"(a) median bal.acc {med['uoi']['ba']:.4f} vs {med['lasso_cv']['ba']:.4f}; "
               f"(b) median FP {med['uoi']['fp']} vs 0.5*{med['lasso_cv']['fp']}; "
               f"(c) pooled |bias| {bias['uoi']:.4f} vs {bias['lasso_cv']:.4f}; "
               f"{elapsed:.0f}s (<1200s)")


# -------------------------------------------------------------------------
# 6. null-model sparsity. Known to fail, and believed unattainable for this
#    estimator at this scale: the strongest spurious cross-correlation of a
#    fixed white-noise realization with 100 candidate coefficients and
#    T = 300 carries z^2 ~ 2*log(100) > log(300), so BIC genuinely prefers
#    it on the observed data, and because it is a property of the data (not
#    of a bootstrap draw) it survives the strict intersection once the path
#    descends below ~0.6*lambda_max. Asserted as stated, honestly red.
# -------------------------------------------------------------------------

def test_criterion_06_null_model_sparsity():
    empty = 0
    n_runs = 100
    for run in range(n_runs):
        rng = child_stream(600 + run, 2, 0)
        series = TimeSeries(data=rng.standard_normal((301, 10)))
        reg = build_regression(series, 1)
        cfg = UoiConfig(lambdas=lambda_path(reg, 10, min_ratio=0.1), b1=20,
                        b2=10, block_len=10, threshold=1.0, fit_metric="bic",
                        seed=600 + run)
        result = uoi_var(series, 1, cfg)
        if len(result.penalized_support()) == 0:
            empty += 1
    ok = empty >= 90
    _criterion(6, ok, f"{empty}/100 white-noise runs with empty penalized "
                      f"support (>=90 required)")


# -------------------------------------------------------------------------
# 7. determinism under parallelism (1 vs 8 worker threads, byte-identical)
# -------------------------------------------------------------------------

def _stripped_fit_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    doc.pop("elapsed_seconds", None)
    return json.dumps(doc, sort_keys=True).encode("utf-8")


def test_criterion_07_determinism_under_parallelism(tmp_path):
    params = _strong_signal_params(700, m=5)
    series = simulate(params, 120, stream=np.random.default_rng(701))
    data = tmp_path / "series.csv"
    save_series_csv(data, series)
    identical = True
    for rep in range(10):
        outs = {}
        for workers in (1, 8):
            prefix = tmp_path / f"fit_r{rep}_w{workers}"
            code = cli_main(["fit", "--input", str(data), "--seed", str(1000 + rep),
                             "--b1", "8", "--b2", "8", "--block-len", "12",
                             "--lambda-count", "8", "--workers", str(workers),
                             "--out-prefix", str(prefix)])
            assert code == 0
            outs[workers] = _stripped_fit_json(f"{prefix}.json")
        if outs[1] != outs[8]:
            identical = False
    _criterion(7, identical, "10 repetitions: fit JSON byte-identical at 1 vs 8 "
                             "worker threads (timing field excluded)")


# -------------------------------------------------------------------------
# 8. sparsity arithmetic: 44 nonzeros at M = 50, D = 1 -> 0.9824
# -------------------------------------------------------------------------

def test_criterion_08_sparsity_arithmetic():
    m = 50
    rng = np.random.default_rng(800)
    series = TimeSeries(data=rng.standard_normal((101, m)))
    reg = build_regression(series, 1)
    flat = rng.choice(m * m, size=44, replace=False)
    entries = {(1 + int(pos) // m, int(pos) % m) for pos in flat}
    support = Support(frozenset(entries), m + 1, m)
    cfg = UoiConfig(lambdas=LambdaPath(values=np.array([0.5])), b1=1, b2=1,
                    block_len=20, seed=801)
    result = union_step(reg, [support], cfg)
    nnz = int(np.count_nonzero(result.b_hat[1:]))
    frac = result.diagnostics["sparsity_fraction"]
    ok = nnz == 44 and abs(frac - 0.9824) <= 1e-6
    _criterion(8, ok, f"fit has {nnz} nonzero penalized entries; "
                      f"sparsity_fraction = {frac:.6f} (0.9824 +/- 1e-6)")


# -------------------------------------------------------------------------
# 9. support anti-monotonicity in s and in B1 (exact set inclusion)
# -------------------------------------------------------------------------

def test_criterion_09_monotonicity_suite():
    holds = True
    rng = np.random.default_rng(900)
    for case in range(50):
        m = int(rng.integers(2, 5))
        t_len = int(rng.integers(40, 81))
        data = np.random.default_rng(9000 + case).standard_normal((t_len + 1, m))
        data[1:] += 0.4 * data[:-1]
        series = TimeSeries(data=data)
        reg = build_regression(series, 1)
        k = int(rng.integers(3, 7))
        ell = int(rng.integers(5, 13))
        b1 = int(rng.integers(2, 6))
        s_lo, s_hi = sorted(rng.choice([0.3, 0.5, 0.75, 1.0], size=2, replace=False))
        seed = 9500 + case
        path = lambda_path(reg, k)

        def supports(b1_val, s_val):
            cfg = UoiConfig(lambdas=path, b1=b1_val, b2=1, block_len=ell,
                            threshold=s_val, seed=seed)
            return intersection_step(reg, cfg).supports

        for lo, hi in zip(supports(b1, s_lo), supports(b1, s_hi)):
            if not hi.entries <= lo.entries:  # larger s never adds entries
                holds = False
        for small, large in zip(supports(b1, 1.0), supports(b1 + 1, 1.0)):
            if not large.entries <= small.entries:  # extra replicate shrinks
                holds = False
    _criterion(9, holds, "50 randomized cases: S_k(s') subset of S_k(s) for "
                         "s' >= s, and S_k(B1+1) subset of S_k(B1) at s = 1")


# -------------------------------------------------------------------------
# 10. forecast correctness (noiseless simulation + exact two-point oracle)
# -------------------------------------------------------------------------

def test_criterion_10_forecast_correctness():
    params = _strong_signal_params(1000, m=4)
    noiseless = VarParams(nu=params.nu, a=params.a, sigma=1e-28 * np.eye(4))
    series = simulate(noiseless, 200, stream=np.random.default_rng(1001))
    predicted = forecast_one_step(series, params)
    actual = TimeSeries(data=series.data[1:])
    acc = rmse_forecast(actual, predicted)

    two_point = rmse_forecast(
        TimeSeries(data=np.array([[1.0], [4.0]])),
        TimeSeries(data=np.array([[0.0], [1.0]])))
    oracle_exact = (two_point.overall_rmse == math.sqrt(5.0)
                    and two_point.mean_error == 2.0)
    ok = acc.overall_rmse < 1e-10 and oracle_exact
    _criterion(10, ok, f"noiseless one-step RMSE {acc.overall_rmse:.3g} (<1e-10); "
                       f"two-point oracle sqrt(5) matched exactly: {oracle_exact}")
