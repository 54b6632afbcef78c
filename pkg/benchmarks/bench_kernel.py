#!/usr/bin/env python3
"""Benchmark the compiled coordinate-descent kernel against the pure-Python
fallback on a representative workload (bootstrap LASSO paths, the hot loop of
the intersection step).

Usage: python benchmarks/bench_kernel.py [--m 20] [--t-len 200] [--k 20]
                                         [--boots 20] [--quick]
"""

import argparse
import time

import numpy as np

from uoivar import (LassoOptions, build_regression, lambda_path,
                    lasso_path_fit, mbb_plan, mbb_sample, random_sparse_var,
                    simulate)
from uoivar.solvers import available_backends, force_backend


def workload(m, t_len, k, boots, seed=0):
    params = random_sparse_var(m, 1, sparsity=0.95, target_rho=0.7,
                               stream=np.random.default_rng(seed))
    series = simulate(params, t_len, stream=np.random.default_rng(seed + 1))
    reg = build_regression(series, 1)
    path = lambda_path(reg, k)
    plans = [mbb_plan(reg.n_rows, 7, np.random.default_rng(seed + 2 + b))
             for b in range(boots)]
    samples = [mbb_sample(reg, plan) for plan in plans]
    return samples, path


def run(samples, path):
    opts = LassoOptions()
    total_sweeps = 0
    for sample in samples:
        for fit in lasso_path_fit(sample, path, opts):
            total_sweeps += fit.n_sweeps
    return total_sweeps


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--m", type=int, default=20)
    parser.add_argument("--t-len", type=int, default=200, dest="t_len")
    parser.add_argument("--k", type=int, default=20)
    parser.add_argument("--boots", type=int, default=20)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--quick", action="store_true",
                        help="small problem for a fast sanity check")
    args = parser.parse_args()
    if args.quick:
        args.m, args.t_len, args.k, args.boots, args.repeats = 8, 80, 8, 5, 1

    samples, path = workload(args.m, args.t_len, args.k, args.boots)
    backends = available_backends()
    print(f"workload: {args.boots} bootstrap samples x {args.k} path values, "
          f"N = {samples[0].n_rows}, predictors = {samples[0].n_predictors}, "
          f"responses = {samples[0].m}")
    timings = {}
    for name in sorted(backends):
        with force_backend(name):
            run(samples, path)  # warm-up
            best = np.inf
            for _ in range(args.repeats):
                start = time.perf_counter()
                sweeps = run(samples, path)
                best = min(best, time.perf_counter() - start)
        timings[name] = best
        print(f"  {name:9s} {best * 1e3:9.1f} ms   ({sweeps} total sweeps)")
    if {"compiled", "python"} <= set(timings):
        print(f"  speedup   {timings['python'] / timings['compiled']:9.1f}x "
              "(compiled vs python)")
    elif "compiled" not in timings:
        print("  compiled kernel not built; only the fallback was timed")


if __name__ == "__main__":
    main()
