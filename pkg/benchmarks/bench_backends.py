"""Benchmark the numba-jitted solver kernels against the pure-numpy fallback.

Toggles PROTOQUBO_BACKEND around each call, verifies that both backends agree
on the returned solutions, and prints per-kernel timings with speedups.

    python3 benchmarks/bench_backends.py [--quick]
"""

import argparse
import math
import os
import time

import numpy as np

from protoqubo import accel


def timed(fn, *args, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return result, best


def with_backend(name, fn, *args, repeats=3):
    old = os.environ.get(accel.ENV_VAR)
    os.environ[accel.ENV_VAR] = name
    try:
        return timed(fn, *args, repeats=repeats)
    finally:
        if old is None:
            del os.environ[accel.ENV_VAR]
        else:
            os.environ[accel.ENV_VAR] = old


def bench_case(label, fn, args, check_equal):
    # compile outside the timed region
    with_backend("numba", fn, *args, repeats=1)
    res_nb, t_nb = with_backend("numba", fn, *args)
    res_np, t_np = with_backend("numpy", fn, *args)
    agree = check_equal(res_nb, res_np)
    print(f"{label:<38} numba {t_nb * 1e3:9.2f} ms   numpy {t_np * 1e3:9.2f} ms   "
          f"speedup {t_np / t_nb:7.1f}x   agree={agree}")
    return agree


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller problem sizes")
    opts = parser.parse_args()

    rng = np.random.default_rng(0)
    n_ex = 16 if opts.quick else 22
    n_comb, k_comb = (24, 4) if opts.quick else (40, 5)
    n_sa, sweeps = (24, 400) if opts.quick else (48, 1500)

    print(f"exhaustive: n={n_ex} ({1 << n_ex} states); "
          f"subsets: n={n_comb}, k={k_comb}; sa: n={n_sa}, sweeps={sweeps}")

    a = rng.normal(size=(n_ex, n_ex))
    Q = (a + a.T) / 2.0
    ok = bench_case(
        f"exhaustive scan (2^{n_ex} states)",
        accel.exhaustive_best, (Q,),
        lambda r1, r2: bool(np.array_equal(r1[0], r2[0])),
    )

    a = rng.normal(size=(n_comb, n_comb))
    A = (a + a.T) / 2.0
    b = rng.normal(size=n_comb)
    ok &= bench_case(
        f"k-subset scan (C({n_comb},{k_comb})={math.comb(n_comb, k_comb)})",
        accel.constrained_best, (A, b, k_comb),
        lambda r1, r2: bool(np.array_equal(r1[0], r2[0])),
    )

    a = rng.normal(size=(n_sa, n_sa))
    Qs = (a + a.T) / 2.0
    chain = np.random.default_rng(1)
    z0 = chain.integers(0, 2, size=n_sa).astype(np.int8)
    flips = chain.integers(0, n_sa, size=sweeps * n_sa)
    us = chain.random(sweeps * n_sa)
    temps = np.geomspace(10.0, 1e-3, sweeps)
    ok &= bench_case(
        f"sa sweeps ({sweeps} sweeps x {n_sa} flips)",
        accel.sa_run, (Qs, z0, flips, us, temps),
        lambda r1, r2: bool(np.array_equal(r1[0], r2[0]) and r1[1] == r2[1]),
    )

    if not ok:
        raise SystemExit("backend results disagree")


if __name__ == "__main__":
    main()
