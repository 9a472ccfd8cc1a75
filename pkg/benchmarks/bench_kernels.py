"""Time the numba kernels against the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--N 4000] [--repeat 5]

Both kernel sets are always importable, so one process measures both; the
first numba call (compilation) is excluded.
"""

import argparse
import time

import numpy as np

from hardybounds._kernels import NUMBA_KERNELS, NUMPY_KERNELS


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def cases(N, rng):
    u = rng.uniform(0.1, 1.0, N)
    v = rng.uniform(0.1, 1.0, N)
    x = rng.uniform(0.1, 1.0, N)
    x /= x.sum()
    vhat = 1.0 / v
    hx = np.cumsum(x)
    p, q = 2.0, 3.0
    ps = p / (p - 1.0)
    return {
        "cumsum": lambda ks: ks.cumsum(x),
        "profiles": lambda ks: ks.profiles(x, hx, u, vhat, q / ps, ps / q),
        "log_quotient": lambda ks: ks.log_quotient(x, u, v, p, q),
        "stationary_map": lambda ks: ks.stationary_map(x, u, vhat, ps, q),
        "fixed_point(200 it)": lambda ks: ks.fixed_point(x, u, v, vhat, p, q, 200, 0.0),
        "power_iteration(200 it)": lambda ks: ks.power_iteration(np.sqrt(v) * x, u, v, 200, 0.0),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=4000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"N = {args.N}, best of {args.repeat}")
    print(f"{'kernel':<26}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, fn in cases(args.N, rng).items():
        fn(NUMBA_KERNELS)  # compile
        t_nb = _best(lambda: fn(NUMBA_KERNELS), args.repeat)
        t_np = _best(lambda: fn(NUMPY_KERNELS), args.repeat)
        print(f"{name:<26}{1e3 * t_nb:>12.3f}{1e3 * t_np:>12.3f}{t_np / t_nb:>10.1f}")


if __name__ == "__main__":
    main()
