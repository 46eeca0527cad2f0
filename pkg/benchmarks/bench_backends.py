"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_backends.py [--nboots 5000] [--rows 36] [--repeat 5]

Both paths are checked for bit-identical output before timing.
"""

import argparse
import time

import numpy as np

from nvfuse import kernels
from nvfuse._accel import HAVE_NUMBA
from nvfuse.bootstrap import draw_indices


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_bootstrap(nboots, rows, repeat):
    rng = np.random.default_rng(0)
    data = rng.normal(100, 20, size=(rows, 2))
    idx = draw_indices(0, nboots, rows)
    kinds = np.array([kernels.NORMAL_QUANTILE, kernels.MEAN, kernels.MEDIAN], dtype=np.int64)
    cols = np.array([0, 1, 1], dtype=np.int64)
    levels = np.array([0.2326, 0.0, 0.5])
    zs = np.array([kernels.ppnd16(0.2326), 0.0, 0.0])
    args = (data, idx, kinds, cols, levels, zs)
    ref = kernels.bootstrap_stats_numpy(*args)
    out = {"numpy": best_of(lambda: kernels.bootstrap_stats_numpy(*args), repeat)}
    if HAVE_NUMBA:
        assert np.array_equal(kernels.bootstrap_stats_numba(*args), ref)
        out["numba"] = best_of(lambda: kernels.bootstrap_stats_numba(*args), repeat)
    return out


def bench_jacobi(dim, repeat):
    rng = np.random.default_rng(1)
    q = rng.normal(size=(dim, dim))
    a = q @ q.T
    ref = kernels.jacobi_eigen_numpy(a, 1e-12, 100)
    out = {"numpy": best_of(lambda: kernels.jacobi_eigen_numpy(a, 1e-12, 100), repeat)}
    if HAVE_NUMBA:
        got = kernels.jacobi_eigen_numba(a, 1e-12, 100)
        assert np.array_equal(got[0], ref[0]) and np.array_equal(got[1], ref[1])
        out["numba"] = best_of(lambda: kernels.jacobi_eigen_numba(a, 1e-12, 100), repeat)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nboots", type=int, default=5000)
    ap.add_argument("--rows", type=int, default=36)
    ap.add_argument("--dim", type=int, default=16)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        print("numba not installed; timing the numpy path only")

    results = [
        (f"bootstrap stats ({args.nboots} x {args.rows} rows, 3 stats)",
         bench_bootstrap(args.nboots, args.rows, args.repeat)),
        (f"jacobi eigen ({args.dim} x {args.dim})", bench_jacobi(args.dim, args.repeat)),
    ]
    for name, t in results:
        line = f"{name:45s} numpy {t['numpy'] * 1e3:9.3f} ms"
        if "numba" in t:
            line += f"   numba {t['numba'] * 1e3:9.3f} ms   speedup {t['numpy'] / t['numba']:6.1f}x"
        print(line)


if __name__ == "__main__":
    main()
