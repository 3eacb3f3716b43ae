"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--sizes 500,1000,2000] [--repeat 5]

For every size the script checks that both backends return identical
arrays, then prints the best-of-``repeat`` wall time of each and the
speed-up. A full ``fit`` is timed with each backend as well.
"""
import argparse
import time

import numpy as np

from balanced_da import _pykernels
from balanced_da.bda import fit
from balanced_da.core import AdaptConfig
from balanced_da.data_io import generate_shift, synthetic_task
from balanced_da.mmd import class_coefficients, marginal_coefficients

try:
    from balanced_da import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_cases(N, D, C, rng):
    Q = rng.standard_normal((N, D))
    R = rng.standard_normal((N, D))
    n = N // 2
    domain = np.r_[np.zeros(n, np.int8), np.ones(N - n, np.int8)]
    cls = rng.integers(-1, C, size=N).astype(np.int64)
    m0 = marginal_coefficients(n, N - n)
    table = np.stack([class_coefficients(40, 35) for _ in range(C)])
    return {
        "sq_distances": lambda k: k.sq_distances(Q, R),
        "nearest_index": lambda k: k.nearest_index(Q, R),
        "mmd_combined": lambda k: k.mmd_combined(domain, cls, m0, table, 0.3),
    }


def run_fit(module_kernels, src, tgt, truth):
    # swap the active backend for the duration of one fit
    from balanced_da import _backend
    saved = _backend.kernels
    _backend.kernels = module_kernels
    try:
        return fit(src, tgt, AdaptConfig(dim=4), truth)
    finally:
        _backend.kernels = saved


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="500,1000,2000")
    ap.add_argument("--features", type=int, default=64)
    ap.add_argument("--classes", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if _ckernels is None:
        print("compiled extension not available; nothing to compare")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':15s} {'N':>6s} {'numpy [s]':>11s} {'cython [s]':>11s} {'speed-up':>9s}")
    for N in (int(s) for s in args.sizes.split(",")):
        for name, call in kernel_cases(N, args.features, args.classes, rng).items():
            a, b = call(_pykernels), call(_ckernels)
            if not np.array_equal(a, b):
                raise SystemExit(f"{name} N={N}: backends disagree")
            tp = best_time(lambda: call(_pykernels), args.repeat)
            tc = best_time(lambda: call(_ckernels), args.repeat)
            print(f"{name:15s} {N:6d} {tp:11.4f} {tc:11.4f} {tp / tc:8.1f}x")

    src, tgt, truth = generate_shift(synthetic_task("shift", 7, per_class=400))
    tp = best_time(lambda: run_fit(_pykernels, src, tgt, truth), args.repeat)
    tc = best_time(lambda: run_fit(_ckernels, src, tgt, truth), args.repeat)
    same = run_fit(_pykernels, src, tgt, truth).report.to_json() == \
        run_fit(_ckernels, src, tgt, truth).report.to_json()
    print(f"{'fit (N=1600)':15s} {'':6s} {tp:11.4f} {tc:11.4f} {tp / tc:8.1f}x  identical reports: {same}")


if __name__ == "__main__":
    main()
