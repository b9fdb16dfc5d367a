"""Time the numba and NumPy scoring kernels against each other.

    python benchmarks/bench_kernels.py [--rows 200000] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from gridstealth import _kernels


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--dims", default="1,3,6,8,12,29,71")
    args = ap.parse_args()
    if not _kernels.USE_NUMBA:
        print("numba unavailable or disabled; timing numpy only")
    rng = np.random.default_rng(0)
    print(f"{'M':>4} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for m in map(int, args.dims.split(",")):
        y = rng.standard_normal((args.rows, m))
        q = rng.standard_normal((m, m))
        q = q + q.T
        t_np = min(timeit.repeat(lambda: _kernels.block_quad_sums_numpy(y, q, 2),
                                 number=1, repeat=args.repeat))
        if _kernels.USE_NUMBA:
            _kernels.block_quad_sums_numba(y, q, 2)  # compile
            t_nb = min(timeit.repeat(lambda: _kernels.block_quad_sums_numba(y, q, 2),
                                     number=1, repeat=args.repeat))
            print(f"{m:>4} {1e3 * t_np:>10.2f} {1e3 * t_nb:>10.2f} {t_np / t_nb:>8.2f}")
        else:
            print(f"{m:>4} {1e3 * t_np:>10.2f} {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
