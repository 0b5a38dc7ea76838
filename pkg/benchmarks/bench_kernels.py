"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--scale 1.0]

The first numba call (compilation or cache load) is excluded.
"""

import argparse
import timeit

import numpy as np

from commevo.kernels import NUMBA_KERNELS, NUMPY_KERNELS


def cases(scale, rng):
    n = int(20_000 * scale)
    xs = np.sort(rng.integers(0, 500, size=n).astype(np.float64))
    ys = rng.integers(0, 7, size=n).astype(np.int64)
    yield "best_gini_split", (xs, ys, 7, 2), f"n={n}"

    m = int(400 * scale)
    w = rng.integers(0, 4, size=(m, m)).astype(np.float64) * (rng.random((m, m)) < 0.05)
    yield "social_position", (w, 0.85, 1e-8, 100), f"{m}x{m}"

    q, t = int(500 * scale), int(4_000 * scale)
    args = (rng.normal(size=(q, 10)), rng.normal(size=(t, 10)),
            rng.integers(0, 3, size=(q, 2)).astype(np.int64), rng.integers(0, 3, size=(t, 2)).astype(np.int64))
    yield "mixed_distances", args, f"{q}x{t}"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scale", type=float, default=1.0)
    opts = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<18}{'size':>12}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name, args, size in cases(opts.scale, rng):
        fast, slow = NUMBA_KERNELS[name], NUMPY_KERNELS[name]
        fast(*args)
        t_fast = min(timeit.repeat(lambda: fast(*args), number=1, repeat=opts.repeat))
        t_slow = min(timeit.repeat(lambda: slow(*args), number=1, repeat=opts.repeat))
        print(f"{name:<18}{size:>12}{t_fast * 1e3:>12.2f}{t_slow * 1e3:>12.2f}{t_slow / t_fast:>9.1f}x")


if __name__ == "__main__":
    main()
