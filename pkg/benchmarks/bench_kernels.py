"""Time the numba and numpy paths of each hot kernel on realistic sizes.

    python benchmarks/bench_kernels.py [--repeat 5] [--kappa 12]

The numba timings exclude the first (compiling) call.
"""

import argparse
import time

import numpy as np

from superradar import kernels
from superradar._accel import HAVE_NUMBA
from superradar.evaluation import _candidates


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(kappa, rng):
    # super-radar cube: 256 range x 16 doppler x 64*kappa angle bins
    cube = rng.standard_normal((256, 16, 64 * kappa)) + 1j * rng.standard_normal((256, 16, 64 * kappa))
    yield "doppler_peak", lambda u: kernels.doppler_peak(cube, use_numba=u)

    dets = rng.uniform(0, 20, (20000, 2))
    gts = rng.uniform(0, 20, (5000, 2))
    ptr, cand = _candidates(dets, gts, 0.25)
    order = np.argsort(-rng.random(len(dets)))
    yield "greedy_match", lambda u: kernels.greedy_match(order, ptr, cand, len(gts), use_numba=u)

    grid = rng.random((256, 64 * kappa))
    fi = rng.uniform(-1, 256, (400, 600))
    fj = rng.uniform(-1, 64 * kappa, (400, 600))
    yield "bilinear", lambda u: kernels.bilinear(grid, fi, fj, use_numba=u)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--kappa", type=int, default=12)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)

    print(f"{'kernel':<14}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, fn in cases(args.kappa, rng):
        t_np = best_of(lambda: fn(False), args.repeat)
        if HAVE_NUMBA:
            fn(True)  # compile
            t_nb = best_of(lambda: fn(True), args.repeat)
            print(f"{name:<14}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>9.1f}x")
        else:
            print(f"{name:<14}{1e3 * t_np:>12.2f}{'n/a':>12}{'':>10}")


if __name__ == "__main__":
    main()
