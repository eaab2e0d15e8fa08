"""Compare the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from fransdcp import _fallback
from fransdcp.stp import _angle_grid, _offset_grid

try:
    from fransdcp import _core
except ImportError:
    _core = None


def cases(rng):
    n = 1_000_000
    gaps = rng.exponential(1 / 200.0, n)
    services = rng.exponential(1 / 1e4, n)
    yield "lindley_sojourns (1e6 tasks)", (gaps, services), {}

    scenes = 1000
    counts = rng.poisson(400, scenes)
    m = int(counts.sum())
    args = (4e6 * rng.random(m), 1e4 * rng.random(m), 2 * np.pi * rng.random(m),
            rng.exponential(1.0, m), counts, 4.0, 0.8)
    yield "scene_interference (1e3 scenes)", args, {}

    un, uw = _offset_grid()
    yn, yw = _angle_grid()
    xs = np.logspace(-3, 3, 200)
    yield "h_kernel_grid (200 points)", (xs, 0.5, 1.0, 4.0, 0.8, un, uw, yn, yw), {}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.default_rng(7)
    names = ["lindley_sojourns", "scene_interference", "h_kernel_grid"]
    print(f"{'kernel':34s} {'numpy (ms)':>11s} {'cython (ms)':>12s} {'speedup':>8s}")
    for name, (label, a, kw) in zip(names, cases(rng)):
        py = min(timeit.repeat(lambda: getattr(_fallback, name)(*a, **kw),
                               number=1, repeat=args.repeat)) * 1e3
        if _core is None:
            print(f"{label:34s} {py:11.2f} {'n/a':>12s} {'':>8s}")
            continue
        cy = min(timeit.repeat(lambda: getattr(_core, name)(*a, **kw),
                               number=1, repeat=args.repeat)) * 1e3
        print(f"{label:34s} {py:11.2f} {cy:12.2f} {py / cy:7.1f}x")


if __name__ == "__main__":
    main()
