"""Compare the compiled conv kernels against the numpy fallback.

Runs conv1d forward and backward on a few shapes with both backends,
checks that they agree numerically, and prints median wall times plus
the compiled/python speed ratio. A ratio below 1.0 means the compiled
core is faster.

Usage: python benchmarks/bench_kernels.py [--trials N]
"""

import argparse
import time

import numpy as np

from mtsc._kernels import fallback

try:
    from mtsc._kernels import _core
except ImportError:
    _core = None

SHAPES = (
    ("small", 8, 4, 8, 64),
    ("medium", 32, 8, 16, 256),
    ("large", 64, 16, 32, 1024),
)


def median_time(fn, args, trials):
    fn(*args)
    times = []
    for _ in range(trials):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def bench(trials):
    rng = np.random.default_rng(0)
    print(f"{'case':<18} {'python':>12} {'cython':>12} {'cy/py':>8}")
    for name, batch, cin, cout, t_len in SHAPES:
        x = rng.normal(size=(batch, cin, t_len))
        w = rng.normal(size=(cout, cin, 3))
        b = rng.normal(size=cout)
        gy = rng.normal(size=(batch, cout, t_len))
        for op, args in (("forward", (x, w, b)), ("backward", (x, w, gy))):
            py_fn = getattr(fallback, f"conv1d_{op}")
            py = median_time(py_fn, args, trials)
            row = f"{name + ' ' + op:<18} {py * 1e6:>10.1f}us"
            if _core is None:
                print(row + "  (compiled core unavailable)")
                continue
            cy_fn = getattr(_core, f"conv1d_{op}")
            ref, got = py_fn(*args), cy_fn(*args)
            if op == "forward":
                ref, got = (ref,), (got,)
            for a, c in zip(ref, got):
                np.testing.assert_allclose(a, c, rtol=1e-10, atol=1e-10)
            cy = median_time(cy_fn, args, trials)
            print(row + f" {cy * 1e6:>10.1f}us {cy / py:>8.2f}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=50)
    args = parser.parse_args()
    if _core is None:
        print("compiled core not built; timing the fallback only")
    bench(args.trials)


if __name__ == "__main__":
    main()
