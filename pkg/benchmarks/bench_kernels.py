"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from wvae import _kernels_py as py

try:
    from wvae import _kernels as cy
except ImportError:
    cy = None

CASES = [
    ("haar2d_forward", lambda x: (x,)),
    ("haar2d_inverse", lambda x: tuple(py.haar2d_forward(x))),
    # ssim times the first plane only
    ("ssim_mean", lambda x: (x[0], x[0][::-1].copy(), 8, 1e-4, 9e-4)),
]


def bench(mod, name, args, repeat):
    fn = getattr(mod, name)
    n = max(1, repeat)
    return min(timeit.repeat(lambda: fn(*args), number=n, repeat=5)) / n


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    a = ap.parse_args()
    if cy is None:
        print("compiled backend not built; nothing to compare")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':16s} {'shape':>14s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for shape in [(3, 32, 32), (64, 32, 32), (8, 128, 128), (4, 512, 512)]:
        x = rng.uniform(size=shape)
        for name, make in CASES:
            args = make(x)
            tp = bench(py, name, args, a.repeat)
            tc = bench(cy, name, args, a.repeat)
            print(f"{name:16s} {str(shape):>14s} {tp * 1e3:10.3f} {tc * 1e3:10.3f} {tp / tc:8.2f}")


if __name__ == "__main__":
    main()
