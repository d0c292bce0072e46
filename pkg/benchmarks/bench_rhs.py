"""Time the flow right-hand side with the compiled and the numpy kernels.

Usage: python benchmarks/bench_rhs.py [--sizes 32 64 128] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from willmore_graphs import Grid, FlowProblem, NeumannHomogeneous, QuadraticForm
from willmore_graphs.spatial import rhs


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[32, 64, 128])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    energy = QuadraticForm([[8.0, 0.0], [0.0, 1.0]])
    print(f"{'n':>5} {'python [ms]':>12} {'cython [ms]':>12} {'speedup':>8} {'max diff':>10}")
    for n in args.sizes:
        g = Grid.from_bounds(-1, 1, -1, 1, n, n)
        X, Y = g.meshgrid()
        u = np.sin(3 * np.pi * np.hypot(X, Y))
        times, outs = {}, {}
        for name in ("python", "cython"):
            try:
                pb = FlowProblem(g, energy, NeumannHomogeneous(), backend=name)
            except ImportError:
                continue
            outs[name] = rhs(pb, u, 0.0)
            number = max(1, 2000 // n)
            best = min(timeit.repeat(lambda: rhs(pb, u, 0.0), number=number, repeat=args.repeat))
            times[name] = 1e3 * best / number
        py = times["python"]
        if "cython" in times:
            cy = times["cython"]
            diff = float(np.abs(outs["python"] - outs["cython"]).max())
            print(f"{n:5d} {py:12.3f} {cy:12.3f} {py / cy:8.2f} {diff:10.2e}")
        else:
            print(f"{n:5d} {py:12.3f} {'n/a':>12} {'-':>8} {'-':>10}")


if __name__ == "__main__":
    main()
