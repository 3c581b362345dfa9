#!/usr/bin/env python3
"""Compare the numpy and numba kernel backends on the numeric hot paths.

The two workloads mirror what the refinement integrator actually does:
evaluating a compiled function program over a large grid, and the fused
per-cell min/max reduction behind the sampled lower/upper sums. Select a
single backend with HYPERCALC_KERNEL=numpy|numba; this script times both.

Usage: python benchmarks/bench_kernels.py [--cells N] [--repeats K]
"""

import argparse
import os
import statistics
import time

import numpy as np

from hypercalc import kernels
from hypercalc.expressions import Add, Call, Const, Div, Mul, Neg, Pow, Var
from fractions import Fraction

X = Var("x")

WORKLOADS = [
    ("sin(x)", Call("sin", X)),
    (
        "3x^3 + 1/(x^2+1)",
        Add(
            Mul(Const(Fraction(3)), Pow(X, 3)),
            Div(Const(Fraction(1)), Add(Pow(X, 2), Const(Fraction(1)))),
        ),
    ),
    ("exp(-x^2)*cos(x)", Mul(Call("exp", Neg(Pow(X, 2))), Call("cos", X))),
]


def time_once(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times), statistics.median(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cells", type=int, default=1_000_000)
    ap.add_argument("--samples", type=int, default=8)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    grid = np.linspace(0.0, 4.0, args.cells + 1)
    backends = ["numpy"]
    try:
        import numba  # noqa: F401

        backends.append("numba")
    except ImportError:
        print("numba unavailable: benchmarking the numpy fallback only")

    print(
        f"cells={args.cells} samples/cell={args.samples} repeats={args.repeats}"
    )
    header = f"{'workload':<22} {'op':<12}" + "".join(
        f"{be + ' (best)':>16}" for be in backends
    )
    print(header)
    print("-" * len(header))
    for label, expr in WORKLOADS:
        prog = kernels.compile_program(expr)
        rows = {"grid_eval": {}, "cell_min_max": {}}
        reference = {}
        for be in backends:
            os.environ["HYPERCALC_KERNEL"] = be
            try:
                kernels.grid_eval(prog, grid[:8])  # warm any jit cache
                best, _ = time_once(lambda: kernels.grid_eval(prog, grid), args.repeats)
                rows["grid_eval"][be] = best
                best, _ = time_once(
                    lambda: kernels.cell_min_max(
                        prog, 0.0, 4.0 / args.cells, args.cells, args.samples
                    ),
                    args.repeats,
                )
                rows["cell_min_max"][be] = best
                reference[be] = kernels.grid_eval(prog, grid[:1000])
            finally:
                os.environ.pop("HYPERCALC_KERNEL", None)
        if len(backends) == 2:
            agree = np.allclose(reference["numpy"], reference["numba"], rtol=1e-12)
            assert agree, f"backends disagree on {label}"
        for op, data in rows.items():
            cells = f"{label:<22} {op:<12}"
            print(cells + "".join(f"{data[be]*1000:>13.1f} ms" for be in backends))
    print("backends agree within 1e-12 relative on shared reference grids")


if __name__ == "__main__":
    main()
