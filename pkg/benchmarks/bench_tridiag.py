"""Benchmark the compiled tridiagonal kernel against the SciPy fallback.

Two views: the raw kernel on random well-conditioned complex tridiagonal
systems, and the end-to-end transmission curve of the double-barrier preset
(the kernel sits inside every scattering solve).  Both backends run in the
same process; the end-to-end comparison swaps ``kernels.tridiag_solve``,
which the solver looks up per call.

Usage: python benchmarks/bench_tridiag.py [--repeat N] [--sizes 101,271,801]
"""

import argparse
import time

import numpy as np

from qdev1d import kernels
from qdev1d.experiments import build_preset, transmission_curve
from qdev1d.schrodinger import TbcScheme


def time_kernel(solver, size, repeat):
    rng = np.random.default_rng(size)
    lower = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    upper = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    diag = 4.0 + rng.standard_normal(size) + 1j * rng.standard_normal(size)
    rhs = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    solver(lower, diag, upper, rhs)                      # warm up
    t0 = time.perf_counter()
    for _ in range(repeat):
        solver(lower, diag, upper, rhs)
    return (time.perf_counter() - t0) / repeat


def time_transmission(repeat):
    device = build_preset("rtd_a")
    energies = np.linspace(0.01, 0.6, 64)
    out = {}
    saved = kernels.tridiag_solve
    try:
        for name in kernels.available_backends():
            kernels.tridiag_solve = kernels.solver_for(name)
            transmission_curve(device, energies[:4], TbcScheme.DISCRETE)
            t0 = time.perf_counter()
            for _ in range(repeat):
                transmission_curve(device, energies, TbcScheme.DISCRETE)
            out[name] = (time.perf_counter() - t0) / repeat
    finally:
        kernels.tridiag_solve = saved
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=200,
                        help="repetitions per measurement (default 200)")
    parser.add_argument("--sizes", default="101,271,801,3201",
                        help="comma-separated system sizes")
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    backends = kernels.available_backends()
    print(f"available backends: {', '.join(backends)} "
          f"(active: {kernels.BACKEND})")
    print()
    print(f"{'kernel, n =':>14} " + " ".join(f"{n:>10d}" for n in sizes))
    times = {}
    for name in backends:
        solver = kernels.solver_for(name)
        times[name] = [time_kernel(solver, n, args.repeat) for n in sizes]
        cells = " ".join(f"{t * 1e6:9.1f}u" for t in times[name])
        print(f"{name:>14} {cells}")
    if len(backends) == 2:
        ratio = [p / c for c, p in zip(times["compiled"], times["python"])]
        print(f"{'speedup':>14} " + " ".join(f"{r:9.2f}x" for r in ratio))

    print()
    repeat = max(1, args.repeat // 40)
    e2e = time_transmission(repeat)
    for name, t in e2e.items():
        print(f"transmission curve (64 energies, 270 cells), {name}: "
              f"{t * 1e3:.1f} ms")
    if len(e2e) == 2:
        print(f"end-to-end speedup: {e2e['python'] / e2e['compiled']:.2f}x")


if __name__ == "__main__":
    main()
