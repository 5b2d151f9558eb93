"""Compare the numba and numpy stepper backends.

    python benchmarks/bench_kernels.py --n 1601 4001 --steps 2000
"""
import argparse
import time

import numpy as np

from pasfhn.model import ModelParams, equilibrium_for
from pasfhn.solver import Grid, ImexStepper, pas_system
from pasfhn.solver import kernels
from pasfhn.source import SourceParams


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_solve(n, backend, reps=200):
    lower, diag, upper = kernels.cn_matrix(n, 0.8)
    solver = kernels.make_tridiag(lower, diag, upper, backend=backend)
    rhs = np.random.default_rng(0).standard_normal(n)
    solver.solve(rhs)

    def run():
        for _ in range(reps):
            solver.solve(rhs)
    return run


def bench_apply(n, backend, reps=200):
    u = np.random.default_rng(1).standard_normal(n)
    out = np.empty(n)
    kernels.cn_apply(u, 0.4, out, backend=backend)

    def run():
        for _ in range(reps):
            kernels.cn_apply(u, 0.4, out, backend=backend)
    return run


def bench_steps(n, backend, steps):
    model = ModelParams(0.5, 8.0, 6.0)
    eq = equilibrium_for(model)
    source = SourceParams(a=0.00225, b=0.00225, d1=0.75, d2=0.75, x0=0.5, omega1=100.0, eta=1.0)
    grid = Grid(80.0, n)
    stepper = ImexStepper(pas_system(model, source, eq, grid), grid, 0.01, backend=backend)
    u1 = 0.004 * np.exp(-grid.x ** 2)
    u2 = np.zeros(n)

    def run():
        a, b, t = u1, u2, 0.0
        for _ in range(steps):
            a, b = stepper.advance(t, a, b)
            t += 0.01
    return run


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, nargs="+", default=[401, 1601, 4001])
    ap.add_argument("--steps", type=int, default=1000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    backends = ["numpy"] + (["numba"] if kernels.NUMBA_AVAILABLE else [])
    print(f"{'kernel':<12}{'n':>7}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for n in args.n:
        for name, make in (("solve x200", lambda b: bench_solve(n, b)),
                           ("apply x200", lambda b: bench_apply(n, b)),
                           (f"pas x{args.steps}", lambda b: bench_steps(n, b, args.steps))):
            times = [best_of(make(b), args.repeats) for b in backends]
            speed = times[0] / times[-1] if len(times) > 1 else 1.0
            print(f"{name:<12}{n:>7}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times) + f"{speed:>9.2f}x")


if __name__ == "__main__":
    main()
