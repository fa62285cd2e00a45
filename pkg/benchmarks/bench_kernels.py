"""Time the numba and numpy backends on the hot kernels.

    python benchmarks/bench_kernels.py [--N 4096] [--repeat 5]

Both backends run the same inputs; the script also reports the largest
difference between their outputs so a speedup never hides a discrepancy.
"""

import argparse
import time

import numpy as np

from rarewave import _kernels
from rarewave._accel import HAVE_NUMBA, use_backend
from rarewave.config import RunConfig
from rarewave.ibvp import Grid, Perturbation, SolverConfig, advance_to, initial_data


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(N):
    cfg = RunConfig()
    prof = cfg.profile()
    pp = prof.pp
    grid = Grid(200.0, N)
    sc = SolverConfig(perturbation=Perturbation(0.01, 10.0, 4.0))
    f0 = initial_data(prof, sc, grid)
    z = np.linspace(0.0, 60.0, 20 * N)
    return {
        "gammainc_p": lambda: _kernels.gammainc_p(11.0, z),
        "burgers_jet": lambda: _kernels.burgers_jet(grid.x, 11.0, pp)[:3],
        "rhs": lambda: _kernels.rhs(f0.v.copy(), f0.u.copy(), f0.theta.copy(), grid.dx, pp),
        "advance t=1": lambda: (lambda f: (f.v, f.u, f.theta))(
            advance_to(f0, 1.0, prof, grid, sc)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    results = {}
    for name in ("numba", "numpy"):
        with use_backend(name):
            for key, fn in cases(args.N).items():
                fn()  # warm-up (JIT compile for numba)
                results[name, key] = best_of(fn, args.repeat)

    print(f"N = {args.N}, best of {args.repeat}")
    print(f"{'kernel':<14}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}{'max diff':>12}")
    for key in cases(args.N):
        (tn, on), (tp, op) = results["numba", key], results["numpy", key]
        on = on if isinstance(on, tuple) else (on,)
        op = op if isinstance(op, tuple) else (op,)
        diff = max(float(np.max(np.abs(a - b))) for a, b in zip(on, op))
        print(f"{key:<14}{1e3 * tn:12.3f}{1e3 * tp:12.3f}{tp / tn:10.1f}{diff:12.2e}")


if __name__ == "__main__":
    main()
