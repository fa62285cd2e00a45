"""Command-line entry point: ``rarewave <subcommand> ...``."""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config
from .csvio import fmt, write_csv_atomic


def _load(path) -> RunConfig:
    return load_config(path) if path else RunConfig()


def _outdir(cfg: RunConfig) -> Path:
    return Path(os.environ.get("RAREWAVE_OUTDIR") or cfg.output_dir)


def _floats(items):
    out = []
    for item in items:
        out += [float(s) for s in item.replace(",", " ").split()]
    return out


def cmd_riemann(args):
    from .rarefaction import riemann_fan

    cfg = _load(args.config)
    p = cfg.profile()
    xi = np.array(_floats(args.xi))
    fan = riemann_fan(xi, p.setup, p.g)
    print("xi,v,u,theta")
    for row in zip(xi, fan.v, fan.u, fan.theta):
        print(",".join(fmt(c) for c in row))
    return 0


def cmd_profile(args):
    cfg = _load(args.config)
    p = cfg.profile()
    s = p.setup
    x1 = args.xmax if args.xmax is not None else s.w_plus * (1.0 + args.t) + p.tail_length(1e-12)
    x = np.linspace(0.0, x1, args.n)
    j = p.jet(args.t, x)
    header = ["x", "v", "u", "theta"]
    cols = [x, j.v, j.u, j.theta]
    if args.derivs:
        header += ["v_x", "u_x", "theta_x", "v_t", "u_t", "theta_t"]
        cols += [j.v_x, j.u_x, j.theta_x, j.v_t, j.u_t, j.theta_t]
    path = write_csv_atomic(_outdir(cfg) / f"profile_t{args.t:013.6}.csv", header, zip(*cols))
    print(path)
    return 0


def cmd_lemma21(args):
    from .smooth_profile import lemma21_report
    from .csvio import write_csv_atomic as w

    cfg = _load(args.config)
    p = cfg.profile()
    times = np.geomspace(1.0, args.tmax, args.n_times)
    rep = lemma21_report(p, args.p, times)
    rows = list(rep.rows())
    label = "inf" if math.isinf(rep.lp) else f"{rep.lp:g}"
    path = w(_outdir(cfg) / f"lemma21_p{label}.csv", rows[0], rows[1:])
    print(path)
    print(f"fitted exponent of ||u_x||_Lp over the last decade: {rep.alpha:.6f} (r2 {rep.r2:.6f})")
    return 0


def cmd_simulate(args):
    from .ibvp import simulate

    cfg = _load(args.config)
    out = _outdir(cfg)
    res = simulate(cfg.solver(), cfg.profile(), cfg.gas(), cfg.grid(), output_dir=out,
                   keep_snapshots=False)
    print(f"{len(res.files) - 1} snapshots and norms.csv written to {out} "
          f"({res.steps} steps, {res.wall_seconds:.1f} s)")
    return 0


def cmd_picard(args):
    from .diagnostics import sobolev_norm
    from .ibvp import advance_to, initial_data, picard_local

    cfg = _load(args.config)
    p, g, sc = cfg.profile(), cfg.gas(), cfg.solver()
    grid = cfg.grid()
    f0 = initial_data(p, sc, grid)
    pr = picard_local(f0, args.window, args.iters, p, g, grid, sc)
    ref = advance_to(f0, pr.field.t, p, grid, sc)
    diff = math.sqrt(sum(sobolev_norm(a - b, grid) ** 2 for a, b in
                         ((pr.field.v, ref.v), (pr.field.u, ref.u),
                          (pr.field.theta, ref.theta))))
    path = write_csv_atomic(_outdir(cfg) / "picard.csv", ["iteration", "distance"],
                            enumerate(pr.distances, 1))
    print(path)
    for n, d in enumerate(pr.distances, 1):
        print(f"iterate {n}: distance {d:.6e}")
    print(f"L2 difference to the solver at t={pr.field.t:g}: {diff:.6e}")
    return 0


def cmd_verify(args):
    from .acceptance import Suite

    cfg = _load(args.config)
    suite = Suite(cfg)
    only = [int(n) for n in _floats(args.only)] if args.only else None
    failed = 0
    for res in suite.run_all(only):
        print(res.line(), flush=True)
        failed += not res.passed
    print(f"{failed} check(s) failed" if failed else "all checks passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rarewave",
                                 description="rarefaction waves at an impermeable wall")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, config_required=False):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=config_required, help="key = value config file")
        sp.set_defaults(fn=fn)
        return sp

    sp = add("riemann", cmd_riemann, "print fan states at the given x/t values")
    sp.add_argument("--xi", nargs="+", required=True)
    sp = add("profile", cmd_profile, "write the smooth profile at time t")
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--derivs", action="store_true")
    sp.add_argument("--n", type=int, default=2001)
    sp.add_argument("--xmax", type=float)
    sp = add("lemma21", cmd_lemma21, "profile derivative norms, decay fit, distance to fan")
    sp.add_argument("--p", default="2", help="1, 2 or inf")
    sp.add_argument("--tmax", type=float, default=1000.0)
    sp.add_argument("--n-times", type=int, default=31)
    add("simulate", cmd_simulate, "run the wall problem", config_required=True)
    sp = add("picard-check", cmd_picard, "Picard iterates vs the solver", config_required=True)
    sp.add_argument("--window", type=float, default=0.05)
    sp.add_argument("--iters", type=int, default=6)
    sp = add("verify", cmd_verify, "run the acceptance checks")
    sp.add_argument("--only", nargs="+", help="subset of check numbers")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except KeyboardInterrupt:
        print("error: interrupted", file=sys.stderr)
        return 130
    except Exception as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
