"""Acceptance checks shared by ``rarewave verify`` and the test suite.

Each check returns a :class:`CheckResult`. Solver runs are cached on the
:class:`Suite` so checks that look at the same run do not repeat it, and
the admissibility check can inspect every run the suite performed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .config import RunConfig
from .diagnostics import (boundary_relation_356, boundary_residual_353, energy_identity_residual,
                          energy_total, fit_decay_exponent, sobolev_norm)
from .ibvp import (Field, Grid, Perturbation, SolverConfig, admissible_bounds, advance_to,
                   initial_data, picard_local, required_length, simulate)
from .rarefaction import riemann_fan, u_plus, v_minus, wave_curve_point
from .smooth_profile import lemma21_report
from .thermo import GasParams


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} [{self.number:2d}] {self.name}: {self.detail} ({self.seconds:.1f} s)"


def _order(coarse, fine):
    return math.log2(coarse / fine) if coarse > 0 and fine > 0 else math.inf


def _fit_order(errors):
    """Least-squares slope of -log2(error) against refinement level."""
    e = np.asarray(errors, dtype=float)
    if np.any(e <= 0):
        return math.inf
    return float(-np.polyfit(np.arange(e.size), np.log2(e), 1)[0])


class Suite:
    # near-wall bump used wherever the wall identities are exercised
    WALL_BUMP = Perturbation(0.05, 3.0, 2.0)

    def __init__(self, cfg: RunConfig | None = None, seed: int = 20240601):
        self.cfg = cfg or RunConfig()
        self.g = self.cfg.gas()
        self.profile = self.cfg.profile()
        self.setup = self.profile.setup
        self.seed = seed
        self._runs = {}

    # -- shared runs --------------------------------------------------------

    def run(self, amplitude, center, width, N, t_end, every, L=None):
        key = (amplitude, center, width, N, t_end, every, L)
        if key not in self._runs:
            sc = SolverConfig(t_end=t_end, snapshot_every=every,
                              perturbation=Perturbation(amplitude, center, width),
                              truncation_tol=self.cfg.truncation_tol)
            if L is None:
                L = math.ceil(required_length(self.profile, sc))
            self._runs[key] = simulate(sc, self.profile, self.g, Grid(L, N))
        return self._runs[key]

    def _wall_runs(self):
        b = self.WALL_BUMP
        return [self.run(b.amplitude, b.center, b.width, N, 1.0, 0.5, 100.0)
                for N in (1000, 2000, 4000)]

    # -- checks -------------------------------------------------------------

    def c1_closed_forms(self):
        rng = np.random.default_rng(self.seed)
        worst = 0.0
        for _ in range(100):
            g = GasParams(R=rng.uniform(0.3, 3.0), gamma=rng.uniform(1.1, 3.0),
                          k=1.0, q=10, eps=0.5)
            vp = rng.uniform(0.3, 3.0)
            thm = rng.uniform(0.3, 3.0)
            thp = thm * rng.uniform(1.05, 4.0)
            K = vp ** (g.gamma - 1.0) * thp
            vm = v_minus(vp, thp, thm, g)
            ref, _ = quad(lambda s: math.sqrt(g.R * g.gamma * K) * s ** (-(g.gamma + 1.0) / 2.0),
                          vp, vm, epsabs=0.0, epsrel=1e-13, limit=200)
            worst = max(worst, abs(u_plus(vp, thp, thm, g) - ref) / abs(ref))
        u_end, th_end = wave_curve_point(self.setup.v_minus, self.setup, self.g)
        end_err = max(abs(u_end), abs(th_end - self.setup.theta_minus))
        ok = worst <= 1e-10 and end_err <= 1e-12
        return ok, f"max rel err u+ {worst:.2e} (tol 1e-10), endpoint err {end_err:.2e} (tol 1e-12)"

    def c2_riemann_invariant(self):
        rng = np.random.default_rng(self.seed + 2)
        s, g = self.setup, self.g
        xi = rng.uniform(s.w_minus - 0.5, s.w_plus + 0.5, 5000)
        fan = riemann_fan(xi, s, g)
        t = rng.uniform(0.0, 100.0, 5000)
        x = rng.uniform(0.0, 1.0, 5000) * (s.w_plus * (1.0 + t) + self.profile.tail_length())
        vals = [fan.v ** (g.gamma - 1.0) * fan.theta]
        for ti, xi_ in zip(t, x):
            j = self.profile.jet(ti, xi_)
            vals.append(j.v ** (g.gamma - 1.0) * j.theta)
        err = float(np.max(np.abs(np.concatenate(vals) / s.K - 1.0)))
        return err <= 1e-12, f"max rel deviation from K {err:.2e} over 10^4 points (tol 1e-12)"

    def c3_signs_and_constancy(self):
        rng = np.random.default_rng(self.seed + 3)
        s, p = self.setup, self.profile
        bad_sign = bad_flat = 0
        for t in rng.uniform(0.0, 200.0, 100):
            x = rng.uniform(0.0, s.w_plus * (1.0 + t) + p.tail_length(), 100)
            j = p.jet(t, x)
            bad_sign += int(np.sum((j.v_x > 0) | (j.u_x < 0) | (j.theta_x < 0)))
            left = x <= s.w_minus * (1.0 + t)
            bad_flat += int(np.sum(left & ((j.v != s.v_minus) | (j.u != 0.0)
                                           | (j.theta != s.theta_minus))))
        ok = bad_sign == 0 and bad_flat == 0
        return ok, f"{bad_sign} sign violations, {bad_flat} constancy violations at 10^4 points"

    def c4_decay_exponent(self):
        times = np.geomspace(10.0, 1000.0, 25)
        rep = lemma21_report(self.profile, 2, times)
        alpha = fit_decay_exponent((times, rep.first["u"]), window=1.0)[0]
        l1 = lemma21_report(self.profile, 1, np.array([1.0, 10.0, 100.0, 1000.0]))
        l1_err = float(np.max(np.abs(l1.u_l1 - self.setup.u_plus)))
        ok = abs(alpha + 0.5) <= 0.1 and l1_err <= 1e-6
        return ok, (f"alpha = {alpha:.4f} (target -0.5 +- 0.1), "
                    f"max | ||u_x||_L1 - u+ | = {l1_err:.2e} (tol 1e-6)")

    def c5_fan_distance(self):
        rep = lemma21_report(self.profile, math.inf, np.array([1.0, 1000.0]))
        ratio = rep.sup_fan[1] / rep.sup_fan[0]
        return ratio < 0.1, (f"sup distance {rep.sup_fan[0]:.4g} at t=1, {rep.sup_fan[1]:.4g} at "
                             f"t=1000, ratio {ratio:.4f} (< 0.1)")

    def c6_derivatives(self):
        rng = np.random.default_rng(self.seed + 6)
        s, p = self.setup, self.profile
        worst = 0.0
        h = 1e-3

        def rich(fn):
            # Richardson-extrapolated central difference, O(h^4) truncation
            def cd(hh):
                return (fn(hh) - fn(-hh)) / (2 * hh)
            return (4 * cd(h / 2) - cd(h)) / 3

        for _ in range(100):
            t = rng.uniform(0.01, 20.0)
            # sample inside the transition zone where derivatives are not negligible
            x = rng.uniform(s.w_minus * (1.0 + t) + 2.0, s.w_plus * (1.0 + t) + 10.0)
            j = p.jet(t, x)
            for c in ("v", "u", "theta"):
                def along_x(d, name=c):
                    return float(getattr(p.jet(t, x + d), name)[0])

                def along_x_x(d, name=c):
                    return float(getattr(p.jet(t, x + d), name + "_x")[0])

                def along_t(d, name=c):
                    return float(getattr(p.jet(t + d, x), name)[0])

                def along_t_x(d, name=c):
                    return float(getattr(p.jet(t + d, x), name + "_x")[0])

                pairs = [
                    (getattr(j, c + "_x"), rich(along_x)),
                    (getattr(j, c + "_xx"), rich(along_x_x)),
                    (getattr(j, c + "_t"), rich(along_t)),
                    (getattr(j, c + "_tx"), rich(along_t_x)),
                ]
                for exact, fd in pairs:
                    # floor keeps the ratio meaningful where the exact value nearly vanishes
                    scale = max(abs(float(exact[0])), 1e-3 * s.delta_r * p.g.eps)
                    worst = max(worst, abs(float(exact[0]) - fd) / scale)
        return worst < 1e-6, f"max relative error {worst:.2e} at 100 points (tol 1e-6)"

    def c7_self_convergence(self):
        runs = [self.run(0.0, 10.0, 4.0, N, 1.0, 1.0, 100.0) for N in (500, 1000, 2000)]
        fs = [r.at(1.0) for r in runs]

        def diff(a, b, dx):
            return math.sqrt(sum(sobolev_norm(x1 - x2[::2], dx) ** 2 for x1, x2 in
                                 ((a.v, b.v), (a.u, b.u), (a.theta, b.theta))))

        e1 = diff(fs[0], fs[1], runs[0].grid.dx)
        e2 = diff(fs[1], fs[2], runs[1].grid.dx)
        order = _order(e1, e2)
        return order >= 1.0, f"|U_N-U_2N| {e1:.3e}, |U_2N-U_4N| {e2:.3e}, observed order {order:.2f}"

    def c8_mass(self):
        amp = 0.01
        if amp > 0.01 * self.setup.delta_r:
            amp = 0.01 * self.setup.delta_r
        r = self.run(amp, 10.0, 4.0, 1024, 10.0, 0.5)
        m = r.norms.column("mass")
        drift = float(np.max(np.abs(m - m[0])))
        tol = 1e-6 * max(1.0, abs(m[0]))
        return drift <= tol, f"max |mass(t) - mass(0)| {drift:.2e} over t in [0,10] (tol {tol:.1e})"

    def c9_stability(self):
        amp = 0.01
        r = self.run(amp, 3.0, 2.0, 4096, 200.0, 1.0)
        t = r.norms.times
        sf = r.norms.column("sup_fan")
        l2 = r.norms.column("l2")
        s1 = float(sf[np.isclose(t, 1.0)][0])
        s200 = float(sf[-1])
        cap = 5.0 * l2[0] + 5.0 * self.g.eps**0.25 * self.setup.delta_r
        ok = s200 < s1 and float(l2.max()) <= cap
        return ok, (f"sup-fan {s1:.4g} (t=1) -> {s200:.4g} (t=200); max l2 {l2.max():.3e} <= "
                    f"cap {cap:.3f}; {r.wall_seconds:.0f} s")

    def c10_energy(self):
        z = initial_data(self.profile, SolverConfig(perturbation=Perturbation(0.0)),
                         Grid(100.0, 1000))
        e_zero = energy_total(z, self.profile, self.g, Grid(100.0, 1000))
        runs = self._wall_runs()[:2] + [self.run(0.01, 10.0, 4.0, 1024, 10.0, 0.5)]
        e_min = min(float(r.norms.column("energy").min()) for r in runs)
        mono = all(np.all(np.diff(r.norms.column("diss_cum")) >= 0) for r in runs)
        res = []
        for r in runs[:2]:
            trio, at = r.trios[-1]
            res.append(energy_identity_residual(trio, self.profile, self.g, r.grid, at))
        ratio = res[1] / res[0]
        ok = e_min >= 0.0 and e_zero == 0.0 and mono and ratio <= 0.5
        return ok, (f"min E {e_min:.3e}, E(zero pert) {e_zero:.1e}, dissipation monotone {mono}, "
                    f"residual {res[0]:.2e} -> {res[1]:.2e} (ratio {ratio:.3f} <= 0.5)")

    def c11_boundary(self):
        runs = self._wall_runs()
        r353 = [boundary_residual_353(r.at(1.0), self.profile, self.g, r.grid) for r in runs]
        r356 = [boundary_relation_356(r.trios[-1][0], self.profile, self.g, r.grid,
                                      r.trios[-1][1]) for r in runs]
        o353, o356 = _fit_order(r353), _fit_order(r356)
        # non-solution data: a wall-hugging temperature bump with no matching dynamics
        grid = runs[-1].grid
        x = grid.x
        base = runs[-1].trios[-1][0]
        inj = [Field(f.t, f.v, f.u, f.theta + 0.2 * (1.0 + 5.0 * f.t) * x * np.exp(-x))
               for f in base]
        bad353 = boundary_residual_353(inj[1], self.profile, self.g, grid)
        bad356 = boundary_relation_356(inj, self.profile, self.g, grid, 1)
        ok = o353 >= 1.0 and o356 >= 1.0 and bad353 > 0.05 and bad356 > 0.05
        return ok, (f"temperature wall residual {r353[0]:.2e}->{r353[-1]:.2e} order {o353:.2f}; "
                    f"pressure wall residual {r356[0]:.2e}->{r356[-1]:.2e} order {o356:.2f}; "
                    f"injected {bad353:.2f}, {bad356:.2f}")

    def c12_picard(self):
        sc = SolverConfig(perturbation=Perturbation(0.01, 3.0, 2.0))
        grid = Grid(40.0, 400)
        f0 = initial_data(self.profile, sc, grid)
        pr = picard_local(f0, 0.05, 6, self.profile, self.g, grid, sc)
        d = pr.distances
        ratios = [b / a for a, b in zip(d, d[1:]) if a > 0]
        contracting = bool(ratios) and max(ratios) < 0.5
        ref = advance_to(f0, pr.field.t, self.profile, grid, sc)
        jet = self.profile.jet(ref.t, grid.x)
        comps = [(pr.field.v, ref.v), (pr.field.u, ref.u), (pr.field.theta, ref.theta)]
        diff = math.sqrt(sum(sobolev_norm(a - b, grid) ** 2 for a, b in comps))
        size = math.sqrt(sum(sobolev_norm(a, grid) ** 2 for a in
                             (ref.v - jet.v, ref.u - jet.u, ref.theta - jet.theta)))
        tol = 5.0 * (pr.dt + grid.dx**2) * size
        ok = contracting and diff <= tol
        return ok, (f"distance ratios <= {max(ratios):.3f}; |picard - solver| {diff:.2e} "
                    f"(tol {tol:.2e})")

    def c13_admissibility(self):
        vmin, thmin = admissible_bounds(self.profile)
        if not self._runs:
            self.run(0.01, 10.0, 4.0, 1024, 10.0, 0.5)
        lows_v = min(float(r.norms.column("vmin").min()) for r in self._runs.values())
        lows_t = min(float(r.norms.column("thmin").min()) for r in self._runs.values())
        ok = lows_v >= vmin and lows_t >= thmin
        return ok, (f"{len(self._runs)} runs: min v {lows_v:.4f} >= {vmin:.4f}, "
                    f"min theta {lows_t:.4f} >= {thmin:.4f}")

    CHECKS = {
        1: ("closed forms", "c1_closed_forms"),
        2: ("Riemann invariant", "c2_riemann_invariant"),
        3: ("profile monotonicity", "c3_signs_and_constancy"),
        4: ("profile decay", "c4_decay_exponent"),
        5: ("profile vs fan", "c5_fan_distance"),
        6: ("profile derivatives", "c6_derivatives"),
        7: ("solver self-convergence", "c7_self_convergence"),
        8: ("discrete mass", "c8_mass"),
        9: ("long-time stability", "c9_stability"),
        10: ("energy diagnostics", "c10_energy"),
        11: ("wall identities", "c11_boundary"),
        12: ("Picard cross-check", "c12_picard"),
        13: ("admissibility", "c13_admissibility"),
    }

    def check(self, number: int) -> CheckResult:
        name, meth = self.CHECKS[number]
        t0 = time.perf_counter()
        try:
            ok, detail = getattr(self, meth)()
        except Exception as exc:   # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        return CheckResult(number, name, bool(ok), detail, time.perf_counter() - t0)

    def run_all(self, numbers=None):
        # admissibility inspects the runs made by the others, so it goes last
        for n in sorted(numbers or self.CHECKS, key=lambda k: (k == 13, k)):
            yield self.check(n)
