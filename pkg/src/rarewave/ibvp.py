"""Explicit finite-volume solver for the impermeable-wall problem in
Lagrangian coordinates, and a Picard-iteration cross-check on short windows.

Discretisation
--------------
Nodes ``x_i = i*dx`` (node 0 is the wall) carry (v, u, theta). The two
conservation laws ``v_t = u_x`` and ``u_t + p_x = 0`` are flux-differenced
with an acoustic interface solver: MUSCL states (MC limiter) are split along
the lambda_1 < 0 and lambda_3 > 0 families, which fixes the interface
velocity and pressure; the lambda_2 = 0 family carries no flux. Temperature
follows the internal-energy form ``c_v theta_t + p u_x = k (theta_x / v)_x``
with the same interface velocities and a centred heat flux. Time stepping is
SSP-RK2 with the CFL limit of :func:`cfl_dt`.

At the wall u = 0 and theta = theta- are imposed. The reconstruction ghost
keeps pressure even, so the wall limit p_x = 0 is respected. v moves with
the half-cell balance ``(dx/2) v_t = u_{1/2}`` less a (dx/4) v_xt term that
restores second order; the conserved mass is then
``trapz(v) + dx^2/8 v_x(0)`` (see :func:`diagnostics.discrete_mass`). The far
end is held at the smooth profile.
"""

from __future__ import annotations

import math
import os
import time as _time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import solve_banded

from . import _kernels
from .csvio import write_csv_atomic
from .diagnostics import NormSeries, ddx, norm_row, perturbation, sobolev_norm
from .smooth_profile import CharacteristicInversionError, WaveProfile
from .thermo import GasParams


class InadmissibleStateError(RuntimeError):
    pass


class TruncationError(RuntimeError):
    pass


class PicardDivergenceError(RuntimeError):
    pass


class WallClockExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Grid:
    L: float
    N: int

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("L must be positive")
        if int(self.N) != self.N or self.N < 16:
            raise ValueError("N must be an integer >= 16")
        object.__setattr__(self, "N", int(self.N))

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.N + 1)

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.L, self.N * factor)


@dataclass(frozen=True)
class Field:
    t: float
    v: np.ndarray
    u: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        for name in ("v", "u", "theta"):
            a = np.array(getattr(self, name), dtype=float)
            a.flags.writeable = False
            object.__setattr__(self, name, a)
        if not (self.v.shape == self.u.shape == self.theta.shape):
            raise ValueError("v, u, theta must share a shape")

    def perturbation(self, profile: WaveProfile, grid: Grid):
        return perturbation(self, profile.jet(self.t, grid.x))


@dataclass(frozen=True)
class Perturbation:
    """C^2 bump a*(1 - ((x - c)/h)^2)^3 on (c - h, c + h), added to v, u and theta."""

    amplitude: float = 0.0
    center: float = 10.0
    width: float = 4.0

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("perturbation width must be positive")

    def __call__(self, x):
        s = (np.asarray(x, dtype=float) - self.center) / self.width
        return np.where(np.abs(s) < 1.0, self.amplitude * (1.0 - s * s) ** 3, 0.0)

    @property
    def integral(self) -> float:
        return self.amplitude * self.width * 32.0 / 35.0


@dataclass(frozen=True)
class SolverConfig:
    cfl_hyp: float = 0.5
    cfl_par: float = 0.4
    t_end: float = 10.0
    snapshot_every: float = 0.5
    perturbation: Perturbation = field(default_factory=Perturbation)
    truncation_tol: float = 1e-6
    max_wall_seconds: float | None = None

    def __post_init__(self):
        for name in ("cfl_hyp", "cfl_par"):
            c = getattr(self, name)
            if not 0.0 < c <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1]")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not self.snapshot_every > 0:
            raise ValueError("snapshot_every must be positive")


def admissible_bounds(profile: WaveProfile) -> tuple[float, float]:
    """Lower bounds 3 v+/8 and 3 theta-/8 that every accepted state respects."""
    return 3.0 * profile.setup.v_plus / 8.0, 3.0 * profile.setup.theta_minus / 8.0


def _check_admissible(v, th, profile):
    vmin, thmin = admissible_bounds(profile)
    if not (np.all(v >= vmin) and np.all(th >= thmin)):
        raise InadmissibleStateError("solution left admissible set")


def initial_data(profile: WaveProfile, cfg: SolverConfig, grid: Grid) -> Field:
    pert = cfg.perturbation
    if pert.amplitude != 0.0:
        if not (pert.center - pert.width > 0.0 and pert.center + pert.width < grid.L):
            raise ValueError("perturbation support violates compatibility/truncation")
        if pert.width < 4.0 * grid.dx:
            raise ValueError("grid does not resolve the perturbation width")
    if 1.0 / profile.g.eps < 2.0 * grid.dx:
        raise ValueError("grid does not resolve the wave width 1/eps")
    x = grid.x
    v, u, th = profile.arrays(0.0, x)
    b = pert(x)
    v, u, th = v + b, u + b, th + b
    u[0] = 0.0
    th[0] = profile.setup.theta_minus
    _check_admissible(v, th, profile)
    return Field(0.0, v, u, th)


def _gas_pp(g: GasParams) -> np.ndarray:
    pp = np.zeros(_kernels.PP_SIZE)
    pp[_kernels.PP_R] = g.R
    pp[_kernels.PP_GAMMA] = g.gamma
    pp[_kernels.PP_K] = g.k
    return pp


def cfl_dt(f: Field, g: GasParams, grid: Grid, cfg: SolverConfig) -> float:
    """min(cfl_hyp dx / max lambda_3, cfl_par dx^2 c_v min(v) / (2k))."""
    return float(_kernels.cfl_dt(np.ascontiguousarray(f.v), np.ascontiguousarray(f.theta),
                                 grid.dx, _gas_pp(g), cfg.cfl_hyp, cfg.cfl_par))


def _same_gas(profile: WaveProfile, g: GasParams):
    if profile.g != g:
        raise ValueError("gas parameters differ from the profile's")


def step(f: Field, dt: float, profile: WaveProfile, g: GasParams, grid: Grid) -> Field:
    """One SSP-RK2 step of the discretised wall problem."""
    _same_gas(profile, g)
    v, u, th = (np.array(a) for a in (f.v, f.u, f.theta))
    ok = _kernels.heun_step(v, u, th, f.t, dt, grid.dx, grid.L, profile.pp)
    if not ok:
        raise CharacteristicInversionError("characteristic inversion did not converge")
    _check_admissible(v, th, profile)
    return Field(f.t + dt, v, u, th)


@dataclass
class SimulationResult:
    grid: Grid
    snapshots: list
    norms: NormSeries
    steps: int
    wall_seconds: float
    files: list = field(default_factory=list)
    trios: list = field(default_factory=list)

    def at(self, t: float) -> Field:
        for s in self.snapshots:
            if math.isclose(s.t, t, rel_tol=1e-12, abs_tol=1e-12):
                return s
        raise KeyError(t)


def required_length(profile: WaveProfile, cfg: SolverConfig) -> float:
    """Shortest domain that keeps the wave (to ``truncation_tol``) inside 0.9 L at t_end."""
    tail = profile.tail_length(cfg.truncation_tol / max(profile.setup.delta_r, 1.0))
    # heat conduction spreads the front diffusively beyond the inviscid support
    kappa = profile.g.k / (profile.g.cv * profile.setup.v_plus)
    margin = 8.0 * math.sqrt(kappa * (1.0 + cfg.t_end))
    reach = profile.setup.w_plus * (1.0 + cfg.t_end) + tail + margin
    pert = cfg.perturbation
    if pert.amplitude != 0.0:
        # acoustic signals travel no faster than about w+
        reach = max(reach, pert.center + pert.width + 1.1 * profile.setup.w_plus * cfg.t_end)
    return reach / 0.9


def snapshot_name(t: float) -> str:
    return f"snap_t{t:013.6}.csv"


def write_snapshot(f: Field, profile: WaveProfile, grid: Grid, directory) -> Path:
    x = grid.x
    phi, psi, xi = f.perturbation(profile, grid)
    rows = zip(x, f.v, f.u, f.theta, phi, psi, xi)
    return write_csv_atomic(Path(directory) / snapshot_name(f.t),
                            ("x", "v", "u", "theta", "phi", "psi", "xi"), rows)


def _raise_status(status):
    if status == _kernels.STATUS_INADMISSIBLE:
        raise InadmissibleStateError("solution left admissible set")
    if status == _kernels.STATUS_NO_CONVERGENCE:
        raise CharacteristicInversionError("characteristic inversion did not converge")
    if status == _kernels.STATUS_MAX_STEPS:
        raise RuntimeError("step limit reached")


def simulate(cfg: SolverConfig, profile: WaveProfile, g: GasParams, grid: Grid,
             output_dir=None, keep_snapshots: bool = True,
             check_length: bool = True) -> SimulationResult:
    """Advance from :func:`initial_data` to ``cfg.t_end``.

    At every snapshot time the state is recorded together with one extra
    step so the norm row can use centred time differences. Output files (if
    ``output_dir``) are one CSV per snapshot plus ``norms.csv``.
    """
    _same_gas(profile, g)
    if check_length and grid.L < required_length(profile, cfg):
        raise TruncationError(
            f"domain too short: L={grid.L} < {required_length(profile, cfg):.6g} "
            "keeps the wave inside 0.9 L"
        )
    started = _time.perf_counter()
    f0 = initial_data(profile, cfg, grid)
    v, u, th = (np.array(a) for a in (f0.v, f0.u, f0.theta))
    vp, up, thp = np.empty_like(v), np.empty_like(v), np.empty_like(v)
    vmin, thmin = admissible_bounds(profile)
    pp, dx, xr = profile.pp, grid.dx, grid.L
    far = grid.x >= 0.9 * grid.L
    n_snap = int(math.floor(cfg.t_end / cfg.snapshot_every + 1e-9))
    targets = [k * cfg.snapshot_every for k in range(1, n_snap + 1)]
    if not targets or targets[-1] < cfg.t_end * (1 - 1e-12):
        targets.append(cfg.t_end)

    norms = NormSeries()
    snaps = []
    trios = []
    files = []
    steps = 0
    diss_cum = 0.0
    prev_diss = None
    prev_t = 0.0
    outdir = Path(output_dir) if output_dir is not None else None

    def extra_step(t, h):
        nonlocal steps
        h = min(h, _kernels.cfl_dt(v, th, dx, pp, cfg.cfl_hyp, cfg.cfl_par))
        if not _kernels.heun_step(v, u, th, t, h, dx, xr, pp):
            _raise_status(_kernels.STATUS_NO_CONVERGENCE)
        steps += 1
        if not (np.all(v >= vmin) and np.all(th >= thmin)):
            _raise_status(_kernels.STATUS_INADMISSIBLE)
        return t + h

    def record(trio, at):
        nonlocal diss_cum, prev_diss, prev_t
        f = trio[at]
        dev = np.abs(np.stack(f.perturbation(profile, grid)))[:, far]
        if dev.size and dev.max() > cfg.truncation_tol:
            raise TruncationError("wave support reached 0.9 L")
        row = norm_row(trio, at, profile, g, grid, 0.0)
        if prev_diss is not None:
            diss_cum += 0.5 * (prev_diss + row["diss"]) * (f.t - prev_t)
        prev_diss, prev_t = row["diss"], f.t
        row["diss_cum"] = diss_cum
        norms.append(row)
        if keep_snapshots:
            snaps.append(f)
            trios.append((trio, at))
        if outdir is not None:
            files.append(write_snapshot(f, profile, grid, outdir))

    # t = 0 uses one-sided time differences over two initial steps
    h0 = _kernels.cfl_dt(v, th, dx, pp, cfg.cfl_hyp, cfg.cfl_par)
    t = extra_step(0.0, h0)
    f1 = Field(t, v, u, th)
    t = extra_step(t, t)
    f2 = Field(t, v, u, th)
    record((f0, f1, f2), 0)

    for target in targets:
        if target <= t:
            continue
        t, n, last_dt, status = _kernels.advance(
            v, u, th, vp, up, thp, t, target, dx, xr, pp, cfg.cfl_hyp, cfg.cfl_par,
            vmin, thmin, 10**9)
        steps += n
        _raise_status(status)
        before = Field(t - last_dt, vp, up, thp)
        cur = Field(t, v, u, th)
        t = extra_step(t, last_dt)
        after = Field(t, v, u, th)
        record((before, cur, after), 1)
        if cfg.max_wall_seconds is not None and _time.perf_counter() - started > cfg.max_wall_seconds:
            raise WallClockExceeded(f"wall-clock guard of {cfg.max_wall_seconds} s exceeded")

    if outdir is not None:
        files.append(norms.to_csv(outdir / "norms.csv"))
    return SimulationResult(grid, snaps, norms, steps, _time.perf_counter() - started, files,
                            trios)


def advance_to(f: Field, t_target: float, profile: WaveProfile, grid: Grid,
               cfg: SolverConfig) -> Field:
    """Integrate a given field to ``t_target`` with adaptive steps."""
    v, u, th = (np.array(a) for a in (f.v, f.u, f.theta))
    vp, up, thp = np.empty_like(v), np.empty_like(v), np.empty_like(v)
    vmin, thmin = admissible_bounds(profile)
    t, _, _, status = _kernels.advance(v, u, th, vp, up, thp, f.t, t_target, grid.dx, grid.L,
                                       profile.pp, cfg.cfl_hyp, cfg.cfl_par, vmin, thmin, 10**9)
    _raise_status(status)
    return Field(t, v, u, th)


# ------------------------------------------------------------------ Picard ---

@dataclass
class PicardResult:
    field: Field
    distances: list
    dt: float
    levels: int


def _transport_rhs(phi, psi, a, g1, dx):
    """First-order characteristic upwinding of phi_t = psi_x, psi_t = a phi_x + g1."""
    z = np.sqrt(a)
    dphi = np.zeros_like(phi)
    dpsi = np.zeros_like(psi)
    bphi, bpsi = np.diff(phi)[:-1], np.diff(psi)[:-1]   # U_i - U_{i-1}, i = 1..n-2
    fphi, fpsi = np.diff(phi)[1:], np.diff(psi)[1:]     # U_{i+1} - U_i
    zi = z[1:-1]
    cp = 0.5 * (zi * bphi - bpsi)        # right-going amplitude
    cm = -0.5 * (zi * fphi + fpsi)       # left-going amplitude
    dphi[1:-1] = -(cp + cm) / dx
    dpsi[1:-1] = -(-zi * cp + zi * cm) / dx + g1[1:-1]
    dphi[0] = (-3.0 * psi[0] + 4.0 * psi[1] - psi[2]) / (2.0 * dx)
    return dphi, dpsi


def _cn_heat(xi, m0, m1, s0, s1, cv, dt, dx):
    """Crank-Nicolson step of cv xi_t = m xi_xx + s with xi = 0 at both ends."""
    n = xi.size
    r0, r1 = m0 / (cv * dx * dx), m1 / (cv * dx * dx)
    lap = np.zeros(n)
    lap[1:-1] = xi[2:] - 2.0 * xi[1:-1] + xi[:-2]
    rhs = xi + 0.5 * dt * r0 * lap + 0.5 * dt * (s0 + s1) / cv
    ab = np.zeros((3, n))
    ab[1, :] = 1.0
    ab[1, 1:-1] = 1.0 + dt * r1[1:-1]
    ab[0, 2:] = -0.5 * dt * r1[1:-1]
    ab[2, :-2] = -0.5 * dt * r1[1:-1]
    rhs[0] = rhs[-1] = 0.0
    return solve_banded((1, 1), ab, rhs)


def picard_local(f0: Field, t_window: float, iters: int, profile: WaveProfile,
                 g: GasParams, grid: Grid, cfg: SolverConfig | None = None) -> PicardResult:
    """Linearised iteration for the perturbation system on [t0, t0 + t_window].

    Iterate n solves a linear wave pair for (phi, psi) and a linear heat
    equation for xi, with wave speed, diffusivity and sources frozen at
    iterate n - 1. Iterate 0 is the initial perturbation held constant in time.
    """
    _same_gas(profile, g)
    if not 0.0 < t_window <= 0.1:
        raise ValueError("t_window must lie in (0, 0.1]")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    cfg = cfg or SolverConfig()
    dx, x = grid.dx, grid.x
    R, k, cv = g.R, g.k, g.cv
    dt0 = cfl_dt(f0, g, grid, cfg)
    nt = max(int(math.ceil(t_window / dt0)), 1)
    dt = t_window / nt
    times = f0.t + dt * np.arange(nt + 1)
    jets = [profile.jet(t, x) for t in times]

    def stack(name):
        return np.array([getattr(j, name) for j in jets])

    vt, thv = stack("v"), stack("theta")
    vt_x, ut_x = stack("v_x"), stack("u_x")
    tht_x, tht_xx = stack("theta_x"), stack("theta_xx")
    pt = R * thv / vt
    pt_x = R * (tht_x * vt - thv * vt_x) / vt**2

    j0 = jets[0]
    start = (f0.v - j0.v, f0.u - j0.u, f0.theta - j0.theta)
    prev = tuple(np.repeat(c[None, :], nt + 1, axis=0) for c in start)
    distances = []
    for _ in range(iters):
        PHI, PSI, XI = prev
        V = vt + PHI
        TH = thv + XI
        phx, psx, xix = ddx(PHI, dx), ddx(PSI, dx), ddx(XI, dx)
        a = R * TH / V**2
        g1 = pt_x * PHI / V - pt * vt_x * PHI / V**2 - R * xix / V + R * XI * vt_x / V**2
        g2 = (-k * xix * (vt_x + phx) / V**2 - pt * psx
              - (ut_x + psx) * (R * XI - pt * PHI) / V
              + k * (tht_xx / V - tht_x * (vt_x + phx) / V**2))
        m = k / V

        phi = np.empty_like(PHI)
        psi = np.empty_like(PSI)
        xi = np.empty_like(XI)
        phi[0], psi[0], xi[0] = start
        for n in range(nt):
            d1 = _transport_rhs(phi[n], psi[n], a[n], g1[n], dx)
            p1, s1 = phi[n] + dt * d1[0], psi[n] + dt * d1[1]
            s1[0] = 0.0
            p1[-1] = s1[-1] = 0.0
            d2 = _transport_rhs(p1, s1, a[n + 1], g1[n + 1], dx)
            phi[n + 1] = 0.5 * (phi[n] + p1 + dt * d2[0])
            psi[n + 1] = 0.5 * (psi[n] + s1 + dt * d2[1])
            psi[n + 1, 0] = 0.0
            phi[n + 1, -1] = psi[n + 1, -1] = 0.0
            xi[n + 1] = _cn_heat(xi[n], m[n], m[n + 1], g2[n], g2[n + 1], cv, dt, dx)
        new = (phi, psi, xi)
        d = max(
            math.sqrt(sum(sobolev_norm(c1[lvl] - c0[lvl], grid) ** 2 for c1, c0 in zip(new, prev)))
            for lvl in range(nt + 1)
        )
        distances.append(d)
        if len(distances) >= 3 and distances[-1] > distances[-2] > distances[-3]:
            raise PicardDivergenceError("outside local-existence regime")
        prev = new
    phi, psi, xi = prev
    jl = jets[-1]
    out = Field(times[-1], jl.v + phi[-1], jl.u + psi[-1], jl.theta + xi[-1])
    return PicardResult(out, distances, dt, nt)


def output_dir_from_env(default):
    return os.environ.get("RAREWAVE_OUTDIR", default)
