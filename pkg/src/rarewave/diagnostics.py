"""Monitored quantities for runs of the wall problem: Sobolev norms of the
perturbation, the relative-entropy energy and its balance law, the two wall
identities, and power-law decay fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .csvio import write_csv_atomic
from .rarefaction import riemann_fan

NORM_COLUMNS = ("t", "l2", "h1", "h2", "sup_fan", "energy", "diss_cum", "mass",
                "bres353", "bres356")


def _dx(grid) -> float:
    return float(grid.dx) if hasattr(grid, "dx") else float(grid)


def ddx(f, dx):
    """First derivative: central inside, second-order one-sided at both ends."""
    return np.gradient(f, dx, edge_order=2, axis=-1)


def d2dx2(f, dx):
    f = np.asarray(f, dtype=float)
    out = np.empty_like(f)
    out[..., 1:-1] = (f[..., 2:] - 2.0 * f[..., 1:-1] + f[..., :-2]) / dx**2
    out[..., 0] = (2.0 * f[..., 0] - 5.0 * f[..., 1] + 4.0 * f[..., 2] - f[..., 3]) / dx**2
    out[..., -1] = (2.0 * f[..., -1] - 5.0 * f[..., -2] + 4.0 * f[..., -3]
                    - f[..., -4]) / dx**2
    return out


def wall_ddx(f, dx):
    return (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx)


def wall_d2dx2(f, dx):
    return (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / dx**2


def trapz(f, dx):
    return float(np.trapezoid(f, dx=dx))


def discrete_mass(f, dx) -> float:
    """Trapezoid integral with the wall end correction dx^2/8 * f_x(0); this is
    the quadrature the solver conserves exactly."""
    return trapz(f, dx) + dx * dx / 8.0 * wall_ddx(f, dx)


def sobolev_norm(samples, grid, order: int = 0) -> float:
    """Discrete H^order norm on a uniform grid (order 0 is the L2 norm)."""
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    f = np.asarray(samples, dtype=float)
    if f.size < max(4 * order, 2):
        raise ValueError("not enough nodes for the requested derivative order")
    dx = _dx(grid)
    acc = f * f
    if order >= 1:
        acc = acc + ddx(f, dx) ** 2
    if order == 2:
        acc = acc + d2dx2(f, dx) ** 2
    return math.sqrt(trapz(acc, dx))


def phi_fn(s):
    """Phi(s) = s - 1 - ln s."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= 0):
        raise ValueError("Phi is defined for s > 0 only")
    out = s_arr - 1.0 - np.log(s_arr)
    return float(out) if np.ndim(s) == 0 else out


def perturbation(f, jet):
    return f.v - jet.v, f.u - jet.u, f.theta - jet.theta


def energy_density(f, jet, g):
    """Pointwise relative entropy with the background temperature as weight."""
    _, psi, _ = perturbation(f, jet)
    return (g.R * jet.theta * phi_fn(f.v / jet.v) + 0.5 * psi**2
            + g.cv * jet.theta * phi_fn(f.theta / jet.theta))


def energy_total(f, profile, g, grid) -> float:
    jet = profile.jet(f.t, grid.x)
    return trapz(energy_density(f, jet, g), grid.dx)


def dissipation_density(f, jet, g, dx):
    xi_x = ddx(f.theta - jet.theta, dx)
    return g.k * jet.theta / (f.v * f.theta**2) * xi_x**2


def dissipation(f, profile, g, grid) -> float:
    jet = profile.jet(f.t, grid.x)
    return trapz(dissipation_density(f, jet, g, grid.dx), grid.dx)


def _time_weights(ts, at: int):
    """Derivative weights of the quadratic through three (possibly uneven) times."""
    t0, t1, t2 = ts
    tt = ts[at]
    return np.array([
        ((tt - t1) + (tt - t2)) / ((t0 - t1) * (t0 - t2)),
        ((tt - t0) + (tt - t2)) / ((t1 - t0) * (t1 - t2)),
        ((tt - t0) + (tt - t1)) / ((t2 - t0) * (t2 - t1)),
    ])


def _check_trio(snapshots):
    if len(snapshots) != 3:
        raise ValueError("need exactly three snapshots")
    ts = [s.t for s in snapshots]
    if not ts[0] < ts[1] < ts[2]:
        raise ValueError("snapshot times must increase")
    return ts


def energy_identity_pointwise(snapshots, profile, g, grid, at: int = 1):
    """Residual of the energy balance law at the time of ``snapshots[at]``."""
    ts = _check_trio(snapshots)
    dx = grid.dx
    x = grid.x
    jets = [profile.jet(t, x) for t in ts]
    wts = _time_weights(ts, at)
    E_t = sum(w * energy_density(f, j, g) for w, f, j in zip(wts, snapshots, jets))
    f, j = snapshots[at], jets[at]
    R, k, gam = g.R, g.k, g.gamma
    v, th = f.v, f.theta
    phi, psi, xi = perturbation(f, j)
    p = R * th / v
    pt = R * j.theta / j.v
    phi_x, xi_x = ddx(phi, dx), ddx(xi, dx)
    flux = ddx((p - pt) * psi, dx)
    heat = k * ddx(xi * xi_x / (v * th), dx)
    diss = k * j.theta / (v * th**2) * xi_x**2
    h1 = -pt * j.u_x * (phi**2 / (v * j.v) + (p - pt) * xi / (pt * th) - xi**2 / (j.theta * th)
                        + (gam - 1.0) * phi_fn(v / j.v) + phi_fn(th / j.theta))
    h2 = (-k * j.theta_x * phi_x * xi / (v**2 * th) + k * j.theta_x * xi * xi_x / (v * th**2)
          + k * j.theta_xx * xi / (v * th) - k * j.theta_x * j.v_x * xi / (v**2 * th))
    return E_t + flux - heat + diss - (h1 + h2)


def energy_identity_residual(snapshots, profile, g, grid, at: int = 1) -> float:
    """L1 norm of the energy-balance residual."""
    res = energy_identity_pointwise(snapshots, profile, g, grid, at)
    return trapz(np.abs(res), grid.dx)


def boundary_residual_353(f, profile, g, grid) -> float:
    """Wall compatibility of the temperature equation: second derivative of the
    temperature perturbation against its value implied by the equation."""
    dx = grid.dx
    x4 = grid.x[:4]
    j = profile.jet(f.t, x4)
    v = f.v[:4]
    phi = v - j.v
    psi = f.u[:4] - j.u
    xi = f.theta[:4] - j.theta
    theta_minus = profile.setup.theta_minus
    pt = g.R * j.theta[0] / j.v[0]
    v_x = wall_ddx(v, dx)
    rhs = ((g.R * theta_minus * wall_ddx(psi, dx) - j.u_x[0] * pt * phi[0]) / g.k
           + wall_ddx(xi, dx) * v_x / v[0] - j.theta_xx[0] + j.theta_x[0] * v_x / v[0])
    return abs(wall_d2dx2(xi, dx) - rhs)


def boundary_relation_356(snapshots, profile, g, grid, at: int = 1) -> float:
    """Residual at the wall of the relation obtained from psi_tt(t, 0) = 0."""
    ts = _check_trio(snapshots)
    dx = grid.dx
    x4 = grid.x[:4]
    wts = _time_weights(ts, at)
    jets = [profile.jet(t, x4) for t in ts]
    P = np.array([g.R * j.theta / j.v / f.v[:4] for f, j in zip(snapshots, jets)])
    Q = np.array([g.R / f.v[:4] for f in snapshots])
    PHI = np.array([f.v[:4] - j.v for f, j in zip(snapshots, jets)])
    XI = np.array([f.theta[:4] - j.theta for f, j in zip(snapshots, jets)])

    def dt(a):
        return wts @ a

    P_t, Q_t, PHI_t, XI_t = dt(P), dt(Q), dt(PHI), dt(XI)
    lhs = P[at, 0] * wall_ddx(PHI_t, dx)
    rhs = Q[at, 0] * wall_ddx(XI_t, dx) - (
        wall_ddx(P_t, dx) * PHI[at, 0] + P_t[0] * wall_ddx(PHI[at], dx)
        + wall_ddx(P[at], dx) * PHI_t[0] - Q_t[0] * wall_ddx(XI[at], dx)
    )
    return abs(lhs - rhs)


def fit_decay_exponent(series, window: float = 1.0):
    """Least-squares slope of log(value) against log(1 + t) over the trailing
    ``window`` fraction of samples. Returns (alpha, r2)."""
    t, val = (np.asarray(a, dtype=float) for a in series)
    if t.shape != val.shape:
        raise ValueError("times and values differ in length")
    if not 0.0 < window <= 1.0:
        raise ValueError("window must be a fraction in (0, 1]")
    n = max(int(round(window * t.size)), 1)
    t, val = t[-n:], val[-n:]
    if t.size < 10:
        raise ValueError("need at least 10 samples in the fitted window")
    if np.any(val <= 0):
        raise ValueError("cannot fit power law")
    X = np.log1p(t)
    Y = np.log(val)
    alpha, icpt = np.polyfit(X, Y, 1)
    resid = Y - (alpha * X + icpt)
    ss_tot = float(np.sum((Y - Y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot <= 1e-30 else 1.0 - ss_res / ss_tot
    return float(alpha), float(r2)


def sup_to_fan(f, profile, g, grid) -> float:
    """sup_x |(v, u, theta)(t, x) - fan(x / t)|."""
    xi = grid.x / max(f.t, 1e-300)
    fan = riemann_fan(xi, profile.setup, g)
    return float(np.max(np.sqrt((f.v - fan.v) ** 2 + (f.u - fan.u) ** 2
                                + (f.theta - fan.theta) ** 2)))


@dataclass
class NormSeries:
    rows: list = field(default_factory=list)

    def append(self, row: dict) -> None:
        if self.rows and not row["t"] > self.rows[-1]["t"]:
            raise ValueError("times must be strictly increasing")
        self.rows.append(row)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows])

    @property
    def times(self):
        return self.column("t")

    def __len__(self):
        return len(self.rows)

    def to_csv(self, path):
        return write_csv_atomic(path, NORM_COLUMNS,
                                ([r[c] for c in NORM_COLUMNS] for r in self.rows))


def norm_row(snapshots, at: int, profile, g, grid, diss_cum: float) -> dict:
    """One NormSeries row for ``snapshots[at]``; the other two supply time derivatives."""
    f = snapshots[at]
    jet = profile.jet(f.t, grid.x)
    phi, psi, xi = perturbation(f, jet)
    comps = (phi, psi, xi)

    def sob(order):
        return math.sqrt(sum(sobolev_norm(c, grid, order) ** 2 for c in comps))

    return {
        "t": f.t,
        "l2": sob(0),
        "h1": sob(1),
        "h2": sob(2),
        "sup_fan": sup_to_fan(f, profile, g, grid),
        "energy": trapz(energy_density(f, jet, g), grid.dx),
        "diss": trapz(dissipation_density(f, jet, g, grid.dx), grid.dx),
        "diss_cum": diss_cum,
        "mass": discrete_mass(phi, grid.dx),
        "bres353": boundary_residual_353(f, profile, g, grid),
        "bres356": boundary_relation_356(snapshots, profile, g, grid, at),
        "vmin": float(f.v.min()),
        "thmin": float(f.theta.min()),
    }
