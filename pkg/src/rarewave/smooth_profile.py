"""Smooth approximation of the 3-rarefaction wave.

A monotone Burgers datum ``w0`` (a regularised incomplete gamma ramp from w-
to w+) is transported by its characteristics; the solution at Burgers time
``1 + t`` is mapped back onto the wave curve through the Riemann invariants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .rarefaction import FarFieldSetup, riemann_fan
from .thermo import GasParams, ThermoState


class CharacteristicInversionError(RuntimeError):
    pass


class UnderResolvedError(ValueError):
    pass


def cq(q: int) -> float:
    """Normalisation 1/q! of the smoothing kernel y^q e^-y."""
    if int(q) != q or q < 10:
        raise ValueError("q must be an integer >= 10")
    return 1.0 / math.factorial(int(q))


@dataclass(frozen=True)
class ProfileJet:
    """Values and derivatives of the smooth wave at a set of points.

    Attribute names follow ``<field>_<derivative>``, e.g. ``theta_xx`` or
    ``u_tx``; plain ``v``, ``u``, ``theta`` are the values.
    """

    v: np.ndarray
    u: np.ndarray
    theta: np.ndarray
    v_x: np.ndarray
    u_x: np.ndarray
    theta_x: np.ndarray
    v_xx: np.ndarray
    u_xx: np.ndarray
    theta_xx: np.ndarray
    v_t: np.ndarray
    u_t: np.ndarray
    theta_t: np.ndarray
    v_tx: np.ndarray
    u_tx: np.ndarray
    theta_tx: np.ndarray
    w: np.ndarray
    w_x: np.ndarray


@dataclass(frozen=True)
class WaveProfile:
    setup: FarFieldSetup
    g: GasParams
    cq: float = field(init=False)
    pp: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        s, g = self.setup, self.g
        c = cq(g.q)
        pp = np.empty(_kernels.PP_SIZE)
        pp[_kernels.PP_R] = g.R
        pp[_kernels.PP_GAMMA] = g.gamma
        pp[_kernels.PP_K] = g.k
        pp[_kernels.PP_RINV] = s.K
        pp[_kernels.PP_VM] = s.v_minus
        pp[_kernels.PP_THM] = s.theta_minus
        pp[_kernels.PP_VP] = s.v_plus
        pp[_kernels.PP_UP] = s.u_plus
        pp[_kernels.PP_THP] = s.theta_plus
        pp[_kernels.PP_WM] = s.w_minus
        pp[_kernels.PP_WP] = s.w_plus
        pp[_kernels.PP_DELTA] = s.delta_r
        pp[_kernels.PP_EPS] = g.eps
        pp[_kernels.PP_Q] = g.q
        pp[_kernels.PP_LCQ] = -math.lgamma(g.q + 1.0)
        pp.flags.writeable = False
        object.__setattr__(self, "cq", c)
        object.__setattr__(self, "pp", pp)

    @classmethod
    def from_params(cls, g: GasParams, v_plus=1.0, theta_plus=2.0, theta_minus=1.0):
        return cls(FarFieldSetup.build(v_plus, theta_plus, theta_minus, g), g)

    # -- Burgers layer ------------------------------------------------------

    def w0(self, x):
        w, _, _ = _kernels.w0_jet(np.asarray(x, dtype=float), self.pp)
        return w if np.ndim(x) else float(w)

    def tail_length(self, tol: float = 1e-16) -> float:
        """Smallest x with w+ - w0(x) <= tol * delta_r."""
        a = self.g.q + 1.0
        z = a
        while 1.0 - _kernels.gammainc_p(a, z) > tol:
            z *= 1.05
        return z / self.g.eps

    def burgers_jet(self, t, x):
        w, wx, wxx, ok = _kernels.burgers_jet(x, 1.0 + t, self.pp)
        if not ok:
            raise CharacteristicInversionError("characteristic inversion did not converge")
        return w, wx, wxx

    def burgers_w(self, t, x):
        w, wx, _ = self.burgers_jet(t, x)
        if np.ndim(x) == 0:
            return float(w), float(wx)
        return w, wx

    # -- mapped profile -----------------------------------------------------

    def _powers(self):
        g, s = self.g, self.setup
        n = 2.0 / (g.gamma + 1.0)
        sq = math.sqrt(g.R * g.gamma * s.K)
        # each field is c * w**m (u up to an additive constant)
        m_v = -n
        m_th = n * (g.gamma - 1.0)
        m_g = 0.5 * n * (g.gamma - 1.0)
        c_v = sq**n
        c_th = s.K * sq ** (-m_th)
        c_u = 2.0 * sq / (g.gamma - 1.0) * sq ** (-m_g)
        u0 = s.u_plus - 2.0 * sq / (g.gamma - 1.0) * s.v_plus ** (-0.5 * (g.gamma - 1.0))
        return (c_v, m_v), (c_th, m_th), (c_u, m_g), u0

    def jet(self, t, x) -> ProfileJet:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        w, wx, wxx = self.burgers_jet(t, x)
        wt = -w * wx
        wtx = -(wx * wx + w * wxx)
        (c_v, m_v), (c_th, m_th), (c_u, m_g), u0 = self._powers()
        s = self.setup

        def chain(c, m):
            f = c * w**m
            f1 = m * f / w
            f2 = (m - 1.0) * f1 / w
            return f, f1 * wx, f2 * wx * wx + f1 * wxx, f1 * wt, f2 * wx * wt + f1 * wtx

        v = chain(c_v, m_v)
        th = chain(c_th, m_th)
        uu = chain(c_u, m_g)
        u = (uu[0] + u0,) + uu[1:]
        flat_left = w <= s.w_minus
        flat_right = w >= s.w_plus

        def pin(vals, left, right):
            out = [np.where(flat_left, left, np.where(flat_right, right, vals[0]))]
            out += [np.where(flat_left | flat_right, 0.0, d) for d in vals[1:]]
            return out

        v = pin(v, s.v_minus, s.v_plus)
        u = pin(u, 0.0, s.u_plus)
        th = pin(th, s.theta_minus, s.theta_plus)
        return ProfileJet(
            v[0], u[0], th[0], v[1], u[1], th[1], v[2], u[2], th[2],
            v[3], u[3], th[3], v[4], u[4], th[4], w, wx,
        )

    def arrays(self, t, x):
        """(v, u, theta) as arrays over ``x``."""
        j = self.jet(t, x)
        return j.v, j.u, j.theta

    def profile(self, t, x) -> ThermoState:
        j = self.jet(t, x)
        if np.ndim(x) == 0:
            return ThermoState(float(j.v[0]), float(j.u[0]), float(j.theta[0]))
        return ThermoState(j.v, j.u, j.theta)

    def profile_derivatives(self, t, x):
        """(v_x, u_x, theta_x, v_t, u_t, theta_t) by the chain rule through w."""
        j = self.jet(t, x)
        out = (j.v_x, j.u_x, j.theta_x, j.v_t, j.u_t, j.theta_t)
        if np.ndim(x) == 0:
            return tuple(float(a[0]) for a in out)
        return out


def w0(x, p: WaveProfile):
    return p.w0(x)


def burgers_w(t, x, p: WaveProfile):
    return p.burgers_w(t, x)


def profile(t, x, p: WaveProfile) -> ThermoState:
    return p.profile(t, x)


def profile_derivatives(t, x, p: WaveProfile):
    return p.profile_derivatives(t, x)


# ----------------------------------------------------------------- report ---

@dataclass
class Lemma21Report:
    lp: float
    times: np.ndarray
    first: dict          # component -> L^p norm of the x-derivative, per time
    second: dict         # component -> L^p norm of the second x-derivative
    first_total: np.ndarray
    second_total: np.ndarray
    bound_first: np.ndarray   # min{delta eps^(1-1/p), delta^(1/p) (1+t)^(-1+1/p)}
    sup_fan: np.ndarray
    u_l1: np.ndarray     # ||u_x||_L1, equal to u+ for a monotone profile
    alpha: float         # fitted exponent of ||u_x||_Lp against 1+t
    r2: float

    def rows(self):
        header = ["t", "vx", "ux", "thetax", "first_total", "vxx", "uxx", "thetaxx",
                  "second_total", "bound_first", "sup_fan", "ux_l1"]
        yield header
        for i, t in enumerate(self.times):
            yield [t, self.first["v"][i], self.first["u"][i], self.first["theta"][i],
                   self.first_total[i], self.second["v"][i], self.second["u"][i],
                   self.second["theta"][i], self.second_total[i], self.bound_first[i],
                   self.sup_fan[i], self.u_l1[i]]


def _lp(f, x, lp):
    if math.isinf(lp):
        return float(np.max(np.abs(f)))
    return float(np.trapezoid(np.abs(f) ** lp, x) ** (1.0 / lp))


def _norms_at(p: WaveProfile, t: float, lp: float, n_points: int):
    s = p.setup
    x = np.linspace(s.w_minus * (1.0 + t), s.w_plus * (1.0 + t) + p.tail_length(), n_points)
    j = p.jet(t, x)
    first = {"v": _lp(j.v_x, x, lp), "u": _lp(j.u_x, x, lp), "theta": _lp(j.theta_x, x, lp)}
    second = {"v": _lp(j.v_xx, x, lp), "u": _lp(j.u_xx, x, lp),
              "theta": _lp(j.theta_xx, x, lp)}
    tot1 = _lp(np.sqrt(j.v_x**2 + j.u_x**2 + j.theta_x**2), x, lp)
    tot2 = _lp(np.sqrt(j.v_xx**2 + j.u_xx**2 + j.theta_xx**2), x, lp)
    fan = riemann_fan(x / (1.0 + t), s, p.g)
    sup = float(np.max(np.sqrt((j.v - fan.v) ** 2 + (j.u - fan.u) ** 2
                               + (j.theta - fan.theta) ** 2)))
    u_l1 = float(np.trapezoid(np.abs(j.u_x), x))
    return first, second, tot1, tot2, sup, u_l1


def lemma21_report(p: WaveProfile, lp, times, n_points: int = 4001,
                   resolution_tol: float = 0.05) -> Lemma21Report:
    """Measured derivative norms, their decay exponent and the distance to the fan.

    Each time is sampled on ``n_points`` nodes spanning the wave support; a
    second pass at twice the resolution guards against under-resolution.
    """
    from .diagnostics import fit_decay_exponent

    lp = math.inf if lp in ("inf", math.inf) else float(lp)
    if not (lp >= 1.0):
        raise ValueError("p must be >= 1")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    comps = ("v", "u", "theta")
    first = {c: np.empty(times.size) for c in comps}
    second = {c: np.empty(times.size) for c in comps}
    tot1, tot2, sup, ul1 = (np.empty(times.size) for _ in range(4))
    for i, t in enumerate(times):
        f1, f2, a, b, c, d = _norms_at(p, t, lp, n_points)
        g1, _, _, _, _, _ = _norms_at(p, t, lp, 2 * n_points - 1)
        for comp in comps:
            ref = g1[comp]
            if ref > 0 and abs(f1[comp] - ref) > resolution_tol * ref:
                raise UnderResolvedError(
                    f"under-resolved: ||{comp}_x|| changes by more than "
                    f"{resolution_tol:.0%} under refinement at t={t}"
                )
            first[comp][i] = f1[comp]
            second[comp][i] = f2[comp]
        tot1[i], tot2[i], sup[i], ul1[i] = a, b, c, d
    delta, eps = p.setup.delta_r, p.g.eps
    inv = 0.0 if math.isinf(lp) else 1.0 / lp
    bound = np.minimum(delta * eps ** (1.0 - inv), delta**inv * (1.0 + times) ** (-1.0 + inv))
    alpha, r2 = math.nan, math.nan
    tail = times >= times[-1] / 10.0
    if tail.sum() >= 10:
        alpha, r2 = fit_decay_exponent((times, first["u"]), window=tail.sum() / times.size)
    return Lemma21Report(lp, times, first, second, tot1, tot2, bound, sup, ul1, alpha, r2)
