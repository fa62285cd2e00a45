"""Hot kernels: incomplete gamma, Burgers characteristic inversion, the
semi-discrete right-hand side and the time-stepping loop.

Every kernel exists twice: a scalar-loop version compiled with numba and a
vectorised numpy version. The public dispatchers at the bottom pick one per
call according to :mod:`rarewave._accel`.

Wave parameters travel as one float64 array ``pp`` (see ``PP_*`` indices) so
the numba signatures stay flat.
"""

from __future__ import annotations

import math

import numpy as np

from . import _accel
from ._accel import njit

PP_R, PP_GAMMA, PP_K, PP_RINV = 0, 1, 2, 3
PP_VM, PP_THM, PP_VP, PP_UP, PP_THP = 4, 5, 6, 7, 8
PP_WM, PP_WP, PP_DELTA, PP_EPS, PP_Q, PP_LCQ = 9, 10, 11, 12, 13, 14
PP_SIZE = 15

STATUS_OK = 0
STATUS_INADMISSIBLE = 1
STATUS_NO_CONVERGENCE = 2
STATUS_MAX_STEPS = 3

_TINY = 1e-300
_MAXIT = 1000
_ULP = 2.220446049250313e-16


# ---------------------------------------------------------------- gamma ---

@njit
def gammainc_p_scalar(a, z):
    """Regularised lower incomplete gamma P(a, z), a > 0."""
    if z <= 0.0:
        return 0.0
    lpre = a * math.log(z) - z - math.lgamma(a)
    if z < a + 1.0:
        ap = a
        term = 1.0 / a
        total = term
        for _ in range(_MAXIT):
            ap += 1.0
            term *= z / ap
            total += term
            if abs(term) < abs(total) * 1e-17:
                break
        return total * math.exp(lpre)
    # modified Lentz evaluation of the continued fraction for Q
    b = z + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAXIT):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) <= _ULP:
            break
    return 1.0 - math.exp(lpre) * h


@njit
def _gammainc_p_loop(a, z):
    out = np.empty(z.size)
    for i in range(z.size):
        out[i] = gammainc_p_scalar(a, z[i])
    return out


def _gammainc_p_numpy(a, z):
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    pos = z > 0
    zs = z[pos]
    lpre = a * np.log(zs) - zs - math.lgamma(a)
    res = np.empty_like(zs)

    ser = zs < a + 1.0
    zz = zs[ser]
    ap = a
    term = np.full_like(zz, 1.0 / a)
    total = term.copy()
    for _ in range(_MAXIT):
        ap += 1.0
        term = term * zz / ap
        total += term
        if np.all(np.abs(term) < np.abs(total) * 1e-17):
            break
    res[ser] = total * np.exp(lpre[ser])

    cf = ~ser
    zz = zs[cf]
    b = zz + 1.0 - a
    c = np.full_like(zz, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, _MAXIT):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = b + an / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if np.all(np.abs(delta - 1.0) <= _ULP):
            break
    res[cf] = 1.0 - np.exp(lpre[cf]) * h
    out[pos] = res
    return out


# ------------------------------------------------- Burgers characteristics ---

@njit
def w0_jet_scalar(x, pp):
    """Initial Burgers datum and its first two derivatives at ``x``."""
    wm = pp[PP_WM]
    if x <= 0.0:
        return wm, 0.0, 0.0
    eps = pp[PP_EPS]
    q = pp[PP_Q]
    delta = pp[PP_DELTA]
    z = eps * x
    dens = math.exp(q * math.log(z) - z + pp[PP_LCQ])
    w = wm + delta * gammainc_p_scalar(q + 1.0, z)
    return w, delta * eps * dens, delta * eps * eps * dens * (q - z) / z


@njit
def invert_scalar(x, s, pp):
    """Foot x0 of the characteristic through (s, x): x = x0 + s*w0(x0)."""
    wm = pp[PP_WM]
    if x <= wm * s:
        return x - wm * s, True
    lo = max(0.0, x - pp[PP_WP] * s)
    hi = x - wm * s
    x0 = 0.5 * (lo + hi)
    tol = 1e-13 * (1.0 + abs(x))
    fprev = math.inf
    for _ in range(400):
        w, d1, _d2 = w0_jet_scalar(x0, pp)
        f = x0 + s * w - x
        if f > 0.0:
            hi = x0
        else:
            lo = x0
        xn = x0 - f / (1.0 + s * d1)
        # bisect when Newton leaves the bracket or stalls (it can cycle here)
        if not (lo < xn < hi) or abs(f) > 0.5 * fprev:
            xn = 0.5 * (lo + hi)
        fprev = abs(f)
        if abs(xn - x0) < tol or hi - lo < tol:
            return _polish(xn, x, s, pp), True
        x0 = xn
    return x0, False


@njit
def _polish(x0, x, s, pp):
    # plain Newton steps take the foot from the stopping tolerance down to roundoff,
    # so profile values are smooth enough to difference
    for _ in range(2):
        w, d1, _d2 = w0_jet_scalar(x0, pp)
        x0 = max(0.0, x0 - (x0 + s * w - x) / (1.0 + s * d1))
    return x0


@njit
def burgers_jet_scalar(x, s, pp):
    x0, ok = invert_scalar(x, s, pp)
    w, d1, d2 = w0_jet_scalar(x0, pp)
    den = 1.0 + s * d1
    return w, d1 / den, d2 / (den * den * den), ok


@njit
def _burgers_jet_loop(x, s, pp):
    n = x.size
    w = np.empty(n)
    wx = np.empty(n)
    wxx = np.empty(n)
    ok = True
    for i in range(n):
        a, b, c, good = burgers_jet_scalar(x[i], s, pp)
        w[i] = a
        wx[i] = b
        wxx[i] = c
        ok = ok and good
    return w, wx, wxx, ok


def _w0_jet_numpy(x, pp):
    x = np.asarray(x, dtype=float)
    w = np.full_like(x, pp[PP_WM])
    d1 = np.zeros_like(x)
    d2 = np.zeros_like(x)
    pos = x > 0
    eps, q, delta = pp[PP_EPS], pp[PP_Q], pp[PP_DELTA]
    z = eps * x[pos]
    dens = np.exp(q * np.log(z) - z + pp[PP_LCQ])
    w[pos] = pp[PP_WM] + delta * _gammainc_p_numpy(q + 1.0, z)
    d1[pos] = delta * eps * dens
    d2[pos] = delta * eps * eps * dens * (q - z) / z
    return w, d1, d2


def _burgers_jet_numpy(x, s, pp):
    x = np.asarray(x, dtype=float)
    wm, wp = pp[PP_WM], pp[PP_WP]
    x0 = x - wm * s
    active = np.flatnonzero(x > wm * s)
    xa = x[active]
    lo = np.maximum(0.0, xa - wp * s)
    hi = xa - wm * s
    cur = 0.5 * (lo + hi)
    tol = 1e-13 * (1.0 + np.abs(xa))
    done = np.zeros(xa.size, dtype=bool)
    fprev = np.full(xa.size, np.inf)
    for _ in range(400):
        if done.all():
            break
        w, d1, _d2 = _w0_jet_numpy(cur, pp)
        f = cur + s * w - xa
        hi = np.where(f > 0.0, cur, hi)
        lo = np.where(f > 0.0, lo, cur)
        xn = cur - f / (1.0 + s * d1)
        newton = (lo < xn) & (xn < hi) & (np.abs(f) <= 0.5 * fprev)
        xn = np.where(newton, xn, 0.5 * (lo + hi))
        fprev = np.abs(f)
        conv = (np.abs(xn - cur) < tol) | (hi - lo < tol)
        cur = np.where(done, cur, xn)
        done |= conv
    for _ in range(2):
        w, d1, _d2 = _w0_jet_numpy(cur, pp)
        cur = np.maximum(0.0, cur - (cur + s * w - xa) / (1.0 + s * d1))
    x0[active] = cur
    w, d1, d2 = _w0_jet_numpy(x0, pp)
    den = 1.0 + s * d1
    return w, d1 / den, d2 / den**3, bool(done.all())


# ------------------------------------------------------------ profile map ---

@njit
def profile_point_scalar(t, x, pp):
    """(v, u, theta) of the smooth wave at (t, x); x in the half line."""
    s = 1.0 + t
    x0, ok = invert_scalar(x, s, pp)
    if x0 <= 0.0:
        return pp[PP_VM], 0.0, pp[PP_THM], ok
    w, _d1, _d2 = w0_jet_scalar(x0, pp)
    if w >= pp[PP_WP]:
        return pp[PP_VP], pp[PP_UP], pp[PP_THP], ok
    gam = pp[PP_GAMMA]
    K = pp[PP_RINV]
    sq = math.sqrt(pp[PP_R] * gam * K)
    v = (sq / w) ** (2.0 / (gam + 1.0))
    m = 0.5 * (gam - 1.0)
    u = pp[PP_UP] + 2.0 * sq / (gam - 1.0) * (v ** (-m) - pp[PP_VP] ** (-m))
    return v, u, K * v ** (1.0 - gam), ok


# ------------------------------------------------------- semi-discrete RHS ---

@njit
def _mc(a, b):
    if a * b <= 0.0:
        return 0.0
    c = 0.5 * (a + b)
    m = min(2.0 * abs(a), 2.0 * abs(b), abs(c))
    return m if a > 0.0 else -m


@njit
def _wall_dv(uh0, dv1, dv2, dx):
    # Half-cell balance 2*uh0/dx minus (dx/4) v_xt, with v_xt taken one-sided
    # from the same update; this keeps trapz(v) + dx^2/8 * v_x(0) conserved.
    a = 2.0 * uh0 / dx
    c = (-3.0 * a + 4.0 * dv1 - dv2) / 5.0
    return a - c


@njit
def _rhs_loop(v, u, th, dx, pp, dv, du, dth):
    n = v.size
    R = pp[PP_R]
    gam = pp[PP_GAMMA]
    k = pp[PP_K]
    cv = R / (gam - 1.0)
    sv = np.zeros(n)
    su = np.zeros(n)
    sth = np.zeros(n)
    # wall ghosts: u odd, theta odd about the wall value, pressure even
    vg = v[1] * (2.0 * th[0] - th[1]) / th[1]
    sv[0] = _mc(v[0] - vg, v[1] - v[0])
    su[0] = _mc(u[0] + u[1], u[1] - u[0])
    sth[0] = _mc(th[1] - th[0], th[1] - th[0])
    for i in range(1, n - 1):
        sv[i] = _mc(v[i] - v[i - 1], v[i + 1] - v[i])
        su[i] = _mc(u[i] - u[i - 1], u[i + 1] - u[i])
        sth[i] = _mc(th[i] - th[i - 1], th[i + 1] - th[i])
    uh = np.empty(n - 1)
    ph = np.empty(n - 1)
    qh = np.empty(n - 1)
    for j in range(n - 1):
        vl = v[j] + 0.5 * sv[j]
        ul = u[j] + 0.5 * su[j]
        tl = th[j] + 0.5 * sth[j]
        vr = v[j + 1] - 0.5 * sv[j + 1]
        ur = u[j + 1] - 0.5 * su[j + 1]
        tr = th[j + 1] - 0.5 * sth[j + 1]
        pl = R * tl / vl
        pr = R * tr / vr
        zl = math.sqrt(gam * R * tl) / vl
        zr = math.sqrt(gam * R * tr) / vr
        zs = zl + zr
        uh[j] = (zl * ul + zr * ur - (pr - pl)) / zs
        ph[j] = (zr * pl + zl * pr - zl * zr * (ur - ul)) / zs
        qh[j] = 2.0 * k * (th[j + 1] - th[j]) / (dx * (v[j] + v[j + 1]))
    du[0] = 0.0
    dth[0] = 0.0
    for i in range(1, n - 1):
        dudx = (uh[i] - uh[i - 1]) / dx
        dv[i] = dudx
        du[i] = -(ph[i] - ph[i - 1]) / dx
        dth[i] = (-(R * th[i] / v[i]) * dudx + (qh[i] - qh[i - 1]) / dx) / cv
    dv[0] = _wall_dv(uh[0], dv[1], dv[2], dx)
    dv[n - 1] = 0.0
    du[n - 1] = 0.0
    dth[n - 1] = 0.0


def _mc_numpy(a, b):
    c = 0.5 * (a + b)
    m = np.minimum(np.minimum(2.0 * np.abs(a), 2.0 * np.abs(b)), np.abs(c))
    return np.where(a * b <= 0.0, 0.0, np.where(a > 0.0, m, -m))


def _rhs_numpy(v, u, th, dx, pp, dv, du, dth):
    R, gam, k = pp[PP_R], pp[PP_GAMMA], pp[PP_K]
    cv = R / (gam - 1.0)

    def slopes(f, left0):
        s = np.zeros_like(f)
        s[0] = _mc_numpy(np.array([left0]), np.array([f[1] - f[0]]))[0]
        s[1:-1] = _mc_numpy(f[1:-1] - f[:-2], f[2:] - f[1:-1])
        return s

    sv = slopes(v, v[0] - v[1] * (2.0 * th[0] - th[1]) / th[1])
    su = slopes(u, u[0] + u[1])
    sth = slopes(th, th[1] - th[0])
    vl, ul, tl = v[:-1] + 0.5 * sv[:-1], u[:-1] + 0.5 * su[:-1], th[:-1] + 0.5 * sth[:-1]
    vr, ur, tr = v[1:] - 0.5 * sv[1:], u[1:] - 0.5 * su[1:], th[1:] - 0.5 * sth[1:]
    pl, pr = R * tl / vl, R * tr / vr
    zl, zr = np.sqrt(gam * R * tl) / vl, np.sqrt(gam * R * tr) / vr
    zs = zl + zr
    uh = (zl * ul + zr * ur - (pr - pl)) / zs
    ph = (zr * pl + zl * pr - zl * zr * (ur - ul)) / zs
    qh = 2.0 * k * (th[1:] - th[:-1]) / (dx * (v[1:] + v[:-1]))
    dudx = (uh[1:] - uh[:-1]) / dx
    dv[1:-1] = dudx
    dv[0] = _wall_dv(uh[0], dv[1], dv[2], dx)
    du[1:-1] = -(ph[1:] - ph[:-1]) / dx
    dth[1:-1] = (-(R * th[1:-1] / v[1:-1]) * dudx + (qh[1:] - qh[:-1]) / dx) / cv
    du[0] = dth[0] = 0.0
    dv[-1] = du[-1] = dth[-1] = 0.0


# ------------------------------------------------------------ time stepping ---

@njit
def cfl_dt_scalar(v, th, dx, pp, cfl_hyp, cfl_par):
    R = pp[PP_R]
    gam = pp[PP_GAMMA]
    cmax = 0.0
    vmin = v[0]
    for i in range(v.size):
        c = math.sqrt(R * gam * th[i]) / v[i]
        if c > cmax:
            cmax = c
        if v[i] < vmin:
            vmin = v[i]
    dt_h = cfl_hyp * dx / cmax
    dt_p = cfl_par * dx * dx * (R / (gam - 1.0)) * vmin / (2.0 * pp[PP_K])
    return min(dt_h, dt_p)


def _cfl_dt_numpy(v, th, dx, pp, cfl_hyp, cfl_par):
    R, gam = pp[PP_R], pp[PP_GAMMA]
    cmax = np.max(np.sqrt(R * gam * th) / v)
    dt_h = cfl_hyp * dx / cmax
    dt_p = cfl_par * dx * dx * (R / (gam - 1.0)) * np.min(v) / (2.0 * pp[PP_K])
    return min(dt_h, dt_p)


@njit
def _apply_bc(v, u, th, t, xr, pp):
    u[0] = 0.0
    th[0] = pp[PP_THM]
    a, b, c, ok = profile_point_scalar(t, xr, pp)
    v[-1] = a
    u[-1] = b
    th[-1] = c
    return ok


@njit
def _heun_loop(v, u, th, t, dt, dx, xr, pp):
    n = v.size
    dv = np.empty(n)
    du = np.empty(n)
    dth = np.empty(n)
    _rhs_loop(v, u, th, dx, pp, dv, du, dth)
    v1 = v + dt * dv
    u1 = u + dt * du
    t1 = th + dt * dth
    ok = _apply_bc(v1, u1, t1, t + dt, xr, pp)
    _rhs_loop(v1, u1, t1, dx, pp, dv, du, dth)
    for i in range(n):
        v[i] = 0.5 * v[i] + 0.5 * (v1[i] + dt * dv[i])
        u[i] = 0.5 * u[i] + 0.5 * (u1[i] + dt * du[i])
        th[i] = 0.5 * th[i] + 0.5 * (t1[i] + dt * dth[i])
    ok2 = _apply_bc(v, u, th, t + dt, xr, pp)
    return ok and ok2


def _apply_bc_numpy(v, u, th, t, xr, pp):
    u[0] = 0.0
    th[0] = pp[PP_THM]
    v[-1], u[-1], th[-1], ok = profile_point_scalar(t, xr, pp)
    return ok


def _heun_numpy(v, u, th, t, dt, dx, xr, pp):
    dv, du, dth = np.empty_like(v), np.empty_like(v), np.empty_like(v)
    _rhs_numpy(v, u, th, dx, pp, dv, du, dth)
    v1, u1, t1 = v + dt * dv, u + dt * du, th + dt * dth
    ok = _apply_bc_numpy(v1, u1, t1, t + dt, xr, pp)
    _rhs_numpy(v1, u1, t1, dx, pp, dv, du, dth)
    v[:] = 0.5 * v + 0.5 * (v1 + dt * dv)
    u[:] = 0.5 * u + 0.5 * (u1 + dt * du)
    th[:] = 0.5 * th + 0.5 * (t1 + dt * dth)
    return _apply_bc_numpy(v, u, th, t + dt, xr, pp) and ok


@njit
def _next_dt(t, t_target, dtc):
    r = t_target - t
    if r <= dtc * (1.0 + 1e-12):
        return r, True
    if r < 2.0 * dtc:
        return 0.5 * r, False
    return dtc, False


@njit
def _advance_loop(v, u, th, vp, up, thp, t, t_target, dx, xr, pp,
                  cfl_hyp, cfl_par, vmin_adm, thmin_adm, max_steps):
    """Step in place until ``t_target``; (vp, up, thp) receive the state before
    the last step. Returns (t, steps, last_dt, status)."""
    steps = 0
    last_dt = 0.0
    while t < t_target:
        if steps >= max_steps:
            return t, steps, last_dt, STATUS_MAX_STEPS
        dtc = cfl_dt_scalar(v, th, dx, pp, cfl_hyp, cfl_par)
        dt, final = _next_dt(t, t_target, dtc)
        vp[:] = v
        up[:] = u
        thp[:] = th
        ok = _heun_loop(v, u, th, t, dt, dx, xr, pp)
        t = t_target if final else t + dt
        last_dt = dt
        steps += 1
        if not ok:
            return t, steps, last_dt, STATUS_NO_CONVERGENCE
        for i in range(v.size):
            if not (v[i] >= vmin_adm and th[i] >= thmin_adm):
                return t, steps, last_dt, STATUS_INADMISSIBLE
    return t, steps, last_dt, STATUS_OK


def _advance_numpy(v, u, th, vp, up, thp, t, t_target, dx, xr, pp,
                   cfl_hyp, cfl_par, vmin_adm, thmin_adm, max_steps):
    steps = 0
    last_dt = 0.0
    while t < t_target:
        if steps >= max_steps:
            return t, steps, last_dt, STATUS_MAX_STEPS
        dtc = _cfl_dt_numpy(v, th, dx, pp, cfl_hyp, cfl_par)
        dt, final = _next_dt(t, t_target, dtc)
        vp[:], up[:], thp[:] = v, u, th
        ok = _heun_numpy(v, u, th, t, dt, dx, xr, pp)
        t = t_target if final else t + dt
        last_dt = dt
        steps += 1
        if not ok:
            return t, steps, last_dt, STATUS_NO_CONVERGENCE
        if not (np.all(v >= vmin_adm) and np.all(th >= thmin_adm)):
            return t, steps, last_dt, STATUS_INADMISSIBLE
    return t, steps, last_dt, STATUS_OK


# --------------------------------------------------------------- dispatch ---

def _numba() -> bool:
    return _accel.backend() == "numba"


def gammainc_p(a, z):
    z = np.asarray(z, dtype=float)
    if _numba():
        return _gammainc_p_loop(float(a), np.ascontiguousarray(z.ravel())).reshape(z.shape)
    return _gammainc_p_numpy(float(a), z)


def w0_jet(x, pp):
    x = np.asarray(x, dtype=float)
    return _w0_jet_numpy(x, pp)


def burgers_jet(x, s, pp):
    """(w, w_x, w_xx, converged) at Burgers time ``s`` for the points ``x``."""
    x = np.asarray(x, dtype=float)
    flat = np.ascontiguousarray(x.ravel())
    if _numba():
        w, wx, wxx, ok = _burgers_jet_loop(flat, float(s), pp)
    else:
        w, wx, wxx, ok = _burgers_jet_numpy(flat, float(s), pp)
    return w.reshape(x.shape), wx.reshape(x.shape), wxx.reshape(x.shape), ok


def rhs(v, u, th, dx, pp):
    dv, du, dth = np.empty_like(v), np.empty_like(v), np.empty_like(v)
    (_rhs_loop if _numba() else _rhs_numpy)(v, u, th, dx, pp, dv, du, dth)
    return dv, du, dth


def cfl_dt(v, th, dx, pp, cfl_hyp, cfl_par):
    if _numba():
        return cfl_dt_scalar(v, th, dx, pp, cfl_hyp, cfl_par)
    return _cfl_dt_numpy(v, th, dx, pp, cfl_hyp, cfl_par)


def heun_step(v, u, th, t, dt, dx, xr, pp):
    """One SSP-RK2 step in place; returns False if a boundary evaluation failed."""
    if _numba():
        return _heun_loop(v, u, th, t, dt, dx, xr, pp)
    return _heun_numpy(v, u, th, t, dt, dx, xr, pp)


def advance(v, u, th, vp, up, thp, t, t_target, dx, xr, pp,
            cfl_hyp, cfl_par, vmin_adm, thmin_adm, max_steps):
    fn = _advance_loop if _numba() else _advance_numpy
    return fn(v, u, th, vp, up, thp, float(t), float(t_target), float(dx), float(xr), pp,
              float(cfl_hyp), float(cfl_par), float(vmin_adm), float(thmin_adm),
              int(max_steps))
