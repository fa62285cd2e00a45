"""The numba kernels and their numpy twins must agree; special functions are
checked against scipy and mpmath."""

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gammainc

from rarewave import _accel, _kernels
from rarewave.ibvp import Grid, Perturbation, SolverConfig, initial_data


@pytest.mark.parametrize("a", [11.0, 13.0, 21.0])
def test_gammainc_vs_scipy(a):
    z = np.concatenate([np.linspace(0, 3 * a, 400), [200.0, 1e-8]])
    for b in ("numba", "numpy"):
        with _accel.use_backend(b):
            np.testing.assert_allclose(_kernels.gammainc_p(a, z), gammainc(a, z),
                                       rtol=1e-13, atol=1e-300)


def test_gammainc_vs_mpmath():
    for z in (0.5, 5.0, 10.9, 11.0, 11.1, 30.0):
        ref = float(mpmath.gammainc(11, 0, z, regularized=True))
        assert float(_kernels.gammainc_p(11.0, np.array([z]))[0]) == pytest.approx(ref, rel=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 400), st.floats(0.0, 150.0))
def test_burgers_backends_agree(x, t):
    from rarewave import GasParams, WaveProfile
    pp = WaveProfile.from_params(GasParams()).pp
    xs = np.array([x])
    with _accel.use_backend("numba"):
        a = _kernels.burgers_jet(xs, 1 + t, pp)
    with _accel.use_backend("numpy"):
        b = _kernels.burgers_jet(xs, 1 + t, pp)
    assert a[3] and b[3]
    for u, v in zip(a[:3], b[:3]):
        np.testing.assert_allclose(u, v, rtol=1e-11, atol=1e-14)


def test_rhs_and_step_backends_agree(prof):
    cfg = SolverConfig(perturbation=Perturbation(0.05, 3.0, 2.0))
    grid = Grid(100.0, 500)
    f = initial_data(prof, cfg, grid)
    out = {}
    for b in ("numba", "numpy"):
        with _accel.use_backend(b):
            v, u, th = (np.array(a) for a in (f.v, f.u, f.theta))
            r = _kernels.rhs(v, u, th, grid.dx, prof.pp)
            dt = _kernels.cfl_dt(v, th, grid.dx, prof.pp, 0.5, 0.4)
            vp, up, thp = np.empty_like(v), np.empty_like(v), np.empty_like(v)
            res = _kernels.advance(v, u, th, vp, up, thp, 0.0, 0.3, grid.dx, grid.L, prof.pp,
                                   0.5, 0.4, 0.1, 0.1, 10**6)
            out[b] = (r, dt, res, v, u, th)
    for x, y in zip(out["numba"][0], out["numpy"][0]):
        np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-12)
    assert out["numba"][1] == pytest.approx(out["numpy"][1], rel=1e-14)
    assert out["numba"][2][:2] == out["numpy"][2][:2]
    for x, y in zip(out["numba"][3:], out["numpy"][3:]):
        np.testing.assert_allclose(x, y, rtol=1e-11, atol=1e-12)


def test_backend_switch():
    assert _accel.backend() in ("numba", "numpy")
    with _accel.use_backend("numpy"):
        assert _accel.backend() == "numpy"
    with pytest.raises(ValueError):
        _accel.set_backend("fortran")
