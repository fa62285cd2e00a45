import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rarewave.diagnostics import (NORM_COLUMNS, NormSeries, boundary_relation_356,
                                  boundary_residual_353, discrete_mass,
                                  energy_identity_residual, energy_total, fit_decay_exponent,
                                  phi_fn, sobolev_norm)
from rarewave.ibvp import Field, Grid, Perturbation, SolverConfig, initial_data, simulate
from rarewave.csvio import read_csv

BUMP = Perturbation(0.05, 3.0, 2.0)


@pytest.fixture(scope="module")
def runs(prof, gas):
    cfg = SolverConfig(t_end=1.0, snapshot_every=0.5, perturbation=BUMP)
    return [simulate(cfg, prof, gas, Grid(100.0, n)) for n in (1000, 2000, 4000)]


def test_sobolev_norm_exponential():
    grid = Grid(40.0, 10_000)
    f = np.exp(-grid.x)
    assert sobolev_norm(f, grid, 0) == pytest.approx(1 / math.sqrt(2), abs=1e-4)
    assert sobolev_norm(f, grid, 1) == pytest.approx(1.0, abs=1e-3)
    assert sobolev_norm(f, grid, 2) == pytest.approx(math.sqrt(1.5), abs=1e-3)
    assert sobolev_norm(np.zeros(100), 0.1, 2) == 0.0
    with pytest.raises(ValueError):
        sobolev_norm(f, grid, 3)
    with pytest.raises(ValueError):
        sobolev_norm(np.ones(5), 0.1, 2)


def test_phi_fn():
    assert phi_fn(1.0) == 0.0
    assert phi_fn(math.e) == pytest.approx(math.e - 2, rel=1e-15)
    with pytest.raises(ValueError):
        phi_fn(0.0)
    s = np.linspace(0.5, 2.0, 20_001)
    s = s[s != 1.0]
    ratio = phi_fn(s) / (s - 1) ** 2
    # exact extremes: 1 - ln 2 at s = 2 and 4 ln 2 - 2 at s = 1/2
    assert ratio.min() >= 0.19
    assert ratio.min() == pytest.approx(1 - math.log(2), rel=1e-9)
    assert ratio.max() == pytest.approx(4 * math.log(2) - 2, rel=1e-9)
    assert np.all(np.diff(phi_fn(s[s < 1]), 2) >= 0)


@given(st.floats(1e-3, 1e3))
def test_phi_nonnegative(s):
    assert phi_fn(s) >= 0.0


def test_energy_zero_and_quadratic_proxy(prof, gas):
    grid = Grid(100.0, 1000)
    z = initial_data(prof, SolverConfig(perturbation=Perturbation(0.0)), grid)
    assert energy_total(z, prof, gas, grid) == 0.0
    f = initial_data(prof, SolverConfig(perturbation=Perturbation(0.05, 20.0, 4.0)), grid)
    j = prof.jet(0.0, grid.x)
    phi, psi, xi = f.perturbation(prof, grid)
    proxy = np.trapezoid(gas.R * j.theta / (2 * j.v**2) * phi**2 + psi**2 / 2
                         + gas.R / (2 * (gas.gamma - 1) * j.theta) * xi**2, dx=grid.dx)
    e = energy_total(f, prof, gas, grid)
    assert 0.5 * proxy <= e <= 2 * proxy
    fine = Grid(100.0, 4000)
    f2 = initial_data(prof, SolverConfig(perturbation=Perturbation(0.05, 20.0, 4.0)), fine)
    assert energy_total(f2, prof, gas, fine) == pytest.approx(e, rel=1e-3)


def test_energy_identity_zero_perturbation(prof, gas):
    grid = Grid(100.0, 1000)
    trio = [Field(t, *prof.arrays(t, grid.x)) for t in (0.5, 0.51, 0.52)]
    assert energy_identity_residual(trio, prof, gas, grid) < 1e-8


def test_energy_residual_halves(runs, prof, gas):
    res = [energy_identity_residual(r.trios[-1][0], prof, gas, r.grid, r.trios[-1][1]) for r in runs[:2]]
    assert res[1] <= 0.5 * res[0]


def test_energy_and_dissipation_signs(runs):
    for r in runs:
        assert np.all(r.norms.column("energy") >= 0)
        assert np.all(np.diff(r.norms.column("diss_cum")) >= 0)


def test_boundary_residuals_zero_perturbation(prof, gas):
    grid = Grid(100.0, 1000)
    trio = [Field(t, *prof.arrays(t, grid.x)) for t in (0.5, 0.51, 0.52)]
    assert boundary_residual_353(trio[1], prof, gas, grid) < 1e-12
    assert boundary_relation_356(trio, prof, gas, grid) < 1e-10


def test_boundary_residuals_refine(runs, prof, gas):
    r353 = [boundary_residual_353(r.at(1.0), prof, gas, r.grid) for r in runs]
    r356 = [boundary_relation_356(r.trios[-1][0], prof, gas, r.grid, r.trios[-1][1])
            for r in runs]
    for seq in (r353, r356):
        slope = -np.polyfit(np.arange(3), np.log2(seq), 1)[0]
        assert slope >= 1.0


def test_boundary_residuals_detect_non_solutions(runs, prof, gas):
    r = runs[0]
    x = r.grid.x
    trio = [Field(f.t, f.v, f.u, f.theta + 0.2 * (1 + 5 * f.t) * x * np.exp(-x))
            for f in r.trios[-1][0]]
    assert boundary_residual_353(trio[1], prof, gas, r.grid) > 0.05
    assert boundary_relation_356(trio, prof, gas, r.grid) > 0.05
    with pytest.raises(ValueError):
        boundary_relation_356(trio[::-1], prof, gas, r.grid)


def test_fit_decay_exponent(prof):
    t = np.linspace(0, 100, 50)
    alpha, r2 = fit_decay_exponent((t, (1 + t) ** -0.5), 1.0)
    assert alpha == pytest.approx(-0.5, abs=1e-12) and r2 == pytest.approx(1.0)
    alpha, r2 = fit_decay_exponent((t, np.full(50, 3.0)), 1.0)
    assert alpha == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError, match="cannot fit power law"):
        fit_decay_exponent((t, np.zeros(50)), 1.0)
    with pytest.raises(ValueError):
        fit_decay_exponent((t[:5], t[:5] + 1), 1.0)
    times = np.geomspace(10, 1000, 30)
    norms = [np.sqrt(np.trapezoid(prof.jet(s, x).u_x ** 2, x))
             for s, x in ((s, np.linspace(0, 2.5 * (1 + s) + 80, 20_001)) for s in times)]
    assert fit_decay_exponent((times, np.array(norms)), 1.0)[0] == pytest.approx(-0.5, abs=0.1)


def test_norm_series(tmp_path):
    ns = NormSeries()
    row = {c: 1.0 for c in NORM_COLUMNS}
    ns.append(dict(row, t=0.0))
    ns.append(dict(row, t=1.0))
    with pytest.raises(ValueError):
        ns.append(dict(row, t=1.0))
    ns.to_csv(tmp_path / "n.csv")
    header, rows = read_csv(tmp_path / "n.csv")
    assert tuple(header) == NORM_COLUMNS and len(rows) == 2


def test_discrete_mass_is_second_order():
    for n in (100, 200):
        x = np.linspace(0, 10, n + 1)
        err = abs(discrete_mass(np.exp(-x), 10 / n) - (1 - math.exp(-10)))
        assert err < 0.1 * (10 / n) ** 2
