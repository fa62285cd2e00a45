import math

import numpy as np
import pytest

from rarewave import GasParams, WaveProfile
from rarewave.diagnostics import discrete_mass, sobolev_norm
from rarewave.ibvp import (Field, Grid, InadmissibleStateError, Perturbation,
                           PicardDivergenceError, SolverConfig, TruncationError, advance_to,
                           cfl_dt, initial_data, picard_local, required_length, simulate,
                           snapshot_name, step)
from rarewave.csvio import read_csv

BUMP = Perturbation(0.05, 3.0, 2.0)


@pytest.fixture(scope="module")
def short_run(prof, gas):
    cfg = SolverConfig(t_end=1.0, snapshot_every=0.25, perturbation=BUMP)
    return simulate(cfg, prof, gas, Grid(100.0, 800))


def test_grid():
    g = Grid(10.0, 20)
    assert g.dx == 0.5 and g.x[0] == 0.0 and g.x[-1] == 10.0 and g.x.size == 21
    with pytest.raises(ValueError):
        Grid(10.0, 8)
    with pytest.raises(ValueError):
        Grid(-1.0, 32)


def test_bump():
    b = Perturbation(2.0, 5.0, 1.5)
    x = np.linspace(0, 10, 200_001)
    assert np.trapezoid(b(x), x) == pytest.approx(b.integral, rel=1e-10)
    assert b(5.0) == 2.0 and b(6.5) == 0.0 and b(3.4) == 0.0


def test_initial_data(prof):
    grid = Grid(100.0, 1000)
    f = initial_data(prof, SolverConfig(perturbation=Perturbation(0.0)), grid)
    v, u, th = prof.arrays(0.0, grid.x)
    assert np.array_equal(f.v, v) and np.array_equal(f.u, u) and np.array_equal(f.theta, th)
    f = initial_data(prof, SolverConfig(perturbation=Perturbation(0.3, 1.5, 1.0)), grid)
    assert f.u[0] == 0.0 and f.theta[0] == 1.0
    phi, _, _ = f.perturbation(prof, grid)
    fine = Grid(100.0, 100_000)
    phi_f = initial_data(prof, SolverConfig(perturbation=Perturbation(0.3, 1.5, 1.0)),
                         fine).perturbation(prof, fine)[0]
    assert discrete_mass(phi_f, fine.dx) == pytest.approx(0.3 * 32 / 35, abs=1e-10)
    assert discrete_mass(phi, grid.dx) == pytest.approx(0.3 * 32 / 35, rel=1e-4)
    for bad in (Perturbation(0.1, 1.0, 1.0), Perturbation(0.1, 99.5, 1.0)):
        with pytest.raises(ValueError, match="violates compatibility/truncation"):
            initial_data(prof, SolverConfig(perturbation=bad), grid)


def _uniform(n):
    return Field(0.0, np.ones(n + 1), np.zeros(n + 1), np.full(n + 1, 2.0))


def test_cfl_dt(gas):
    one = SolverConfig(cfl_hyp=1.0, cfl_par=1.0)
    # v = 1, theta = 2: lambda_3 = 2, so the hyperbolic bound is dx/2
    assert cfl_dt(_uniform(64), gas, Grid(64.0, 64), one) == pytest.approx(0.5)
    assert cfl_dt(_uniform(64), gas, Grid(256.0, 64), one) == pytest.approx(2.0)
    par = SolverConfig(cfl_hyp=1.0, cfl_par=0.1)
    a = cfl_dt(_uniform(64), gas, Grid(64.0, 64), par)
    b = cfl_dt(_uniform(128), gas, Grid(64.0, 128), par)
    assert a == pytest.approx(0.05) and b == pytest.approx(a / 4)
    assert a <= 0.5


def test_constant_state_is_fixed_point():
    # inside the constant zone (x < w-) the profile is the wall state for small t
    g = GasParams()
    p = WaveProfile.from_params(g)
    grid = Grid(0.5, 32)
    f = Field(0.0, np.full(33, 2.0), np.zeros(33), np.ones(33))
    out = step(f, 1e-4, p, g, grid)
    assert np.array_equal(out.v, f.v) and np.array_equal(out.u, f.u)
    assert np.array_equal(out.theta, f.theta)


def test_wall_values_and_determinism(short_run, prof, gas):
    for s in short_run.snapshots:
        assert s.u[0] == 0.0 and s.theta[0] == prof.setup.theta_minus
    again = simulate(SolverConfig(t_end=1.0, snapshot_every=0.25, perturbation=BUMP), prof, gas,
                     Grid(100.0, 800))
    assert again.norms.rows == short_run.norms.rows


def test_snapshot_cadence(short_run):
    np.testing.assert_allclose(short_run.norms.times, [0, 0.25, 0.5, 0.75, 1.0], atol=1e-15)


def test_mass_conserved(short_run):
    m = short_run.norms.column("mass")
    assert np.max(np.abs(m - m[0])) <= 1e-10


def test_zero_perturbation_converges(prof, gas):
    cfg = SolverConfig(t_end=1.0, snapshot_every=1.0, perturbation=Perturbation(0.0))
    sols = [simulate(cfg, prof, gas, Grid(100.0, n)).at(1.0) for n in (250, 500, 1000)]
    e1 = math.sqrt(sum(sobolev_norm(a[::1] - b[::2], 0.4) ** 2 for a, b in
                       zip((sols[0].v, sols[0].u), (sols[1].v, sols[1].u))))
    e2 = math.sqrt(sum(sobolev_norm(a[::1] - b[::2], 0.2) ** 2 for a, b in
                       zip((sols[1].v, sols[1].u), (sols[2].v, sols[2].u))))
    assert math.log2(e1 / e2) >= 1.0


def test_inadmissible_state_aborts(prof, gas):
    grid = Grid(100.0, 400)
    f = initial_data(prof, SolverConfig(perturbation=Perturbation(0.0)), grid)
    v = np.array(f.v)
    v[200] = 0.2
    with pytest.raises(InadmissibleStateError, match="solution left admissible set"):
        step(Field(0.0, v, f.u, f.theta), 1e-4, prof, gas, grid)


def test_truncation_guard(prof, gas):
    cfg = SolverConfig(t_end=5.0, perturbation=Perturbation(0.0))
    assert required_length(prof, cfg) > 2 * 6.0
    with pytest.raises(TruncationError):
        simulate(cfg, prof, gas, Grid(40.0, 400))


def test_csv_output(tmp_path, prof, gas):
    cfg = SolverConfig(t_end=0.5, snapshot_every=0.25, perturbation=BUMP)
    res = simulate(cfg, prof, gas, Grid(100.0, 400), output_dir=tmp_path)
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == sorted([snapshot_name(0.0), snapshot_name(0.25), snapshot_name(0.5),
                            "norms.csv"])
    assert snapshot_name(0.25) == "snap_t0000000000.25.csv"
    header, rows = read_csv(tmp_path / snapshot_name(0.5))
    assert header == ["x", "v", "u", "theta", "phi", "psi", "xi"] and len(rows) == 401
    header, rows = read_csv(tmp_path / "norms.csv")
    assert header[0] == "t" and len(rows) == 3
    assert len(res.files) == 4


def test_picard_zero_start_in_constant_zone(prof, gas):
    grid = Grid(0.5, 32)
    f = Field(0.0, np.full(33, 2.0), np.zeros(33), np.ones(33))
    res = picard_local(f, 0.05, 3, prof, gas, grid)
    assert res.distances == [0.0, 0.0, 0.0]
    assert np.array_equal(res.field.v, f.v)


def test_picard_contracts_and_agrees(prof, gas):
    cfg = SolverConfig(perturbation=Perturbation(0.01, 3.0, 2.0))
    grid = Grid(40.0, 400)
    f0 = initial_data(prof, cfg, grid)
    res = picard_local(f0, 0.05, 5, prof, gas, grid, cfg)
    d = res.distances
    assert all(b < 0.5 * a for a, b in zip(d, d[1:]))
    ref = advance_to(f0, res.field.t, prof, grid, cfg)
    diff = math.sqrt(sum(sobolev_norm(a - b, grid) ** 2 for a, b in
                         ((res.field.v, ref.v), (res.field.u, ref.u),
                          (res.field.theta, ref.theta))))
    jet = prof.jet(ref.t, grid.x)
    size = math.sqrt(sum(sobolev_norm(a, grid) ** 2 for a in
                         (ref.v - jet.v, ref.u - jet.u, ref.theta - jet.theta)))
    assert diff <= 5 * (res.dt + grid.dx**2) * size


def test_picard_rejects_bad_window(prof, gas):
    f = Field(0.0, np.full(33, 2.0), np.zeros(33), np.ones(33))
    with pytest.raises(ValueError):
        picard_local(f, 0.5, 2, prof, gas, Grid(0.5, 32))
    with pytest.raises(ValueError):
        picard_local(f, 0.05, 0, prof, gas, Grid(0.5, 32))


def test_picard_divergence_detected(prof, gas, monkeypatch):
    import itertools

    import rarewave.ibvp as ibvp
    grid = Grid(40.0, 200)
    f0 = initial_data(prof, SolverConfig(perturbation=Perturbation(0.01, 3.0, 2.0)), grid)
    # force growing iterate distances
    counter = itertools.count(1)
    monkeypatch.setattr(ibvp, "sobolev_norm", lambda *a, **k: float(next(counter)))
    with pytest.raises(PicardDivergenceError, match="outside local-existence regime"):
        picard_local(f0, 0.01, 4, prof, gas, grid)
