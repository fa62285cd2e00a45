import numpy as np
import pytest

from rarewave.cli import main
from rarewave.config import ConfigError, RunConfig, parse_config
from rarewave.csvio import read_csv
from rarewave.ibvp import snapshot_name


def test_defaults():
    cfg = parse_config("")
    assert cfg == RunConfig()
    s = cfg.profile().setup
    assert s.v_minus == 2.0 and s.u_plus == pytest.approx(4 * (1 - 2**-0.5))
    assert cfg.grid().L > s.w_plus * (1 + cfg.t_end)


def test_comments_and_types():
    cfg = parse_config("# run\nN = 512  # cells\nt_end = 2\noutput_dir = res\n")
    assert cfg.N == 512 and cfg.t_end == 2.0 and cfg.output_dir == "res"


@pytest.mark.parametrize("text, match", [
    ("theta_minus = 3", "theta_plus must exceed theta_minus"),
    ("q = 5", "q"),
    ("colour = red", "unknown key"),
    ("N = 10\nN = 20", "duplicate key"),
    ("N = 1.5", "N: expected a integer"),
    ("eps = abc", "eps: expected a number"),
    ("gamma", "key = value"),
])
def test_rejections(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def test_riemann(capsys):
    assert main(["riemann", "--xi", "1"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "xi,v,u,theta"
    xi, v, u, th = map(float, lines[1].split(","))
    assert xi == 1.0 and v == pytest.approx(2 ** (2 / 3), rel=1e-12)
    assert u == pytest.approx(4 * (1 - 2**-0.5) + 4 * (2 ** (-1 / 3) - 1), rel=1e-12)


def test_profile_at_zero(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("RAREWAVE_OUTDIR", str(tmp_path))
    assert main(["profile", "--t", "0", "--n", "101", "--derivs"]) == 0
    path = capsys.readouterr().out.strip()
    assert path.startswith(str(tmp_path))
    header, rows = read_csv(path)
    assert header[:4] == ["x", "v", "u", "theta"] and len(header) == 10
    assert rows[0][:4] == pytest.approx([0.0, 2.0, 0.0, 1.0], abs=1e-12)


def test_errors_exit_nonzero(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("theta_minus = 3\n")
    assert main(["simulate", "--config", str(bad)]) == 1
    err = capsys.readouterr().err
    assert err.startswith("error:") and len(err.strip().splitlines()) == 1
    assert main(["riemann", "--xi", "1", "--config", str(tmp_path / "missing")]) == 1


def test_simulate_zero_perturbation(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"amplitude = 0\nN = 400\nt_end = 1\nsnapshot_every = 0.5\n"
                   f"output_dir = {tmp_path / 'out'}\n")
    assert main(["simulate", "--config", str(cfg)]) == 0
    out = tmp_path / "out"
    assert (out / "norms.csv").exists()
    assert sorted(p.name for p in out.glob("snap_t*.csv")) == sorted(
        snapshot_name(t) for t in (0.0, 0.5, 1.0))
    header, rows = read_csv(out / "norms.csv")
    L = RunConfig(N=400, t_end=1.0).grid().L
    dx = L / 400
    l2 = np.array(rows)[:, header.index("l2")]
    assert np.all(l2 < 10 * dx)


def test_picard_check(tmp_path, capsys):
    cfg = tmp_path / "p.cfg"
    cfg.write_text(f"L = 40\nN = 400\namplitude = 0.01\ncenter = 10\nwidth = 4\n"
                   f"output_dir = {tmp_path}\n")
    assert main(["picard-check", "--config", str(cfg), "--window", "0.05", "--iters", "4"]) == 0
    out = capsys.readouterr().out
    assert "difference to the solver" in out
    _, rows = read_csv(tmp_path / "picard.csv")
    d = [r[1] for r in rows]
    assert len(d) == 4 and d[-1] < d[0]
