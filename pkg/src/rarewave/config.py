"""Run configuration: plain ``key = value`` lines, ``#`` starts a comment."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

from .ibvp import Grid, Perturbation, SolverConfig, required_length
from .rarefaction import RarefactionConfigError, FarFieldSetup
from .smooth_profile import WaveProfile
from .thermo import GasParams


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    R: float = 1.0
    gamma: float = 2.0
    k: float = 1.0
    v_plus: float = 1.0
    theta_plus: float = 2.0
    theta_minus: float = 1.0
    q: int = 10
    eps: float = 0.5
    L: float = 0.0          # 0 picks the shortest domain that passes the truncation check
    N: int = 2048
    cfl_hyp: float = 0.5
    cfl_par: float = 0.4
    t_end: float = 10.0
    snapshot_every: float = 0.5
    amplitude: float = 0.01
    center: float = 10.0
    width: float = 4.0
    truncation_tol: float = 1e-6
    max_wall_seconds: float = 0.0   # 0 disables the guard
    output_dir: str = "out"

    def gas(self) -> GasParams:
        return GasParams(R=self.R, gamma=self.gamma, k=self.k, q=self.q, eps=self.eps)

    def profile(self) -> WaveProfile:
        return WaveProfile.from_params(self.gas(), self.v_plus, self.theta_plus,
                                       self.theta_minus)

    def solver(self) -> SolverConfig:
        return SolverConfig(
            cfl_hyp=self.cfl_hyp, cfl_par=self.cfl_par, t_end=self.t_end,
            snapshot_every=self.snapshot_every,
            perturbation=Perturbation(self.amplitude, self.center, self.width),
            truncation_tol=self.truncation_tol,
            max_wall_seconds=self.max_wall_seconds or None,
        )

    def grid(self) -> Grid:
        L = self.L
        if L == 0.0:
            L = math.ceil(required_length(self.profile(), self.solver()))
        return Grid(float(L), self.N)

    def with_(self, **kw) -> "RunConfig":
        return validate(replace(self, **kw))


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key, raw):
    kind = _TYPES[key]
    if kind == "str":
        return raw
    try:
        if kind == "int":
            val = float(raw)
            if val != int(val):
                raise ValueError
            return int(val)
        val = float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a {'integer' if kind == 'int' else 'number'}, "
                          f"got {raw!r}") from None
    if not math.isfinite(val):
        raise ConfigError(f"{key}: value must be finite")
    return val


def validate(cfg: RunConfig) -> RunConfig:
    """Re-run every module-level check; errors name the offending key."""
    if not cfg.theta_plus > cfg.theta_minus:
        raise ConfigError("theta_plus must exceed theta_minus")
    if cfg.q < 10:
        raise ConfigError("q: must satisfy q >= 10")
    try:
        g = cfg.gas()
        FarFieldSetup.build(cfg.v_plus, cfg.theta_plus, cfg.theta_minus, g)
        cfg.solver()
        if cfg.L < 0:
            raise ValueError("L must be positive (or 0 for automatic)")
        if cfg.max_wall_seconds < 0:
            raise ValueError("max_wall_seconds must be >= 0")
        Grid(cfg.L or 1.0, cfg.N)
    except (ValueError, RarefactionConfigError) as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def parse_config(text: str) -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _TYPES:
            raise ConfigError(f"unknown key {key!r}")
        if key in values:
            raise ConfigError(f"duplicate key {key!r}")
        values[key] = _convert(key, raw)
    return validate(RunConfig(**values))


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())
