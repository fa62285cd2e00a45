"""Ideal polytropic gas: equation of state, characteristic speeds, flow
regimes at the wall and the mass-coordinate transform."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid


@dataclass(frozen=True)
class GasParams:
    """Gas constants and the smoothing parameters of the approximate wave."""

    R: float = 1.0
    gamma: float = 2.0
    k: float = 1.0
    A: float = 1.0
    q: int = 10
    eps: float = 0.5

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError("gamma must be > 1")
        for name in ("R", "k", "A"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be > 0")
        if int(self.q) != self.q or self.q < 10:
            raise ValueError("q must be an integer with q >= 10")
        if not 0.0 < self.eps <= 1.0:
            raise ValueError("eps must lie in (0, 1]")
        object.__setattr__(self, "q", int(self.q))

    @property
    def cv(self) -> float:
        """Specific heat R/(gamma-1)."""
        return self.R / (self.gamma - 1.0)


@dataclass(frozen=True)
class ThermoState:
    """State (v, u, theta) in Lagrangian variables; fields may be arrays."""

    v: float | np.ndarray
    u: float | np.ndarray
    theta: float | np.ndarray

    def __post_init__(self):
        if not np.all(np.asarray(self.v) > 0):
            raise ValueError("specific volume must be positive")
        if not np.all(np.asarray(self.theta) > 0):
            raise ValueError("temperature must be positive")

    @property
    def rho(self):
        return 1.0 / self.v

    def as_tuple(self):
        return (self.v, self.u, self.theta)


class FlowRegion(str, enum.Enum):
    SUB_PLUS = "sub_plus"
    SUB_MINUS = "sub_minus"
    SUB_ZERO = "sub_zero"
    SUPER_PLUS = "super_plus"
    SUPER_MINUS = "super_minus"
    TRANS_PLUS = "trans_plus"
    TRANS_MINUS = "trans_minus"


@dataclass(frozen=True)
class BoundaryCase:
    case_id: str
    prescribed: tuple[str, ...]
    # boundary data of the viscous counterpart, shown for comparison only
    viscous_case: str = ""
    viscous_prescribed: tuple[str, ...] = ()


class TransonicBoundaryError(ValueError):
    pass


def pressure(s: ThermoState, g: GasParams):
    return g.R * s.theta / s.v


def pressure_from_entropy(v, s, g: GasParams):
    """p(v, s) = A v^-gamma exp((gamma-1) s / R)."""
    return g.A * np.power(v, -g.gamma) * np.exp((g.gamma - 1.0) * s / g.R)


def entropy(s: ThermoState, g: GasParams):
    """Specific entropy, the inverse of :func:`pressure_from_entropy` at fixed v."""
    return g.R / (g.gamma - 1.0) * np.log(
        g.R * s.theta * np.power(s.v, g.gamma - 1.0) / g.A
    )


def sound_speed(v, theta, g: GasParams):
    """Lagrangian sound speed sqrt(R gamma theta)/v, i.e. lambda_3."""
    return np.sqrt(g.R * g.gamma * theta) / v


def lagrangian_speeds(s: ThermoState, g: GasParams):
    c = sound_speed(s.v, s.theta, g)
    return (-c, 0.0 * c, c)


def eulerian_sound_speed(theta, g: GasParams):
    """Isothermal speed sqrt(R theta) that separates the wall regimes."""
    return math.sqrt(g.R * theta)


def classify_region(rho: float, u: float, theta: float, g: GasParams) -> FlowRegion:
    if not (rho > 0 and theta > 0):
        raise ValueError("rho and theta must be positive")
    cs = eulerian_sound_speed(theta, g)
    if u == cs:
        return FlowRegion.TRANS_PLUS
    if u == -cs:
        return FlowRegion.TRANS_MINUS
    if u == 0.0:
        return FlowRegion.SUB_ZERO
    if u > cs:
        return FlowRegion.SUPER_PLUS
    if u < -cs:
        return FlowRegion.SUPER_MINUS
    return FlowRegion.SUB_PLUS if u > 0 else FlowRegion.SUB_MINUS


_VISCOUS = {
    "outflow": ("I", ("u", "theta")),
    "impermeable": ("II", ("u", "theta")),
    "inflow": ("III", ("rho", "u", "theta")),
}


def viscous_case_for(u_minus: float) -> tuple[str, tuple[str, ...]]:
    """Boundary case of the viscous system, keyed on the sign of the wall velocity."""
    if u_minus < 0:
        return _VISCOUS["outflow"]
    if u_minus == 0:
        return _VISCOUS["impermeable"]
    return _VISCOUS["inflow"]


def boundary_case_for(region: FlowRegion) -> BoundaryCase:
    region = FlowRegion(region)
    if region in (FlowRegion.TRANS_PLUS, FlowRegion.TRANS_MINUS):
        raise TransonicBoundaryError(
            "transonic: boundary-condition count undefined for this regime"
        )
    if region is FlowRegion.SUPER_MINUS:
        vc = viscous_case_for(-1.0)
        return BoundaryCase("case1", ("theta",), *vc)
    if region is FlowRegion.SUPER_PLUS:
        vc = viscous_case_for(1.0)
        return BoundaryCase("case3", ("rho", "u", "theta"), *vc)
    sign = {FlowRegion.SUB_PLUS: 1.0, FlowRegion.SUB_MINUS: -1.0}.get(region, 0.0)
    return BoundaryCase("case2", ("u", "theta"), *viscous_case_for(sign))


def euler_to_lagrange(density, X: float) -> np.ndarray:
    """Mass coordinate x(x~) = int_0^x~ rho dy at t = 0 on a uniform grid over [0, X].

    Returns the cumulative composite-trapezoid integral, one value per sample.
    """
    rho = np.asarray(density, dtype=float)
    if rho.ndim != 1 or rho.size < 2:
        raise ValueError("density must be a 1-d array with at least two samples")
    if np.any(rho <= 0):
        raise ValueError("density samples must be strictly positive")
    return cumulative_trapezoid(rho, dx=X / (rho.size - 1), initial=0.0)
