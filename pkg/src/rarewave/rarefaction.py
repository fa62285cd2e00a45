"""Exact 3-rarefaction wave connecting the wall state (v-, 0, theta-) to the
far field (v+, u+, theta+)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .thermo import GasParams, ThermoState, sound_speed


class RarefactionConfigError(ValueError):
    pass


def _check(v_plus, theta_plus, theta_minus):
    if not (v_plus > 0 and theta_minus > 0):
        raise RarefactionConfigError("v_plus and theta_minus must be positive")
    if not theta_plus > theta_minus:
        raise RarefactionConfigError("not a 3-rarefaction configuration")


def v_minus(v_plus: float, theta_plus: float, theta_minus: float, g: GasParams) -> float:
    _check(v_plus, theta_plus, theta_minus)
    return (theta_plus / theta_minus) ** (1.0 / (g.gamma - 1.0)) * v_plus


def u_plus(v_plus: float, theta_plus: float, theta_minus: float, g: GasParams) -> float:
    """Far-field velocity forced by the compatibility condition.

    Closed-form value of int_{v+}^{v-} sqrt(R gamma K) xi^{-(gamma+1)/2} dxi
    with K = v+^(gamma-1) theta+.
    """
    vm = v_minus(v_plus, theta_plus, theta_minus, g)
    K = v_plus ** (g.gamma - 1.0) * theta_plus
    m = 0.5 * (g.gamma - 1.0)
    return 2.0 * math.sqrt(g.R * g.gamma * K) / (g.gamma - 1.0) * (
        v_plus ** (-m) - vm ** (-m)
    )


@dataclass(frozen=True)
class FarFieldSetup:
    v_plus: float
    theta_plus: float
    theta_minus: float
    u_plus: float
    v_minus: float
    K: float
    w_minus: float
    w_plus: float
    delta_r: float

    @classmethod
    def build(cls, v_plus: float, theta_plus: float, theta_minus: float,
              g: GasParams) -> "FarFieldSetup":
        vm = v_minus(v_plus, theta_plus, theta_minus, g)
        up = u_plus(v_plus, theta_plus, theta_minus, g)
        wm = float(sound_speed(vm, theta_minus, g))
        wp = float(sound_speed(v_plus, theta_plus, g))
        return cls(v_plus, theta_plus, theta_minus, up, vm,
                   v_plus ** (g.gamma - 1.0) * theta_plus, wm, wp, wp - wm)

    @property
    def left(self) -> tuple[float, float, float]:
        return (self.v_minus, 0.0, self.theta_minus)

    @property
    def right(self) -> tuple[float, float, float]:
        return (self.v_plus, self.u_plus, self.theta_plus)


def _curve_u(v, setup: FarFieldSetup, g: GasParams):
    m = 0.5 * (g.gamma - 1.0)
    b = 2.0 * math.sqrt(g.R * g.gamma * setup.K) / (g.gamma - 1.0)
    return setup.u_plus + b * (np.power(v, -m) - setup.v_plus ** (-m))


def wave_curve_point(v: float, setup: FarFieldSetup, g: GasParams) -> tuple[float, float]:
    """(u, theta) on R_3 through the far-field state, for v in [v+, v-]."""
    lo, hi = setup.v_plus, setup.v_minus
    if not lo <= v <= hi:
        raise ValueError(f"v={v!r} outside the wave range [{lo}, {hi}]")
    theta = setup.K * v ** (1.0 - g.gamma)
    return float(_curve_u(v, setup, g)), theta


def states_from_speed(w, setup: FarFieldSetup, g: GasParams):
    """Invert lambda_3 along R_3: the state whose sound speed equals ``w``.

    Works on arrays; ``w`` must lie in [w-, w+]. Points with w == w- map
    exactly onto the wall state.
    """
    w = np.asarray(w, dtype=float)
    s = math.sqrt(g.R * g.gamma * setup.K)
    v = np.power(s / w, 2.0 / (g.gamma + 1.0))
    theta = setup.K * np.power(v, 1.0 - g.gamma)
    u = _curve_u(v, setup, g)
    left = w <= setup.w_minus
    right = w >= setup.w_plus
    v = np.where(left, setup.v_minus, np.where(right, setup.v_plus, v))
    u = np.where(left, 0.0, np.where(right, setup.u_plus, u))
    theta = np.where(left, setup.theta_minus, np.where(right, setup.theta_plus, theta))
    return v, u, theta


def riemann_fan(xi, setup: FarFieldSetup, g: GasParams) -> ThermoState:
    """Self-similar solution of the Riemann problem evaluated at xi = x/t."""
    xi_arr = np.clip(np.asarray(xi, dtype=float), setup.w_minus, setup.w_plus)
    v, u, theta = states_from_speed(xi_arr, setup, g)
    if np.ndim(xi) == 0:
        return ThermoState(float(v), float(u), float(theta))
    return ThermoState(v, u, theta)
