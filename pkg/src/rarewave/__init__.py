"""Rarefaction waves of the compressible Navier-Stokes equations with an
impermeable wall: Riemann data, smooth approximate profiles, a wall IBVP
solver and its diagnostics."""

from .thermo import GasParams, ThermoState, FlowRegion, classify_region, boundary_case_for
from .rarefaction import FarFieldSetup, wave_curve_point, riemann_fan
from .smooth_profile import WaveProfile
from .ibvp import Grid, Field, Perturbation, SolverConfig, simulate, step, picard_local

__all__ = [
    "GasParams", "ThermoState", "FlowRegion", "classify_region", "boundary_case_for",
    "FarFieldSetup", "wave_curve_point", "riemann_fan", "WaveProfile",
    "Grid", "Field", "Perturbation", "SolverConfig", "simulate", "step", "picard_local",
]
__version__ = "0.1.0"
