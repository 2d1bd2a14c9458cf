"""Ground-state coherence relaxation in a buffer-gas cell.

The coherence decay rate is the sum of a wall term (diffusion through the
buffer gas to the walls, falling as 1/p) and a collisional term (growing as p):

    gamma12 = A * D0 * p0/p + N0 * v_r * sigma2 * p/p0

All rates are in s^-1. The dark-resonance FWHM in the hyperfine detuning
variable is gamma12/pi; in the pulse-repetition variable it is additionally
divided by the subharmonic order m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .core import (
    CONSTANTS,
    AtomSpec,
    BufferGasSpec,
    CellGeometry,
    ExperimentConditions,
    mean_relative_speed,
    reduced_mass,
)
from .errors import ConfigError, InsufficientGasData, NoInteriorMinimum

__all__ = [
    "BESSEL_J0_FIRST_ZERO",
    "RelaxationBreakdown",
    "OptimalPressure",
    "geometry_factor",
    "diffusion_rate",
    "collision_rate",
    "gamma12",
    "optimal_pressure",
]

BESSEL_J0_FIRST_ZERO = 2.404825557695773


@dataclass(frozen=True)
class RelaxationBreakdown:
    diffusion_rate: float
    collision_rate: float
    total: float
    fwhm_hf: float

    def fwhm_pulse_rep(self, m: int) -> float:
        """Linewidth expressed in the pulse-repetition-frequency variable."""
        return self.fwhm_hf / m


@dataclass(frozen=True)
class OptimalPressure:
    pressure: float
    breakdown: RelaxationBreakdown

    @property
    def pressure_mbar(self) -> float:
        return self.pressure / 100.0


def geometry_factor(cell: CellGeometry) -> float:
    """Lowest diffusion mode of a closed cylinder, in cm^-2."""
    length_cm = cell.length * 100.0
    radius_cm = cell.radius * 100.0
    return (math.pi / length_cm) ** 2 + (BESSEL_J0_FIRST_ZERO / radius_cm) ** 2


def _thermal_speed_cm(atom: AtomSpec, gas: BufferGasSpec, temperature: float) -> float:
    mu = reduced_mass(atom.mass, gas.mass)
    return 100.0 * mean_relative_speed(temperature, mu)


def _diffusion_prefactor(cell, gas, temperature, temperature_scaling=True, a_factor=None) -> float:
    """A * D0 * p0 [* (T/T0)^1.5]; divide by pressure for the rate."""
    if gas.d0 is None:
        raise InsufficientGasData(gas.name, "d0")
    a = geometry_factor(cell) if a_factor is None else a_factor
    scale = (temperature / gas.t0) ** 1.5 if temperature_scaling else 1.0
    return a * gas.d0 * CONSTANTS.p0 * scale


def _collision_prefactor(gas, atom, temperature) -> float:
    """N0 * v_r * sigma2 / p0; multiply by pressure for the rate."""
    if gas.sigma2 is None:
        raise InsufficientGasData(gas.name, "sigma2")
    v = _thermal_speed_cm(atom, gas, temperature)
    return CONSTANTS.loschmidt_cm3 * v * gas.sigma2 / CONSTANTS.p0


def diffusion_rate(cell: CellGeometry, gas: BufferGasSpec, cond: ExperimentConditions,
                   temperature_scaling: bool = True, a_factor: Optional[float] = None) -> float:
    """Wall relaxation rate A*D0*(p0/p)*(T/T0)^1.5.

    ``a_factor`` overrides the cylinder geometry factor (cm^-2) for other cell
    shapes; ``temperature_scaling=False`` drops the (T/T0)^1.5 factor.
    """
    return _diffusion_prefactor(cell, gas, cond.temperature, temperature_scaling, a_factor) / cond.pressure


def collision_rate(gas: BufferGasSpec, cond: ExperimentConditions, atom: AtomSpec) -> float:
    return _collision_prefactor(gas, atom, cond.temperature) * cond.pressure


_TERMS = ("both", "diffusion", "collision")


def gamma12(cell: CellGeometry, gas: BufferGasSpec, cond: ExperimentConditions, atom: AtomSpec,
            terms: str = "both", temperature_scaling: bool = True,
            a_factor: Optional[float] = None) -> RelaxationBreakdown:
    """Total ground-coherence relaxation rate and its two contributions.

    ``terms`` selects ``"both"`` (requires d0 and sigma2), or a single term
    when the other constant is unknown or known to be negligible.
    """
    if terms not in _TERMS:
        raise ConfigError(f"terms must be one of {_TERMS}, got {terms!r}")
    d = diffusion_rate(cell, gas, cond, temperature_scaling, a_factor) if terms != "collision" else 0.0
    c = collision_rate(gas, cond, atom) if terms != "diffusion" else 0.0
    total = d + c
    return RelaxationBreakdown(d, c, total, total / math.pi)


def optimal_pressure(cell: CellGeometry, gas: BufferGasSpec, atom: AtomSpec, temperature: float,
                     temperature_scaling: bool = True,
                     a_factor: Optional[float] = None) -> OptimalPressure:
    """Pressure minimising gamma12, p* = sqrt(a/b) for gamma12 = a/p + b*p."""
    a = _diffusion_prefactor(cell, gas, temperature, temperature_scaling, a_factor)
    b = _collision_prefactor(gas, atom, temperature)
    if a <= 0 or b <= 0:
        raise NoInteriorMinimum(
            f"no interior minimum for {gas.name}: both d0 and sigma2 must be > 0 "
            f"(d0={gas.d0!r}, sigma2={gas.sigma2!r})"
        )
    p_star = math.sqrt(a / b)
    d, c = a / p_star, b * p_star
    return OptimalPressure(p_star, RelaxationBreakdown(d, c, d + c, (d + c) / math.pi))
