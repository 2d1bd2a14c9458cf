"""Physical constants, domain records and unit conversions.

Everything inside the package is SI except the two buffer-gas constants that
are conventionally quoted in CGS (``d0`` in cm^2/s and ``sigma2`` in cm^2) and
the pressure-shift coefficient, which is carried in Hz/mbar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import scipy.constants as sc

from .errors import ConfigError, DomainError

__all__ = [
    "PhysicalConstants",
    "CONSTANTS",
    "AMU",
    "AtomSpec",
    "BufferGasSpec",
    "CellGeometry",
    "ExperimentConditions",
    "RB87",
    "GAS_TABLE",
    "get_gas",
    "reduced_mass",
    "mean_relative_speed",
    "convert_pressure",
    "convert_per_pressure",
]

AMU = sc.m_u


@dataclass(frozen=True)
class PhysicalConstants:
    p0_mbar: float = 1013.0
    loschmidt_cm3: float = sc.physical_constants["Loschmidt constant (273.15 K, 101.325 kPa)"][0] * 1e-6
    k_B: float = sc.k
    mu_B: float = sc.physical_constants["Bohr magneton"][0]
    mu_N: float = sc.physical_constants["nuclear magneton"][0]
    h: float = sc.h

    @property
    def p0(self) -> float:
        """Reference pressure in Pa."""
        return self.p0_mbar * 100.0


CONSTANTS = PhysicalConstants()


def _is_half_integer(x: float) -> bool:
    return x >= 0 and abs(2 * x - round(2 * x)) < 1e-12


@dataclass(frozen=True)
class AtomSpec:
    """Alkali isotope with a J = 1/2 ground state.

    ``g_I`` is in nuclear magnetons with the sign convention in which the
    Zeeman Hamiltonian reads ``(g_J mu_B J_z + g_I mu_N I_z) B``; for 87Rb this
    makes ``g_I`` negative.
    """

    name: str
    nu12_free: float
    nuclear_spin: float
    g_J: float
    g_I: float
    mass: float
    gamma_e: float
    branching_lower: float = 0.5
    j_ground: float = 0.5

    def __post_init__(self):
        problems = []
        if not self.nu12_free > 0:
            problems.append("nu12_free must be > 0")
        if not self.gamma_e > 0:
            problems.append("gamma_e must be > 0")
        if not self.mass > 0:
            problems.append("mass must be > 0")
        if not 0.0 <= self.branching_lower <= 1.0:
            problems.append("branching_lower must lie in [0, 1]")
        if not _is_half_integer(self.nuclear_spin):
            problems.append("nuclear_spin must be a non-negative multiple of 1/2")
        if problems:
            raise DomainError(f"AtomSpec {self.name!r}: " + "; ".join(problems))


@dataclass(frozen=True)
class BufferGasSpec:
    """Buffer-gas constants.

    ``d0`` [cm^2/s] is the Rb diffusion constant at ``p0`` and ``t0``;
    ``sigma2`` [cm^2] the ground-state decoherence cross section;
    ``shift_coeff`` [Hz/mbar] the linear pressure shift of the 0-0 line.
    Missing constants are ``None``.
    """

    name: str
    mass: float
    d0: Optional[float] = None
    sigma2: Optional[float] = None
    shift_coeff: float = 0.0
    t0: float = 273.15

    def __post_init__(self):
        if not self.mass > 0:
            raise DomainError(f"BufferGasSpec {self.name!r}: mass must be > 0")
        if self.d0 is not None and self.d0 < 0:
            raise DomainError(f"BufferGasSpec {self.name!r}: d0 must be >= 0")
        if self.sigma2 is not None and self.sigma2 < 0:
            raise DomainError(f"BufferGasSpec {self.name!r}: sigma2 must be >= 0")
        if not self.t0 > 0:
            raise DomainError(f"BufferGasSpec {self.name!r}: t0 must be > 0")

    def with_(self, **changes) -> "BufferGasSpec":
        return replace(self, **changes)


@dataclass(frozen=True)
class CellGeometry:
    """Cylindrical cell; lengths in m."""

    length: float
    radius: float

    def __post_init__(self):
        if not (self.length > 0 and self.radius > 0):
            raise DomainError("cell length and radius must be > 0")


DEFAULT_CELL = CellGeometry(length=0.05, radius=0.01)


@dataclass(frozen=True)
class ExperimentConditions:
    """Pressure [Pa], temperature [K], axial field [T], cell."""

    pressure: float
    temperature: float
    b_field: float = 0.0
    cell: CellGeometry = field(default_factory=lambda: DEFAULT_CELL)

    def __post_init__(self):
        if not self.pressure > 0:
            raise DomainError("pressure must be > 0")
        if not self.temperature > 0:
            raise DomainError("temperature must be > 0")
        if not self.b_field >= 0:
            raise DomainError("b_field must be >= 0")

    @classmethod
    def lab(cls, pressure_mbar: float, temperature_c: float, b_field_ut: float = 0.0,
            cell: CellGeometry = DEFAULT_CELL) -> "ExperimentConditions":
        """Build from the units used on the bench (mbar, deg C, microtesla)."""
        return cls(
            pressure=convert_pressure(pressure_mbar, "mbar"),
            temperature=temperature_c + 273.15,
            b_field=b_field_ut * 1e-6,
            cell=cell,
        )

    @property
    def pressure_mbar(self) -> float:
        return self.pressure / 100.0


RB87 = AtomSpec(
    name="Rb87",
    nu12_free=6_834_682_610.904,
    nuclear_spin=1.5,
    g_J=2.00233113,
    g_I=-0.0009951414 * CONSTANTS.mu_B / CONSTANTS.mu_N,
    mass=86.909180531 * AMU,
    gamma_e=2 * math.pi * 5.75e6,
    branching_lower=0.5,
)

# Masses only; transport and collision constants are config inputs except
# the xenon decoherence cross section measured with this technique.
GAS_TABLE = {
    "He": BufferGasSpec("He", 4.002602 * AMU),
    "Ne": BufferGasSpec("Ne", 20.1797 * AMU),
    "Ar": BufferGasSpec("Ar", 39.948 * AMU),
    "Kr": BufferGasSpec("Kr", 83.798 * AMU),
    "Xe": BufferGasSpec("Xe", 131.293 * AMU, sigma2=1.1e-18),
}


def get_gas(name: str) -> BufferGasSpec:
    key = name.strip().capitalize()
    try:
        return GAS_TABLE[key]
    except KeyError:
        raise ConfigError(f"unknown buffer gas {name!r}; known: {', '.join(GAS_TABLE)}") from None


def reduced_mass(m1: float, m2: float) -> float:
    if not (m1 > 0 and m2 > 0):
        raise DomainError(f"masses must be positive, got {m1!r}, {m2!r}")
    return m1 * m2 / (m1 + m2)


def mean_relative_speed(temperature: float, mu: float) -> float:
    """Maxwell-Boltzmann mean relative speed sqrt(8 kT / (pi mu)) in m/s."""
    if not (temperature > 0 and mu > 0):
        raise DomainError(f"temperature and reduced mass must be positive, got {temperature!r}, {mu!r}")
    return math.sqrt(8.0 * CONSTANTS.k_B * temperature / (math.pi * mu))


_PA_PER_UNIT = {
    "pa": 1.0,
    "mbar": 100.0,
    "torr": 101325.0 / 760.0,
}


def _unit_factor(unit: str) -> float:
    try:
        return _PA_PER_UNIT[unit.strip().lower()]
    except (KeyError, AttributeError):
        raise ConfigError(f"unknown pressure unit {unit!r}; expected one of mbar, Torr, Pa") from None


def convert_pressure(value: float, unit: str, to: str = "Pa") -> float:
    """Convert a pressure between mbar, Torr and Pa (default target Pa)."""
    src, dst = _unit_factor(unit), _unit_factor(to)
    if not value > 0:
        raise DomainError(f"pressure must be > 0, got {value!r}")
    if src == dst:
        return float(value)
    return value * src / dst


def convert_per_pressure(value: float, unit: str, to: str = "mbar") -> float:
    """Convert a per-pressure coefficient, e.g. Hz/Torr -> Hz/mbar. Sign is free."""
    src, dst = _unit_factor(unit), _unit_factor(to)
    if src == dst:
        return float(value)
    return value * dst / src
