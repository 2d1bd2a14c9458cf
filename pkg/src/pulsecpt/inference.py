"""Physical quantities from a fitted dark resonance.

* the decoherence cross section sigma2 from the linewidth,
* the buffer-gas pressure-shift coefficient from the line centre,
* the free-atom hyperfine splitting from the line centre and a known shift.

Uncertainties are first-order (linear) propagations. Every estimate keeps
its individual contributions so a report can show where the error budget
comes from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .core import (
    CONSTANTS,
    AtomSpec,
    BufferGasSpec,
    CellGeometry,
    ExperimentConditions,
    mean_relative_speed,
    reduced_mass,
)
from .errors import DataError, DomainError, InsufficientGasData, NotConverged
from .lineshape import LorentzianFit
from .relaxation import diffusion_rate
from .zeeman import clock_shift, clock_shift_derivative

__all__ = [
    "Estimate",
    "InferenceReport",
    "extract_sigma2",
    "extract_pressure_shift",
    "recover_hyperfine",
]


@dataclass(frozen=True)
class Estimate:
    """Value with a one-sigma uncertainty and its itemised contributions."""

    value: float
    uncertainty: float
    unit: str
    contributions: Dict[str, float] = field(default_factory=dict)
    corrections: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not (math.isfinite(self.value) and math.isfinite(self.uncertainty)) or self.uncertainty < 0:
            raise DataError(f"estimate needs a finite value and non-negative uncertainty, "
                            f"got {self.value!r} +- {self.uncertainty!r}")

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "uncertainty": self.uncertainty,
            "unit": self.unit,
            "contributions": dict(self.contributions),
            "corrections": dict(self.corrections),
        }


def _combine(parts: Dict[str, float]) -> float:
    return math.sqrt(sum(v * v for v in parts.values()))


@dataclass
class InferenceReport:
    sigma2: Optional[Estimate] = None
    shift_coeff: Optional[Estimate] = None
    nu12_recovered: Optional[Estimate] = None
    inputs: dict = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        out = {"inputs": dict(self.inputs), "warnings": list(self.warnings)}
        for name in ("sigma2", "shift_coeff", "nu12_recovered"):
            est = getattr(self, name)
            if est is not None:
                out[name] = est.as_dict()
        return out


def _require_converged(fit: LorentzianFit):
    if not fit.converged:
        raise NotConverged(f"fit did not converge ({fit.message or 'no message'}); refusing to infer from it")


def _check_rel(name: str, value: float):
    if not value >= 0:
        raise DomainError(f"{name} must be >= 0, got {value!r}")


def _line_center(fit: LorentzianFit, m: Optional[int]):
    """Centre of the 0-0 line in Hz and its uncertainty, hyperfine domain."""
    if fit.domain == "hyperfine":
        return fit.params.center, fit.stderr[1]
    order = fit.m if m is None else m
    if int(order) != order or order < 1:
        raise DomainError(f"m must be a positive integer, got {order!r}")
    return order * fit.params.center, order * fit.stderr[1]


def extract_sigma2(fit: LorentzianFit, cond: ExperimentConditions, atom: AtomSpec, gas: BufferGasSpec,
                   cell: Optional[CellGeometry] = None, subtract_diffusion: bool = False,
                   pressure_rel_uncertainty: float = 0.0, temperature_scaling: bool = True) -> Estimate:
    """sigma2 [cm^2] = (gamma12 - gamma_diff) / (N0 v_r p / p0), gamma12 = pi * FWHM.

    With ``subtract_diffusion`` the wall term A D0 p0 / p is removed first
    (needs ``gas.d0``). ``pressure_rel_uncertainty`` is the one-sigma
    relative uncertainty of the cell pressure.
    """
    _require_converged(fit)
    _check_rel("pressure_rel_uncertainty", pressure_rel_uncertainty)
    cell = cond.cell if cell is None else cell
    g = math.pi * fit.fwhm_hf
    u_g = math.pi * fit.fwhm_hf_err
    g_diff = 0.0
    corrections = {}
    if subtract_diffusion:
        if gas.d0 is None:
            raise InsufficientGasData(gas.name, "d0")
        g_diff = diffusion_rate(cell, gas, cond, temperature_scaling)
        corrections["diffusion_rate_per_s"] = g_diff
    v = 100.0 * mean_relative_speed(cond.temperature, reduced_mass(atom.mass, gas.mass))
    k = CONSTANTS.loschmidt_cm3 * v * cond.pressure / CONSTANTS.p0
    sigma2 = (g - g_diff) / k
    if sigma2 < 0:
        raise DomainError(
            f"negative sigma2 ({sigma2:.4g} cm^2): measured rate {g:.6g} /s is below the "
            f"diffusion rate {g_diff:.6g} /s at {cond.pressure_mbar:.6g} mbar"
        )
    # d(sigma2)/dp: the collision factor scales as p, the diffusion term as 1/p
    dsig_dp_rel = abs(2.0 * g_diff - g) / k
    parts = {"fit": u_g / k, "pressure": dsig_dp_rel * pressure_rel_uncertainty}
    return Estimate(sigma2, _combine(parts), "cm^2", parts, corrections)


def extract_pressure_shift(fit: LorentzianFit, cond: ExperimentConditions, atom: AtomSpec,
                           m: Optional[int] = None, b_field: Optional[float] = None,
                           pressure_rel_uncertainty: float = 0.0,
                           b_field_uncertainty: float = 0.0) -> Estimate:
    """Shift coefficient [Hz/mbar] = (m nu_p,centre - nu12_free - clock_shift(B)) / p.

    ``b_field`` [T] defaults to ``cond.b_field``; ``b_field_uncertainty`` is
    in tesla.
    """
    _require_converged(fit)
    _check_rel("pressure_rel_uncertainty", pressure_rel_uncertainty)
    _check_rel("b_field_uncertainty", b_field_uncertainty)
    b = cond.b_field if b_field is None else b_field
    if b is None or not math.isfinite(b):
        raise DataError("b_field is required to correct the line centre")
    p = cond.pressure_mbar
    if not p > 0:
        raise DomainError(f"pressure must be > 0, got {p!r} mbar")
    nu00, u_nu = _line_center(fit, m)
    zee = clock_shift(atom, b)
    coeff = (nu00 - atom.nu12_free - zee) / p
    parts = {
        "fit": u_nu / p,
        "pressure": abs(coeff) * pressure_rel_uncertainty,
        "b_field": abs(clock_shift_derivative(atom, b)) * b_field_uncertainty / p,
    }
    corrections = {"clock_shift_hz": zee, "nu12_free_hz": atom.nu12_free, "line_center_hz": nu00}
    return Estimate(coeff, _combine(parts), "Hz/mbar", parts, corrections)


def recover_hyperfine(fit: LorentzianFit, cond: ExperimentConditions, atom: AtomSpec,
                      known_shift_coeff: float, m: Optional[int] = None, b_field: Optional[float] = None,
                      pressure_rel_uncertainty: float = 0.0, b_field_uncertainty: float = 0.0,
                      shift_coeff_uncertainty: float = 0.0) -> Estimate:
    """Free-atom splitting [Hz] = m nu_p,centre - known_shift_coeff * p - clock_shift(B).

    ``known_shift_coeff`` is in Hz/mbar. Only the atom's Zeeman constants are
    used; its ``nu12_free`` is not consulted.
    """
    _require_converged(fit)
    for name, val in (("pressure_rel_uncertainty", pressure_rel_uncertainty),
                      ("b_field_uncertainty", b_field_uncertainty),
                      ("shift_coeff_uncertainty", shift_coeff_uncertainty)):
        _check_rel(name, val)
    b = cond.b_field if b_field is None else b_field
    if b is None or not math.isfinite(b):
        raise DataError("b_field is required to correct the line centre")
    p = cond.pressure_mbar
    nu00, u_nu = _line_center(fit, m)
    zee = clock_shift(atom, b)
    press = known_shift_coeff * p
    nu = nu00 - press - zee
    parts = {
        "fit": u_nu,
        "pressure": abs(press) * pressure_rel_uncertainty,
        "b_field": abs(clock_shift_derivative(atom, b)) * b_field_uncertainty,
        "shift_coeff": p * shift_coeff_uncertainty,
    }
    corrections = {"clock_shift_hz": zee, "pressure_shift_hz": press, "line_center_hz": nu00}
    return Estimate(nu, _combine(parts), "Hz", parts, corrections)
