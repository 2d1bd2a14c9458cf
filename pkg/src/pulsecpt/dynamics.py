"""Stroboscopic Lambda-system engine.

The atom is reduced to |1> = (F=1, m_F=0), |2> = (F=2, m_F=0) and one excited
level |e>. Each pulse is an instantaneous unitary kick acting on both optical
arms; between pulses the state relaxes in closed form:

* |e> decays at ``gamma_e``, a fraction ``branching_lower`` into |1>;
* the ground populations equalise at ``gamma1`` (default ``gamma12``);
* rho12 decays at ``gamma12`` and rotates by the hyperfine detuning
  ``nu12 - m * nu_p``;
* the optical coherences decay at gamma_e/2 plus the share of ground
  relaxation that keeps the map completely positive, plus an optional
  ``optical_dephasing`` rate.

Doppler spread and buffer-gas broadening of the optical line dephase rho_1e
and rho_2e within a fraction of a nanosecond, so by default
(``optical_dephasing=inf``) nothing optical survives from one pulse to the
next and only the ground coherence accumulates. ``optical_dephasing=0`` keeps
the bare gamma_e/2 decay; the comb then builds a broad optical resonance
underneath the dark line.

The frame co-rotates at ``m * nu_p``, with the two ground levels placed
symmetrically at +-detuning/2 so the carrier sits midway between the arms.
Its fixed point (just before a pulse) is the observed steady state.

Limitations: pulses are treated as delta kicks (hyperfine phase accumulated
during a 15 ps pulse is ignored), optical dephasing is a single rate rather
than an explicit velocity average, and there is no optical pumping into the
m_F != 0 sublevels.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels as K
from ._backend import BACKEND
from .core import AtomSpec, BufferGasSpec, ExperimentConditions
from .errors import ConfigError, DataError, DomainError, NonUniqueSteadyState
from .lineshape import fit as fit_lorentzian
from .pulses import PulseTrainSpec
from .relaxation import gamma12 as relaxation_rate
from .spectrum import DOMAINS, ScanResult, inject_noise
from .zeeman import clock_shift

__all__ = [
    "ScanGrid",
    "NoiseSpec",
    "check_density_matrix",
    "ground_mixture",
    "dark_state",
    "pulse_kick",
    "interpulse_evolve",
    "period_superoperator",
    "steady_state",
    "fluorescence",
    "resonance_frequency",
    "scan_spectrum",
    "default_grid",
    "adaptive_grid",
    "DEFAULT_OPTICAL_DEPHASING",
]

DEFAULT_OPTICAL_DEPHASING = math.inf

CHECK_MAPS = os.environ.get("PULSECPT_CHECK", "").strip().lower() not in ("", "0", "false", "no")


@dataclass(frozen=True)
class ScanGrid:
    """Scan axis in ``domain`` units: ``points`` samples over ``center +- span/2``."""

    center: float
    span: float
    points: int
    domain: str = "pulse_rep"

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ConfigError(f"scan domain must be one of {DOMAINS}, got {self.domain!r}")
        if int(self.points) != self.points or self.points < 3:
            raise ConfigError(f"scan points must be an integer >= 3, got {self.points!r}")
        if not self.span > 0:
            raise ConfigError(f"scan span must be > 0, got {self.span!r}")
        if not self.center > self.span / 2:
            raise ConfigError("scan center must exceed half the span (frequencies stay positive)")

    def values(self) -> np.ndarray:
        return self.center + self.span * np.linspace(-0.5, 0.5, int(self.points))


@dataclass(frozen=True)
class NoiseSpec:
    rel_sigma: float
    seed: int = 0


def check_density_matrix(rho, herm_tol=1e-12, trace_tol=1e-10, psd_tol=1e-10):
    """Raise DataError unless ``rho`` is a valid 3x3 density matrix."""
    rho = np.asarray(rho)
    if rho.shape != (3, 3):
        raise DataError(f"density matrix must be 3x3, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > herm_tol:
        raise DataError(f"density matrix not Hermitian (deviation {herm:.3g})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise DataError(f"density matrix trace is {tr!r}")
    lam = np.linalg.eigvalsh(rho)[0]
    if lam < -psd_tol:
        raise DataError(f"density matrix not positive semidefinite (eigenvalue {lam:.3g})")
    return rho


def ground_mixture() -> np.ndarray:
    """Equal incoherent mixture of |1> and |2>."""
    return np.diag([0.5, 0.5, 0.0]).astype(complex)


def dark_state(area1: float, area2: float, phase: float = 0.0) -> np.ndarray:
    """Projector on the superposition that a kick with these areas leaves untouched."""
    norm = math.hypot(area1, area2)
    if norm == 0:
        raise DomainError("dark state undefined for zero pulse areas")
    psi = np.array([area2, -area1 * np.exp(1j * phase), 0.0], dtype=complex) / norm
    return np.outer(psi, psi.conj())


def pulse_kick(rho, area1: float, area2: float, phase: float = 0.0) -> np.ndarray:
    out = K.apply_unitary(np.ascontiguousarray(rho, dtype=np.complex128), K.kick_unitary(area1, area2, phase))
    if CHECK_MAPS:
        check_density_matrix(out)
    return out


def _optical(rate: float) -> float:
    if not rate >= 0:
        raise DomainError(f"optical dephasing rate must be >= 0, got {rate!r}")
    return float(rate)


def _gamma1(gamma12: float, gamma1: Optional[float]) -> float:
    g1 = gamma12 if gamma1 is None else gamma1
    if g1 < 0 or g1 > 2 * gamma12:
        # dephasing part gamma12 - gamma1/2 must be >= 0 for a physical map
        raise DomainError(f"ground population rate gamma1={g1!r} must lie in [0, 2*gamma12]")
    return g1


def interpulse_evolve(rho, period: float, atom: AtomSpec, gamma12: float, detuning: float,
                      gamma1: Optional[float] = None,
                      optical_dephasing: float = DEFAULT_OPTICAL_DEPHASING) -> np.ndarray:
    """Free evolution over ``period`` seconds; ``detuning`` = nu12 - m nu_p in Hz."""
    if not period > 0:
        raise DomainError(f"period must be > 0, got {period!r}")
    if gamma12 < 0:
        raise DomainError(f"gamma12 must be >= 0, got {gamma12!r}")
    out = K.hermitize(
        K.relax_apply(np.ascontiguousarray(rho, dtype=np.complex128), period, atom.gamma_e,
                      atom.branching_lower, gamma12, _gamma1(gamma12, gamma1), detuning,
                      _optical(optical_dephasing))
    )
    if CHECK_MAPS:
        check_density_matrix(out)
    return out


def period_superoperator(pulse: PulseTrainSpec, atom: AtomSpec, gamma12: float, detuning: float,
                         gamma1: Optional[float] = None, period: Optional[float] = None,
                         phase: float = 0.0,
                         optical_dephasing: float = DEFAULT_OPTICAL_DEPHASING) -> np.ndarray:
    """9x9 matrix of relax(kick(rho)) acting on the row-major vec(rho)."""
    u = K.kick_unitary(pulse.area1, pulse.area2, phase)
    t = pulse.period if period is None else period
    return K.period_map(u, t, atom.gamma_e, atom.branching_lower, gamma12, _gamma1(gamma12, gamma1), detuning,
                        _optical(optical_dephasing))


def steady_state(pulse: PulseTrainSpec, atom: AtomSpec, gamma12: float, detuning: float,
                 gamma1: Optional[float] = None, period: Optional[float] = None,
                 method: str = "direct", initial=None,
                 optical_dephasing: float = DEFAULT_OPTICAL_DEPHASING) -> np.ndarray:
    """Fixed point of the period map (the state just before a pulse).

    ``method="direct"`` solves the 9x9 linear system with a trace row;
    ``method="squaring"`` raises the map to the 2^k-th power by repeated
    squaring and applies it to ``initial`` (default: equal ground mixture).
    """
    if not gamma12 > 0:
        raise NonUniqueSteadyState("gamma12 = 0 leaves the dark state and the relaxed state both invariant")
    m = period_superoperator(pulse, atom, gamma12, detuning, gamma1, period,
                             optical_dephasing=optical_dephasing)
    if method == "direct":
        rho = K.fixed_point(m)
    elif method == "squaring":
        rho0 = ground_mixture() if initial is None else np.asarray(initial, dtype=complex)
        p = m.copy()
        v = rho0.reshape(9)
        tr = np.zeros(9)
        tr[[0, 4, 8]] = 1.0
        # renormalise every squaring: round-off would otherwise leak the unit
        # eigenvalue over 2^k periods; 2^60 periods outlast any relaxation
        prev = v
        for _ in range(60):
            p = p @ p
            w = p @ v
            w = w / (tr @ w)
            p = p / (tr @ p @ v / (tr @ v))
            if np.max(np.abs(w - prev)) < 1e-15:
                break
            prev = w
        rho = K.hermitize(w.reshape(3, 3))
    else:
        raise ConfigError(f"unknown steady-state method {method!r}")
    if not np.all(np.isfinite(rho)):
        raise NonUniqueSteadyState("period map has a degenerate fixed-point space")
    return rho


def fluorescence(rho_ss, pulse: PulseTrainSpec, atom: AtomSpec, period: Optional[float] = None,
                 phase: float = 0.0) -> float:
    """Photons per atom per period: gamma_e times the excited population
    integrated over one period after the kick."""
    u = K.kick_unitary(pulse.area1, pulse.area2, phase)
    t = pulse.period if period is None else period
    return float(K.fluorescence_from(np.ascontiguousarray(rho_ss, dtype=np.complex128), u, atom.gamma_e, t))


def resonance_frequency(atom: AtomSpec, gas: BufferGasSpec, cond: ExperimentConditions) -> float:
    """Shifted 0-0 frequency: free splitting + pressure shift + clock shift, Hz."""
    return atom.nu12_free + gas.shift_coeff * cond.pressure_mbar + clock_shift(atom, cond.b_field)


def _run_chunks(u, detunings, periods, atom, gamma12, gamma1, gamma_opt, workers):
    args = (atom.gamma_e, atom.branching_lower, gamma12, gamma1, gamma_opt)
    if workers <= 1 or detunings.size < 2 * workers:
        return K.scan(u, detunings, periods, *args)
    bounds = np.linspace(0, detunings.size, workers + 1).astype(int)
    chunks = [(bounds[i], bounds[i + 1]) for i in range(workers)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda c: K.scan(u, detunings[c[0]:c[1]], periods[c[0]:c[1]], *args), chunks))
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def scan_spectrum(pulse: PulseTrainSpec, atom: AtomSpec, gas: BufferGasSpec, cond: ExperimentConditions,
                  scan: ScanGrid, noise: Optional[NoiseSpec] = None, *, terms: str = "both",
                  gamma1: Optional[float] = None, freq_offset: float = 0.0,
                  temperature_scaling: bool = True, workers: int = 1,
                  optical_dephasing: float = DEFAULT_OPTICAL_DEPHASING) -> ScanResult:
    """Fluorescence versus pulse repetition frequency.

    ``freq_offset`` [Hz] is added to every nominal repetition frequency before
    it reaches the atoms (a miscalibrated frequency reference). Scan points
    are independent; ``workers`` threads evaluate contiguous chunks and the
    result does not depend on the worker count.
    """
    if int(workers) != workers or workers < 1:
        raise ConfigError(f"workers must be a positive integer, got {workers!r}")
    relax = relaxation_rate(cond.cell, gas, cond, atom, terms=terms, temperature_scaling=temperature_scaling)
    g12 = relax.total
    if not g12 > 0:
        raise NonUniqueSteadyState("relaxation rate is zero; steady state is not unique")
    g1 = _gamma1(g12, gamma1)
    x = scan.values()
    nu_p = x if scan.domain == "pulse_rep" else x / pulse.m
    nu_p = nu_p + freq_offset
    if np.any(nu_p <= 0):
        raise ConfigError("scan grid reaches non-positive repetition frequencies")
    nu12 = resonance_frequency(atom, gas, cond)
    detunings = nu12 - pulse.m * nu_p
    periods = 1.0 / nu_p
    u = K.kick_unitary(pulse.area1, pulse.area2, 0.0)
    g_opt = _optical(optical_dephasing)
    signal, _ = _run_chunks(u, detunings, periods, atom, g12, g1, g_opt, int(workers))
    # tiny negative round-off in a dark steady state
    signal = np.maximum(signal, 0.0)
    meta = {
        "atom": atom.name,
        "gas": gas.name,
        "pressure_mbar": cond.pressure_mbar,
        "temperature_k": cond.temperature,
        "b_field_t": cond.b_field,
        "shift_hz_per_mbar": gas.shift_coeff,
        "gamma12_per_s": g12,
        "gamma1_per_s": g1,
        "optical_dephasing_per_s": g_opt,
        "nu12_shifted_hz": nu12,
        "rep_freq_hz": pulse.rep_freq,
        "area1_rad": pulse.area1,
        "area2_rad": pulse.area2,
        "freq_offset_hz": freq_offset,
        "backend": BACKEND,
    }
    out = ScanResult(scan_freq=x, signal=signal, domain=scan.domain, m=pulse.m, metadata=meta)
    if noise is not None:
        out = inject_noise(out, noise.rel_sigma, noise.seed)
    return out


def default_grid(pulse: PulseTrainSpec, atom: AtomSpec, gas: BufferGasSpec, cond: ExperimentConditions,
                 points: int = 201, widths: float = 10.0, domain: str = "pulse_rep",
                 terms: str = "both", temperature_scaling: bool = True) -> ScanGrid:
    """Grid centred on the expected resonance spanning ``widths`` unbroadened FWHMs."""
    relax = relaxation_rate(cond.cell, gas, cond, atom, terms=terms, temperature_scaling=temperature_scaling)
    center = resonance_frequency(atom, gas, cond)
    span = widths * relax.fwhm_hf
    if domain == "pulse_rep":
        center, span = center / pulse.m, span / pulse.m
    return ScanGrid(center, span, points, domain)


def adaptive_grid(pulse: PulseTrainSpec, atom: AtomSpec, gas: BufferGasSpec, cond: ExperimentConditions,
                  points: int = 201, widths: float = 10.0, domain: str = "pulse_rep", *,
                  terms: str = "both", gamma1: Optional[float] = None, temperature_scaling: bool = True,
                  optical_dephasing: float = DEFAULT_OPTICAL_DEPHASING, max_expansions: int = 12) -> ScanGrid:
    """Grid spanning ``widths`` times the actual (power-broadened) linewidth.

    Starts from :func:`default_grid` and quadruples the span until a
    Lorentzian fit finds a line narrower than a third of the span, then
    re-centres on the fitted line and sets the span from the fitted width.
    """
    grid = default_grid(pulse, atom, gas, cond, points, widths, domain, terms, temperature_scaling)
    span = grid.span
    for _ in range(max_expansions):
        trial = ScanGrid(grid.center, span, points, domain)
        spec = scan_spectrum(pulse, atom, gas, cond, trial, terms=terms, gamma1=gamma1,
                             temperature_scaling=temperature_scaling, optical_dephasing=optical_dephasing)
        try:
            result = fit_lorentzian(spec)
        except DataError:
            result = None
        if result is not None and result.converged and 0 < result.params.fwhm < span / 3:
            return ScanGrid(result.params.center, widths * result.params.fwhm, points, domain)
        span *= 4.0
    raise DataError(f"no resolvable resonance within a span of {span / 4:.6g} Hz")
