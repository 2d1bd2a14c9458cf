"""Ground-state Zeeman structure from the Breit-Rabi formula.

Energies are returned in Hz relative to the zero-field hyperfine centroid,
i.e. the degeneracy-weighted mean of the two F manifolds is zero, so the sum
over all 2(2I+1) sublevels vanishes at every field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

import numpy as np

from .core import CONSTANTS, AtomSpec
from .errors import DomainError, UnsupportedLevelStructure

__all__ = [
    "ZeemanLevel",
    "IsolationReport",
    "breit_rabi_energy",
    "breit_rabi_levels",
    "transition_frequency",
    "clock_shift",
    "clock_shift_coefficient",
    "clock_shift_derivative",
    "isolation_check",
    "zeeman_hamiltonian_levels",
]

ISOLATION_RATIO = 10.0


@dataclass(frozen=True)
class ZeemanLevel:
    f: float
    m_f: float
    energy_shift: float


@dataclass(frozen=True)
class IsolationReport:
    separation: float
    linewidth: float
    ratio: float
    isolated: bool
    nearest_m_f: float


def _check(atom: AtomSpec, b_field: float):
    if atom.j_ground != 0.5:
        raise UnsupportedLevelStructure(
            f"{atom.name}: Breit-Rabi formula needs a J=1/2 ground state, got J={atom.j_ground}"
        )
    if not b_field >= 0:
        raise DomainError(f"b_field must be >= 0, got {b_field!r}")


def _x_param(atom: AtomSpec, b_field: float) -> float:
    c = CONSTANTS
    return (atom.g_J * c.mu_B - atom.g_I * c.mu_N) * b_field / (c.h * atom.nu12_free)


def breit_rabi_energy(atom: AtomSpec, b_field: float, f: float, m_f: float) -> float:
    """Energy of |F, m_F> in Hz (centroid convention)."""
    _check(atom, b_field)
    spin = atom.nuclear_spin
    if f not in (spin - 0.5, spin + 0.5) or abs(m_f) > f:
        raise DomainError(f"no ground sublevel F={f}, m_F={m_f} for I={spin}")
    c = CONSTANTS
    delta = atom.nu12_free
    nuclear = atom.g_I * c.mu_N * m_f * b_field / c.h
    x = _x_param(atom, b_field)
    sign = 1.0 if f == spin + 0.5 else -1.0
    if abs(m_f) == spin + 0.5:
        # Stretched states: the square root is a perfect square, keep it analytic.
        root = 1.0 + math.copysign(1.0, m_f) * x
    else:
        root = math.sqrt(1.0 + 4.0 * m_f * x / (2.0 * spin + 1.0) + x * x)
    return -delta / (2.0 * (2.0 * spin + 1.0)) + nuclear + sign * 0.5 * delta * root


def breit_rabi_levels(atom: AtomSpec, b_field: float) -> List[ZeemanLevel]:
    """All ground sublevels, lower manifold first, m_F ascending."""
    _check(atom, b_field)
    out = []
    for f in (atom.nuclear_spin - 0.5, atom.nuclear_spin + 0.5):
        n = int(round(2 * f)) + 1
        for k in range(n):
            m = -f + k
            out.append(ZeemanLevel(f, m, breit_rabi_energy(atom, b_field, f, m)))
    return out


def transition_frequency(atom: AtomSpec, b_field: float, m_f: float = 0.0) -> float:
    """Delta m_F = 0 transition |I-1/2, m> <-> |I+1/2, m> in Hz."""
    i = atom.nuclear_spin
    return breit_rabi_energy(atom, b_field, i + 0.5, m_f) - breit_rabi_energy(atom, b_field, i - 0.5, m_f)


def clock_shift(atom: AtomSpec, b_field: float) -> float:
    """Field-induced shift of the 0-0 line, nu(B) - nu(0), in Hz."""
    _check(atom, b_field)
    x = _x_param(atom, b_field)
    # delta*(sqrt(1+x^2) - 1) without cancellation
    return atom.nu12_free * x * x / (math.sqrt(1.0 + x * x) + 1.0)


def clock_shift_derivative(atom: AtomSpec, b_field: float) -> float:
    """d(clock_shift)/dB in Hz/T."""
    _check(atom, b_field)
    x = _x_param(atom, b_field)
    dx_db = _x_param(atom, 1.0)
    return atom.nu12_free * x / math.sqrt(1.0 + x * x) * dx_db


def clock_shift_coefficient(atom: AtomSpec) -> float:
    """Low-field quadratic coefficient of the 0-0 shift, Hz/T^2."""
    c = CONSTANTS
    g = (atom.g_J * c.mu_B - atom.g_I * c.mu_N) / c.h
    return g * g / (2.0 * atom.nu12_free)


def isolation_check(atom: AtomSpec, b_field: float, gamma12: float,
                    ratio_threshold: float = ISOLATION_RATIO) -> IsolationReport:
    """Distance from the 0-0 line to the nearest m_F != 0 Delta m = 0 line,
    compared with the dark-resonance width gamma12/pi."""
    if not gamma12 > 0:
        raise DomainError(f"gamma12 must be > 0, got {gamma12!r}")
    nu00 = transition_frequency(atom, b_field, 0.0)
    f_low = atom.nuclear_spin - 0.5
    best, best_m = math.inf, 0.0
    m = -f_low
    while m <= f_low:
        if m != 0:
            sep = abs(transition_frequency(atom, b_field, m) - nu00)
            if sep < best:
                best, best_m = sep, m
        m += 1.0
    width = gamma12 / math.pi
    ratio = best / width
    return IsolationReport(best, width, ratio, bool(ratio > ratio_threshold), best_m)


def zeeman_hamiltonian_levels(atom: AtomSpec, b_field: float) -> np.ndarray:
    """Eigenvalues (Hz, ascending) of the hyperfine + Zeeman Hamiltonian in the
    uncoupled |m_J, m_I> basis, by direct diagonalisation."""
    _check(atom, b_field)
    c = CONSTANTS
    spin = atom.nuclear_spin
    ni = int(round(2 * spin)) + 1
    jz = np.diag([0.5, -0.5])
    jp = np.array([[0.0, 1.0], [0.0, 0.0]])
    mi = spin - np.arange(ni)
    iz = np.diag(mi)
    ip = np.zeros((ni, ni))
    for k in range(1, ni):
        m = mi[k]
        ip[k - 1, k] = math.sqrt(spin * (spin + 1) - m * (m + 1))
    e2, ei = np.eye(2), np.eye(ni)
    i_dot_j = np.kron(jz, iz) + 0.5 * (np.kron(jp, ip.T) + np.kron(jp.T, ip))
    a_hf = atom.nu12_free / (spin + 0.5)
    h = a_hf * i_dot_j
    h += (atom.g_J * c.mu_B * b_field / c.h) * np.kron(jz, ei)
    h += (atom.g_I * c.mu_N * b_field / c.h) * np.kron(e2, iz)
    return np.linalg.eigvalsh(h)
