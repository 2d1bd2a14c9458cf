"""Pulse-train coherent population trapping toolkit.

Simulate dark-resonance spectra of a Lambda system driven by a mode-locked
pulse train, fit them with a Lorentzian and turn the fitted width and centre
into buffer-gas constants (decoherence cross section, pressure shift) or the
free-atom hyperfine splitting.
"""

from ._backend import BACKEND
from .core import (
    CONSTANTS,
    DEFAULT_CELL,
    GAS_TABLE,
    RB87,
    AtomSpec,
    BufferGasSpec,
    CellGeometry,
    ExperimentConditions,
    convert_per_pressure,
    convert_pressure,
    get_gas,
    mean_relative_speed,
    reduced_mass,
)
from .dynamics import (
    DEFAULT_OPTICAL_DEPHASING,
    NoiseSpec,
    ScanGrid,
    adaptive_grid,
    dark_state,
    default_grid,
    fluorescence,
    interpulse_evolve,
    period_superoperator,
    pulse_kick,
    resonance_frequency,
    scan_spectrum,
    steady_state,
)
from .errors import (
    ConfigError,
    DataError,
    DegenerateFit,
    DomainError,
    InsufficientGasData,
    NoInteriorMinimum,
    NonUniqueSteadyState,
    NoResonanceDetected,
    NotConverged,
    PulseCPTError,
    UnsupportedLevelStructure,
)
from .inference import Estimate, InferenceReport, extract_pressure_shift, extract_sigma2, recover_hyperfine
from .lineshape import LorentzianFit, LorentzianParams, closed_form_signal, fit, fit_arrays, initial_guess
from .pulses import PulseTrainSpec, autocorrelation, autocorrelation_fwhm, excess_bandwidth, fourier_limit_fwhm
from .relaxation import collision_rate, diffusion_rate, gamma12, geometry_factor, optimal_pressure
from .spectrum import ScanResult, inject_noise, read_csv, write_csv
from .zeeman import breit_rabi_energy, breit_rabi_levels, clock_shift, clock_shift_coefficient, isolation_check

__version__ = "0.1.0"

__all__ = [
    "AtomSpec",
    "BACKEND",
    "BufferGasSpec",
    "CONSTANTS",
    "CellGeometry",
    "ConfigError",
    "DEFAULT_OPTICAL_DEPHASING",
    "DataError",
    "DegenerateFit",
    "DomainError",
    "Estimate",
    "ExperimentConditions",
    "GAS_TABLE",
    "InferenceReport",
    "InsufficientGasData",
    "LorentzianFit",
    "LorentzianParams",
    "NoInteriorMinimum",
    "NoResonanceDetected",
    "NoiseSpec",
    "NonUniqueSteadyState",
    "NotConverged",
    "DEFAULT_CELL",
    "PulseCPTError",
    "PulseTrainSpec",
    "RB87",
    "ScanGrid",
    "ScanResult",
    "UnsupportedLevelStructure",
    "adaptive_grid",
    "autocorrelation",
    "autocorrelation_fwhm",
    "breit_rabi_energy",
    "breit_rabi_levels",
    "clock_shift",
    "clock_shift_coefficient",
    "closed_form_signal",
    "collision_rate",
    "convert_per_pressure",
    "convert_pressure",
    "dark_state",
    "default_grid",
    "diffusion_rate",
    "excess_bandwidth",
    "extract_pressure_shift",
    "extract_sigma2",
    "fit",
    "fit_arrays",
    "fluorescence",
    "fourier_limit_fwhm",
    "gamma12",
    "geometry_factor",
    "get_gas",
    "initial_guess",
    "inject_noise",
    "interpulse_evolve",
    "isolation_check",
    "mean_relative_speed",
    "optimal_pressure",
    "period_superoperator",
    "pulse_kick",
    "read_csv",
    "recover_hyperfine",
    "reduced_mass",
    "resonance_frequency",
    "scan_spectrum",
    "steady_state",
    "write_csv",
    "__version__",
]
