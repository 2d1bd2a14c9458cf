"""Mode-locked pulse-train diagnostics.

Intensity profiles are unit-peak with FWHM equal to ``duration_fwhm``:

* gaussian: I(t) = exp(-4 ln2 t^2 / tau^2)
* sech:     I(t) = sech^2(2 arccosh(sqrt 2) t / tau)

The dynamics engine only uses the pulse areas; shape and duration feed the
spectral-width and autocorrelation diagnostics.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, DataError, DomainError

__all__ = [
    "PulseTrainSpec",
    "TIME_BANDWIDTH",
    "SECH_WIDTH_FACTOR",
    "intensity",
    "envelope",
    "fourier_limit_fwhm",
    "excess_bandwidth",
    "autocorrelation",
    "autocorrelation_fwhm",
    "UnphysicalBandwidthWarning",
]

SHAPES = ("gaussian", "sech")
SECH_WIDTH_FACTOR = 2.0 * math.acosh(math.sqrt(2.0))  # 1.7627...

# Transform-limited spectral-intensity FWHM times intensity FWHM.
TIME_BANDWIDTH = {
    "gaussian": 2.0 * math.log(2.0) / math.pi,
    "sech": (2.0 * math.acosh(math.sqrt(2.0))) ** 2 / math.pi ** 2,
}


class UnphysicalBandwidthWarning(UserWarning):
    pass


@dataclass(frozen=True)
class PulseTrainSpec:
    """Pulse train driving both arms of the Lambda system.

    ``area1``/``area2`` are the pulse areas [rad] on the |1>-|e> and |2>-|e>
    arms; ``m`` is the subharmonic order linking the repetition rate to the
    hyperfine splitting.
    """

    rep_freq: float
    duration_fwhm: float
    shape: str = "gaussian"
    area1: float = 1e-4
    area2: float = 1e-4
    m: int = 13
    spectral_fwhm_measured: Optional[float] = None

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ConfigError(f"pulse shape must be one of {SHAPES}, got {self.shape!r}")
        if not self.rep_freq > 0:
            raise DomainError("rep_freq must be > 0")
        if not self.duration_fwhm > 0:
            raise DomainError("duration_fwhm must be > 0")
        if not self.duration_fwhm < 1.0 / self.rep_freq:
            raise DomainError("pulse duration must be shorter than the repetition period")
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"subharmonic order m must be a positive integer, got {self.m!r}")
        for name in ("area1", "area2"):
            a = getattr(self, name)
            if not 0.0 <= a <= math.pi:
                raise DomainError(f"{name} must lie in [0, pi], got {a!r}")

    @property
    def period(self) -> float:
        return 1.0 / self.rep_freq


def intensity(spec: PulseTrainSpec, t):
    """Unit-peak intensity profile at time(s) ``t`` [s]."""
    t = np.asarray(t, dtype=float)
    tau = spec.duration_fwhm
    if spec.shape == "gaussian":
        out = np.exp(-4.0 * math.log(2.0) * (t / tau) ** 2)
    else:
        # sech^2 u = 4 e^{-2|u|} / (1 + e^{-2|u|})^2, no overflow in the wings
        e = np.exp(-2.0 * np.abs(SECH_WIDTH_FACTOR * t / tau))
        out = 4.0 * e / (1.0 + e) ** 2
    return out if out.ndim else float(out)


def envelope(spec: PulseTrainSpec, t):
    """Unit-peak field amplitude, the square root of :func:`intensity`."""
    return np.sqrt(intensity(spec, t))


def fourier_limit_fwhm(spec: PulseTrainSpec) -> float:
    """Transform-limited FWHM of the spectral intensity, Hz."""
    return TIME_BANDWIDTH[spec.shape] / spec.duration_fwhm


def excess_bandwidth(spec: PulseTrainSpec) -> float:
    """Measured spectral FWHM minus the Fourier limit, Hz."""
    if spec.spectral_fwhm_measured is None:
        raise DataError("no measured width: spectral_fwhm_measured is not set")
    excess = spec.spectral_fwhm_measured - fourier_limit_fwhm(spec)
    if excess < 0:
        warnings.warn(
            f"measured spectral width {spec.spectral_fwhm_measured:.6g} Hz is below the Fourier "
            f"limit {fourier_limit_fwhm(spec):.6g} Hz",
            UnphysicalBandwidthWarning,
            stacklevel=2,
        )
    return excess


# Taylor coefficients in x^2 of 3 (x coth x - 1) / sinh^2 x
_SECH_SERIES = (1.0, -2.0 / 5.0, 2.0 / 21.0, -4.0 / 225.0, 2.0 / 693.0, -2764.0 / 6449625.0,
                4.0 / 66825.0, -28936.0 / 3618239625.0, 87734.0 / 84922212375.0)
_SERIES_LIMIT = 0.3


def _sech_autocorr(x):
    # 3 (x coth x - 1) / sinh^2 x, normalised to 1 at x = 0
    x = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    small = x < _SERIES_LIMIT
    x2 = x[small] ** 2
    acc = np.zeros_like(x2)
    for c in reversed(_SECH_SERIES):
        acc = acc * x2 + c
    out[small] = acc
    xl = x[~small]
    big = xl > 350.0
    xm = np.where(big, 1.0, xl)
    val = 3.0 * (xm / np.tanh(xm) - 1.0) / np.sinh(xm) ** 2
    # asymptotically 12 (x - 1) exp(-2x)
    out[~small] = np.where(big, 12.0 * (xl - 1.0) * np.exp(-2.0 * np.minimum(xl, 700.0)), val)
    return out


def autocorrelation(spec: PulseTrainSpec, delay):
    """Background-free intensity autocorrelation, 1 at zero delay.

    Closed forms of  int I(t) I(t - delay) dt / int I(t)^2 dt  for both shapes.
    """
    d = np.abs(np.asarray(delay, dtype=float))
    tau = spec.duration_fwhm
    if spec.shape == "gaussian":
        out = np.exp(-2.0 * math.log(2.0) * (d / tau) ** 2)
    else:
        out = _sech_autocorr(SECH_WIDTH_FACTOR * d / tau)
    return out if out.ndim else float(out)


def autocorrelation_fwhm(spec: PulseTrainSpec) -> float:
    """FWHM of :func:`autocorrelation`, found by bisection on the half point."""
    if spec.shape == "gaussian":
        return math.sqrt(2.0) * spec.duration_fwhm
    lo, hi = 0.0, 2.0 * spec.duration_fwhm
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if autocorrelation(spec, mid) > 0.5:
            lo = mid
        else:
            hi = mid
    return lo + hi
