import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pulsecpt.errors import ConfigError, DataError, DomainError
from pulsecpt.pulses import (
    TIME_BANDWIDTH,
    PulseTrainSpec,
    UnphysicalBandwidthWarning,
    autocorrelation,
    autocorrelation_fwhm,
    envelope,
    excess_bandwidth,
    fourier_limit_fwhm,
    intensity,
)

TAU = 15e-12


def spec(shape="gaussian", **kw):
    return PulseTrainSpec(525.7e6, TAU, shape=shape, **kw)


def _fwhm(x, y):
    """Width at half maximum by linear interpolation of the two crossings."""
    y = y / y.max()
    above = np.nonzero(y >= 0.5)[0]
    i0, i1 = above[0], above[-1]
    left = x[i0 - 1] + (0.5 - y[i0 - 1]) * (x[i0] - x[i0 - 1]) / (y[i0] - y[i0 - 1])
    right = x[i1] + (0.5 - y[i1]) * (x[i1 + 1] - x[i1]) / (y[i1 + 1] - y[i1])
    return right - left


def fft_spectral_fwhm(p, n=2 ** 20, dt=0.05e-12):
    t = (np.arange(n) - n // 2) * dt
    field = envelope(p, t)
    spec_int = np.abs(np.fft.fftshift(np.fft.fft(field))) ** 2
    f = np.fft.fftshift(np.fft.fftfreq(n, dt))
    return _fwhm(f, spec_int)


@pytest.mark.parametrize("shape,expected", [("gaussian", 29.4e9), ("sech", 21.0e9)])
def test_fourier_limit_vs_fft(shape, expected):
    p = spec(shape)
    oracle = fft_spectral_fwhm(p)
    assert fourier_limit_fwhm(p) == pytest.approx(oracle, rel=1e-3)
    assert fourier_limit_fwhm(p) == pytest.approx(expected, rel=2e-3)


@pytest.mark.parametrize("shape", ["gaussian", "sech"])
def test_intensity_fwhm(shape):
    p = spec(shape)
    assert intensity(p, 0.0) == 1.0
    assert intensity(p, TAU / 2) == pytest.approx(0.5, rel=1e-12)
    lo, hi = 0.0, 2 * TAU
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if intensity(p, mid) > 0.5 else (lo, mid)
    assert 2 * lo == pytest.approx(TAU, rel=1e-6)


@pytest.mark.parametrize("shape", ["gaussian", "sech"])
@given(st.floats(-1e-10, 1e-10))
def test_autocorrelation_even_and_bounded(shape, d):
    p = spec(shape)
    assert autocorrelation(p, d) == autocorrelation(p, -d)
    assert autocorrelation(p, d) <= 1.0
    if abs(d) > 1e-18:
        assert autocorrelation(p, d) < 1.0


@pytest.mark.parametrize("shape", ["gaussian", "sech"])
def test_autocorrelation_vs_quadrature(shape):
    p = spec(shape)
    t = np.linspace(-20 * TAU, 20 * TAU, 40001)
    i = intensity(p, t)
    norm = np.trapezoid(i * i, t)
    for d in (0.0, 0.3 * TAU, TAU, 2.5 * TAU):
        num = np.trapezoid(i * intensity(p, t - d), t) / norm
        assert autocorrelation(p, d) == pytest.approx(num, abs=1e-9)


def test_autocorrelation_widths():
    assert autocorrelation_fwhm(spec()) == pytest.approx(math.sqrt(2) * TAU, rel=1e-12)
    assert autocorrelation_fwhm(spec()) == pytest.approx(21.2e-12, abs=0.05e-12)
    assert autocorrelation_fwhm(spec("sech")) / TAU == pytest.approx(1.543, abs=1e-3)


def test_sech_closed_form_vs_high_precision():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40
    p = spec("sech")
    for x in (1e-6, 1e-3, 0.1, 0.299999, 0.300001, 0.7, 3.0, 30.0, 400.0):
        ref = float(3 * (x * mp.coth(x) - 1) / mp.sinh(x) ** 2)
        got = autocorrelation(p, x * TAU / 1.7627471740390859)
        assert got == pytest.approx(ref, rel=1e-12, abs=1e-300)


@given(st.floats(1e-13, 1e-10))
def test_time_bandwidth_constant(tau):
    for shape in ("gaussian", "sech"):
        p = PulseTrainSpec(1e9, tau, shape=shape)
        assert fourier_limit_fwhm(p) * tau == pytest.approx(TIME_BANDWIDTH[shape], rel=1e-12)
    assert TIME_BANDWIDTH["gaussian"] == pytest.approx(0.4413, abs=1e-4)
    assert TIME_BANDWIDTH["sech"] == pytest.approx(0.3148, abs=1e-4)


def test_excess_bandwidth():
    assert excess_bandwidth(spec(spectral_fwhm_measured=100e9)) == pytest.approx(70.6e9, abs=0.05e9)
    limit = fourier_limit_fwhm(spec())
    assert excess_bandwidth(spec(spectral_fwhm_measured=limit)) == 0.0
    with pytest.warns(UnphysicalBandwidthWarning):
        assert excess_bandwidth(spec(spectral_fwhm_measured=10e9)) < 0
    with pytest.raises(DataError, match="no measured width"):
        excess_bandwidth(spec())


@pytest.mark.parametrize("kw", [dict(area1=4.0), dict(area2=-0.1), dict(m=0), dict(m=2.5)])
def test_spec_validation(kw):
    with pytest.raises(DomainError):
        spec(**kw)


def test_spec_validation_other():
    with pytest.raises(ConfigError):
        spec("lorentzian")
    with pytest.raises(DomainError):
        PulseTrainSpec(1e9, 2e-9)
    assert spec().period == pytest.approx(1 / 525.7e6)
