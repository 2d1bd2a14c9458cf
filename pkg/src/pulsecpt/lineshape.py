"""Lorentzian dark-resonance model and its least-squares fit.

Model: ``offset + amplitude / (1 + (2 (x - center) / fwhm)^2)``. With ``x`` in
the hyperfine domain and ``fwhm = gamma12 / pi`` this is the pulse-train
dark-resonance lineshape; a negative ``amplitude`` describes a fluorescence dip.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DataError, DegenerateFit, NoResonanceDetected
from .spectrum import ScanResult

__all__ = [
    "LorentzianParams",
    "LorentzianFit",
    "closed_form_signal",
    "initial_guess",
    "fit",
    "fit_arrays",
]

MAX_ITER = 200
PARAM_RTOL = 1e-10
GRAD_TOL = 1e-12


@dataclass(frozen=True)
class LorentzianParams:
    amplitude: float
    center: float
    fwhm: float
    offset: float
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        if not self.fwhm > 0:
            raise DataError(f"fwhm must be > 0, got {self.fwhm!r}")
        if self.check and self.offset + min(0.0, self.amplitude) < 0:
            raise DataError("offset + min(0, amplitude) must be >= 0 (model would predict negative signal)")

    def as_array(self) -> np.ndarray:
        return np.array([self.amplitude, self.center, self.fwhm, self.offset])

    @classmethod
    def from_array(cls, a, check: bool = True) -> "LorentzianParams":
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]), check=check)


@dataclass(frozen=True)
class LorentzianFit:
    """Fitted parameters with their 4x4 covariance (order: amplitude, center,
    fwhm, offset) and convergence diagnostics.

    ``domain`` and ``m`` are copied from the spectrum so widths and centres can
    be mapped to the hyperfine domain.
    """

    params: LorentzianParams
    covariance: np.ndarray
    reduced_chi2: float
    r2: float
    n_iterations: int
    converged: bool
    gradient_norm: float = 0.0
    skew: float = 0.0
    n_points: int = 0
    domain: str = "pulse_rep"
    m: int = 1
    message: str = ""

    @property
    def stderr(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    def _factor(self) -> float:
        return float(self.m) if self.domain == "pulse_rep" else 1.0

    @property
    def fwhm_hf(self) -> float:
        return self.params.fwhm * self._factor()

    @property
    def fwhm_hf_err(self) -> float:
        return self.stderr[2] * self._factor()

    @property
    def center_hf(self) -> float:
        return self.params.center * self._factor()

    @property
    def center_hf_err(self) -> float:
        return self.stderr[1] * self._factor()

    def as_dict(self) -> dict:
        p = self.params
        err = self.stderr
        return {
            "amplitude": p.amplitude,
            "amplitude_err": err[0],
            "center_hz": p.center,
            "center_err_hz": err[1],
            "fwhm_hz": p.fwhm,
            "fwhm_err_hz": err[2],
            "offset": p.offset,
            "offset_err": err[3],
            "domain": self.domain,
            "m": self.m,
            "center_hyperfine_hz": self.center_hf,
            "fwhm_hyperfine_hz": self.fwhm_hf,
            "fwhm_pulse_rep_hz": self.fwhm_hf / self.m,
            "reduced_chi2": self.reduced_chi2,
            "r2": self.r2,
            "n_iterations": self.n_iterations,
            "converged": self.converged,
            "gradient_norm": self.gradient_norm,
            "residual_skew": self.skew,
            "n_points": self.n_points,
            "covariance": self.covariance.tolist(),
            "message": self.message,
        }


def closed_form_signal(x, p: LorentzianParams):
    x = np.asarray(x, dtype=float)
    z = 2.0 * (x - p.center) / p.fwhm
    out = p.offset + p.amplitude / (1.0 + z * z)
    return out if out.ndim else float(out)


def _robust_sigma(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    d = np.diff(values)
    return float(1.4826 * np.median(np.abs(d - np.median(d))) / math.sqrt(2.0))


def _crossing(x, dev, start, step, half):
    i = start
    while 0 <= i + step < len(x):
        j = i + step
        if abs(dev[j]) < half:
            # linear interpolation between i (above half) and j (below)
            a, b = abs(dev[i]), abs(dev[j])
            t = (a - half) / (a - b) if a != b else 0.5
            return x[i] + t * (x[j] - x[i])
        i = j
    return None


def initial_guess(spec: ScanResult) -> LorentzianParams:
    """Moment-free starting point for :func:`fit`.

    Offset is the median of the outer 20% of samples, the extremum (earliest
    index, or the midpoint of the longest tied run) gives centre and signed
    amplitude, and the half-excursion crossings give the width.
    """
    x, y = spec.scan_freq, spec.signal
    n = len(x)
    if n < 5:
        raise DataError(f"need at least 5 points to fit, got {n}")
    k = max(1, int(round(0.1 * n)))
    outer = np.concatenate([y[:k], y[-k:]])
    offset = float(np.median(outer))
    dev = y - offset
    mag = np.abs(dev)
    peak = mag.max()
    # successive differences over the whole scan: the line itself barely moves the median
    noise = _robust_sigma(y)
    if peak == 0 or peak < 3.0 * noise:
        raise NoResonanceDetected(
            f"no resonance detected: excursion {peak:.3g} is below 3x the noise estimate {noise:.3g}"
        )
    tied = np.nonzero(mag == peak)[0]
    best_start, best_len = tied[0], 1
    run_start, run_len = tied[0], 1
    for a, b in zip(tied[:-1], tied[1:]):
        if b == a + 1:
            run_len += 1
        else:
            run_start, run_len = b, 1
        if run_len > best_len:
            best_start, best_len = run_start, run_len
    i0 = int(best_start)
    i1 = int(best_start + best_len - 1)
    center = 0.5 * (x[i0] + x[i1])
    amplitude = float(dev[i0])
    half = 0.5 * peak
    left = _crossing(x, dev, i0, -1, half)
    right = _crossing(x, dev, i1, +1, half)
    if left is not None and right is not None:
        fwhm = right - left
    elif left is not None:
        fwhm = 2.0 * (center - left)
    elif right is not None:
        fwhm = 2.0 * (right - center)
    else:
        fwhm = 0.25 * (x[-1] - x[0])
    if not fwhm > 0:
        fwhm = 2.0 * float(np.min(np.diff(x)))
    return LorentzianParams(amplitude, float(center), float(fwhm), offset, check=False)


def _model_jac(u, q):
    a, c, f, o = q
    z = 2.0 * (u - c) / f
    d = 1.0 + z * z
    inv = 1.0 / d
    model = o + a * inv
    jac = np.empty((u.size, 4))
    jac[:, 0] = inv
    jac[:, 1] = 4.0 * a * z * inv * inv / f
    jac[:, 2] = 2.0 * a * z * z * inv * inv / f
    jac[:, 3] = 1.0
    return model, jac


def fit_arrays(x, y, sigma=None, guess: Optional[LorentzianParams] = None,
               domain: str = "pulse_rep", m: int = 1) -> LorentzianFit:
    """Weighted Lorentzian least squares by damped Gauss-Newton.

    Each step solves (J^T W J + lam diag(J^T W J)) dq = J^T W r; ``lam`` is
    divided by 10 after an accepted step and multiplied by 10 after a
    rejected one. Converged once the relative parameter change is below
    1e-10 or the gradient norm below 1e-12 on two consecutive iterations.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    if n < 5:
        raise DataError(f"need at least 5 points to fit, got {n}")
    if guess is None:
        guess = initial_guess(ScanResult(x, y, domain=domain, m=m))
    weighted = sigma is not None
    if weighted:
        sigma = np.asarray(sigma, dtype=float)
        if np.any(sigma <= 0):
            raise DataError("sigma column must be > 0 to be used as fit weights")
        w = 1.0 / sigma ** 2
    else:
        w = np.ones(n)
    wn = w / w.mean()

    # work in units where centre ~ 0, width ~ 1 and signal ~ 1
    xc, xs = guess.center, abs(guess.fwhm)
    yc = guess.offset
    ys = abs(guess.amplitude) if guess.amplitude != 0 else max(float(np.ptp(y)), 1e-300)
    u = (x - xc) / xs
    v = (y - yc) / ys
    q = np.array([guess.amplitude / ys, 0.0, 1.0, 0.0])

    model, jac = _model_jac(u, q)
    r = v - model
    chi2 = float(np.sum(wn * r * r))
    lam = 1e-3
    streak = 0
    converged = False
    iterations = 0
    message = "maximum iterations reached"
    grad_norm = math.inf
    for iterations in range(1, MAX_ITER + 1):
        jw = jac * wn[:, None]
        normal = jac.T @ jw
        grad = jw.T @ r
        grad_norm = float(np.linalg.norm(grad) / n)
        if chi2 == 0.0:
            converged, message = True, "exact fit"
            break
        accepted = False
        step = np.zeros(4)
        for _ in range(60):
            lhs = normal + lam * np.diag(np.diag(normal))
            try:
                step = np.linalg.solve(lhs, grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            q_try = q + step
            if q_try[2] == 0:
                lam *= 10.0
                continue
            model_try, jac_try = _model_jac(u, q_try)
            r_try = v - model_try
            chi2_try = float(np.sum(wn * r_try * r_try))
            if chi2_try <= chi2:
                accepted = True
                q, model, jac, r, chi2 = q_try, model_try, jac_try, r_try, chi2_try
                lam = max(lam / 10.0, 1e-12)
                break
            lam *= 10.0
        rel = np.max(np.abs(step) / np.maximum(np.abs(q), 1.0)) if accepted else 0.0
        small = (accepted and rel < PARAM_RTOL) or grad_norm < GRAD_TOL or not accepted
        streak = streak + 1 if small else 0
        if streak >= 2:
            converged = True
            message = "converged" if accepted or grad_norm < GRAD_TOL else "no further decrease"
            break
        if not accepted and lam > 1e30:
            message = "damping diverged"
            break

    jw = jac * wn[:, None]
    normal = jac.T @ jw
    grad_norm = float(np.linalg.norm(jw.T @ r) / n)
    diag = np.sqrt(np.abs(np.diag(normal)))
    if not np.all(np.isfinite(normal)) or np.any(diag == 0) or np.linalg.cond(normal / np.outer(diag, diag)) > 1e14:
        raise DegenerateFit("degenerate fit: normal matrix is singular (parameters not identifiable)")
    cov_scaled = np.linalg.inv(normal)
    cov_scaled = 0.5 * (cov_scaled + cov_scaled.T)

    scale = np.array([ys, xs, xs, ys])
    phys = np.array([q[0] * ys, xc + q[1] * xs, abs(q[2]) * xs, yc + q[3] * ys])
    resid = y - (phys[3] + phys[0] / (1.0 + (2.0 * (x - phys[1]) / phys[2]) ** 2))
    dof = max(n - 4, 1)
    chi2_phys = float(np.sum(w * resid * resid))
    red_chi2 = chi2_phys / dof
    # the normal matrix used w / mean(w) on residuals divided by ys; undo both
    cov = cov_scaled * np.outer(scale, scale) / (w.mean() * ys * ys)
    if not weighted:
        cov = cov * red_chi2
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    amp = phys[0] if phys[0] != 0 else 1.0
    skew = float(np.sum(resid * np.sign(x - phys[1])) / (n * abs(amp)))
    if not converged and grad_norm < GRAD_TOL:
        converged = True
        message = "converged (gradient)"
    return LorentzianFit(
        params=LorentzianParams.from_array(phys, check=False),
        covariance=cov,
        reduced_chi2=red_chi2,
        r2=r2,
        n_iterations=iterations,
        converged=converged,
        gradient_norm=grad_norm,
        skew=skew,
        n_points=n,
        domain=domain,
        m=m,
        message=message,
    )


def fit(spec: ScanResult, guess: Optional[LorentzianParams] = None) -> LorentzianFit:
    """Fit a Lorentzian to ``spec``; the sigma column, when present, sets the weights."""
    return fit_arrays(spec.scan_freq, spec.signal, spec.sigma, guess, domain=spec.domain, m=spec.m)
