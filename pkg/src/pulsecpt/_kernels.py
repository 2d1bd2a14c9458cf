"""Hot loops of the stroboscopic Lambda-system engine.

Basis ordering is (|1>, |2>, |e>). Density matrices are 3x3 complex arrays and
superoperators act on the row-major flattening, vec(rho)[3*i + j] = rho[i, j].

Every function decorated with ``njit`` is compiled by numba when the backend
allows it and otherwise runs as ordinary numpy code. ``scan_numpy`` is the
vectorised fallback for whole spectra.
"""

import math

import numpy as np

from ._backend import USE_NUMBA, njit

_TRACE_IDX = (0, 4, 8)


@njit
def _phi(a, b, t):
    # (exp(-a t) - exp(-b t)) / (b - a), stable when a ~ b
    y = (b - a) * t
    if abs(y) < 1e-12:
        g = 1.0 - 0.5 * y
    else:
        g = -math.expm1(-y) / y
    return math.exp(-a * t) * t * g


@njit
def kick_unitary(theta1, theta2, phase):
    """exp(-i H) for H = (theta1 |1><e| + theta2 e^{i phase} |2><e| + h.c.) / 2."""
    u = np.eye(3, dtype=np.complex128)
    big = math.sqrt(theta1 * theta1 + theta2 * theta2)
    if big == 0.0:
        return u
    b = np.zeros(3, dtype=np.complex128)
    b[0] = theta1 / big
    b[1] = (theta2 / big) * complex(math.cos(phase), math.sin(phase))
    c = math.cos(0.5 * big)
    s = math.sin(0.5 * big)
    for i in range(2):
        for j in range(2):
            u[i, j] += (c - 1.0) * b[i] * b[j].conjugate()
    u[2, 2] = c
    for i in range(2):
        u[i, 2] = -1j * s * b[i]
        u[2, i] = -1j * s * b[i].conjugate()
    return u


@njit
def hermitize(rho):
    return 0.5 * (rho + rho.conj().T)


@njit
def apply_unitary(rho, u):
    return hermitize(u @ rho @ u.conj().T)


@njit
def relax_factors(period, gamma_e, branching, gamma12, gamma1, detuning, gamma_opt):
    """Closed-form coefficients of the free evolution over one period.

    Returns (E, F, G, c12, c1e, c2e) where Pe' = E Pe, the population
    difference decays by F and receives G Pe from spontaneous decay, and the
    coherences rho12, rho1e, rho2e are multiplied by the complex factors.
    ``gamma_opt`` is extra optical dephasing (inf wipes rho_je every period).
    """
    e = math.exp(-gamma_e * period)
    f = math.exp(-gamma1 * period)
    g = (2.0 * branching - 1.0) * gamma_e * _phi(gamma1, gamma_e, period)
    w = 2.0 * math.pi * detuning
    c12 = math.exp(-gamma12 * period) * complex(math.cos(w * period), -math.sin(w * period))
    opt = 0.5 * gamma_e + 0.25 * gamma12 + 0.125 * gamma1 + gamma_opt
    amp = math.exp(-opt * period)
    half = 0.5 * w * period
    c1e = amp * complex(math.cos(half), -math.sin(half))
    c2e = amp * complex(math.cos(half), math.sin(half))
    return e, f, g, c12, c1e, c2e


@njit
def relax_apply(rho, period, gamma_e, branching, gamma12, gamma1, detuning, gamma_opt):
    e, f, g, c12, c1e, c2e = relax_factors(period, gamma_e, branching, gamma12, gamma1, detuning, gamma_opt)
    p1 = rho[0, 0].real
    p2 = rho[1, 1].real
    pe = rho[2, 2].real
    out = np.empty((3, 3), dtype=np.complex128)
    # the excited population leaving is exactly what the ground levels gain
    lost = pe - e * pe
    out[0, 0] = 0.5 * (p1 + p2 + f * (p1 - p2) + lost + g * pe)
    out[1, 1] = 0.5 * (p1 + p2 - f * (p1 - p2) + lost - g * pe)
    out[2, 2] = e * pe
    out[0, 1] = c12 * rho[0, 1]
    out[1, 0] = out[0, 1].conjugate()
    out[0, 2] = c1e * rho[0, 2]
    out[2, 0] = out[0, 2].conjugate()
    out[1, 2] = c2e * rho[1, 2]
    out[2, 1] = out[1, 2].conjugate()
    return out


@njit
def relax_superop(period, gamma_e, branching, gamma12, gamma1, detuning, gamma_opt):
    e, f, g, c12, c1e, c2e = relax_factors(period, gamma_e, branching, gamma12, gamma1, detuning, gamma_opt)
    r = np.zeros((9, 9), dtype=np.complex128)
    r[0, 0] = 0.5 * (1.0 + f)
    r[0, 4] = 0.5 * (1.0 - f)
    r[0, 8] = 0.5 * (1.0 - e + g)
    r[4, 0] = 0.5 * (1.0 - f)
    r[4, 4] = 0.5 * (1.0 + f)
    r[4, 8] = 0.5 * (1.0 - e - g)
    r[8, 8] = e
    r[1, 1] = c12
    r[3, 3] = c12.conjugate()
    r[2, 2] = c1e
    r[6, 6] = c1e.conjugate()
    r[5, 5] = c2e
    r[7, 7] = c2e.conjugate()
    return r


@njit
def kick_superop(u):
    k = np.empty((9, 9), dtype=np.complex128)
    for i in range(3):
        for j in range(3):
            for a in range(3):
                for b in range(3):
                    k[3 * i + j, 3 * a + b] = u[i, a] * u[j, b].conjugate()
    return k


@njit
def period_map(u, period, gamma_e, branching, gamma12, gamma1, detuning, gamma_opt):
    """Superoperator of one period: kick, then free evolution."""
    return relax_superop(period, gamma_e, branching, gamma12, gamma1, detuning, gamma_opt) @ kick_superop(u)


@njit
def fixed_point(m):
    """Unit-trace fixed point of the superoperator ``m``.

    One population row of (m - I) is redundant for a trace-preserving map and
    is replaced by the trace condition. One step of iterative refinement.
    """
    a = m - np.eye(9, dtype=np.complex128)
    for k in range(9):
        a[0, k] = 0.0
    a[0, 0] = 1.0
    a[0, 4] = 1.0
    a[0, 8] = 1.0
    rhs = np.zeros(9, dtype=np.complex128)
    rhs[0] = 1.0
    v = np.linalg.solve(a, rhs)
    v = v + np.linalg.solve(a, rhs - a @ v)
    return hermitize(v.reshape((3, 3)))


@njit
def fluorescence_from(rho, u, gamma_e, period):
    """Photons emitted per period from the post-kick excited population."""
    post = u @ rho @ u.conj().T
    return post[2, 2].real * -math.expm1(-gamma_e * period)


@njit
def scan_numba(u, detunings, periods, gamma_e, branching, gamma12, gamma1, gamma_opt):
    n = detunings.shape[0]
    signal = np.empty(n)
    coherence = np.empty(n, dtype=np.complex128)
    for k in range(n):
        m = period_map(u, periods[k], gamma_e, branching, gamma12, gamma1, detunings[k], gamma_opt)
        rho = fixed_point(m)
        signal[k] = fluorescence_from(rho, u, gamma_e, periods[k])
        coherence[k] = rho[0, 1]
    return signal, coherence


def scan_numpy(u, detunings, periods, gamma_e, branching, gamma12, gamma1, gamma_opt):
    """Vectorised fallback: batched superoperators and one batched solve."""
    detunings = np.asarray(detunings, dtype=float)
    periods = np.asarray(periods, dtype=float)
    n = detunings.shape[0]
    t = periods
    e = np.exp(-gamma_e * t)
    f = np.exp(-gamma1 * t)
    y = (gamma_e - gamma1) * t
    with np.errstate(invalid="ignore", divide="ignore"):
        g_ratio = np.where(np.abs(y) < 1e-12, 1.0 - 0.5 * y, -np.expm1(-y) / np.where(y == 0, 1.0, y))
    g = (2.0 * branching - 1.0) * gamma_e * np.exp(-gamma1 * t) * t * g_ratio
    w = 2.0 * np.pi * detunings
    c12 = np.exp(-gamma12 * t) * (np.cos(w * t) - 1j * np.sin(w * t))
    amp = np.exp(-(0.5 * gamma_e + 0.25 * gamma12 + 0.125 * gamma1 + gamma_opt) * t)
    c1e = amp * (np.cos(0.5 * w * t) - 1j * np.sin(0.5 * w * t))
    c2e = amp * (np.cos(0.5 * w * t) + 1j * np.sin(0.5 * w * t))

    r = np.zeros((n, 9, 9), dtype=np.complex128)
    r[:, 0, 0] = 0.5 * (1 + f)
    r[:, 0, 4] = 0.5 * (1 - f)
    r[:, 0, 8] = 0.5 * (1 - e + g)
    r[:, 4, 0] = 0.5 * (1 - f)
    r[:, 4, 4] = 0.5 * (1 + f)
    r[:, 4, 8] = 0.5 * (1 - e - g)
    r[:, 8, 8] = e
    r[:, 1, 1] = c12
    r[:, 3, 3] = np.conj(c12)
    r[:, 2, 2] = c1e
    r[:, 6, 6] = np.conj(c1e)
    r[:, 5, 5] = c2e
    r[:, 7, 7] = np.conj(c2e)

    k = np.kron(u, u.conj())
    m = r @ k
    a = m - np.eye(9)
    a[:, 0, :] = 0.0
    a[:, 0, list(_TRACE_IDX)] = 1.0
    rhs = np.zeros((n, 9, 1), dtype=np.complex128)
    rhs[:, 0, 0] = 1.0
    v = np.linalg.solve(a, rhs)
    v = v + np.linalg.solve(a, rhs - a @ v)
    rho = v.reshape(n, 3, 3)
    rho = 0.5 * (rho + np.conj(np.swapaxes(rho, 1, 2)))
    post = u @ rho @ u.conj().T
    signal = post[:, 2, 2].real * -np.expm1(-gamma_e * t)
    return signal, rho[:, 0, 1].copy()


@njit
def random_walk(rho, kinds, theta1, theta2, phase, period, gamma_e, branching, gamma12, gamma1,
                detuning, gamma_opt):
    """Apply a sequence of kicks (kind 0) and free evolutions (kind 1).

    Returns the final state, the largest trace deviation and the smallest
    eigenvalue seen along the way.
    """
    worst_trace = 0.0
    worst_eig = 1.0
    for k in range(kinds.shape[0]):
        if kinds[k] == 0:
            u = kick_unitary(theta1[k], theta2[k], phase[k])
            rho = apply_unitary(rho, u)
        else:
            rho = hermitize(relax_apply(rho, period[k], gamma_e, branching[k], gamma12[k],
                                        gamma1[k], detuning[k], gamma_opt[k]))
        tr = rho[0, 0].real + rho[1, 1].real + rho[2, 2].real
        dev = abs(tr - 1.0)
        if dev > worst_trace:
            worst_trace = dev
        lam = np.linalg.eigvalsh(rho)[0]
        if lam < worst_eig:
            worst_eig = lam
    return rho, worst_trace, worst_eig


if USE_NUMBA:
    scan = scan_numba
else:
    scan = scan_numpy
