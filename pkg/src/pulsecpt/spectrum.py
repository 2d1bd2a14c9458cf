"""Spectrum container, CSV round trip and seeded noise injection.

CSV layout::

    # domain=pulse_rep
    # m=13
    # seed=7
    scan_freq_hz,signal[,sigma]
    525743276.0,1.2e-07[,3e-12]
    ...

Floats are written with 17 significant digits so that ``read_csv(write_csv(s))``
reproduces every sample bit for bit.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import ConfigError, DataError

__all__ = ["DOMAINS", "ScanResult", "inject_noise", "read_csv", "write_csv", "format_float"]

DOMAINS = ("pulse_rep", "hyperfine")


def format_float(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True, eq=False)
class ScanResult:
    """Ordered spectrum samples.

    ``scan_freq`` is the pulse repetition frequency (``domain="pulse_rep"``)
    or ``m`` times it (``domain="hyperfine"``). ``metadata`` holds free-form
    string-valued provenance (conditions, seed, relaxation rate ...).
    """

    scan_freq: np.ndarray
    signal: np.ndarray
    sigma: Optional[np.ndarray] = None
    domain: str = "pulse_rep"
    m: int = 1
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.asarray(self.scan_freq, dtype=float)
        y = np.asarray(self.signal, dtype=float)
        object.__setattr__(self, "scan_freq", x)
        object.__setattr__(self, "signal", y)
        if self.domain not in DOMAINS:
            raise ConfigError(f"domain must be one of {DOMAINS}, got {self.domain!r}")
        if x.ndim != 1 or x.shape != y.shape:
            raise DataError("scan_freq and signal must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DataError("spectrum contains non-finite values")
        bad = np.nonzero(np.diff(x) <= 0)[0]
        if bad.size:
            raise DataError(f"scan_freq must be strictly increasing (row {int(bad[0]) + 2})")
        neg = np.nonzero(y < 0)[0]
        if neg.size:
            raise DataError(f"signal must be >= 0 (row {int(neg[0]) + 1} is {y[neg[0]]!r})")
        if self.sigma is not None:
            s = np.asarray(self.sigma, dtype=float)
            if s.shape != x.shape:
                raise DataError("sigma column must match scan_freq length")
            if np.any(s < 0) or not np.all(np.isfinite(s)):
                raise DataError("sigma must be finite and >= 0")
            object.__setattr__(self, "sigma", s)
        if int(self.m) != self.m or self.m < 1:
            raise DataError(f"m must be a positive integer, got {self.m!r}")

    def __len__(self):
        return self.scan_freq.size

    def __eq__(self, other):
        if not isinstance(other, ScanResult):
            return NotImplemented
        same_sigma = (self.sigma is None and other.sigma is None) or (
            self.sigma is not None and other.sigma is not None and np.array_equal(self.sigma, other.sigma)
        )
        return (
            np.array_equal(self.scan_freq, other.scan_freq)
            and np.array_equal(self.signal, other.signal)
            and same_sigma
            and self.domain == other.domain
            and self.m == other.m
            and {k: str(v) for k, v in self.metadata.items()} == {k: str(v) for k, v in other.metadata.items()}
        )

    def to_hyperfine_freq(self, x):
        """Map a frequency (or width) in this spectrum's domain to the hyperfine domain."""
        return x * self.m if self.domain == "pulse_rep" else x

    def relabel(self, domain: str) -> "ScanResult":
        if domain == self.domain:
            return self
        factor = self.m if domain == "hyperfine" else 1.0 / self.m
        return replace(self, scan_freq=self.scan_freq * factor, domain=domain)


def inject_noise(spec: ScanResult, rel_sigma: float, seed: int) -> ScanResult:
    """Add Gaussian noise with std ``rel_sigma`` times the peak excursion.

    Point ``i`` draws from a generator seeded by ``(seed, i)`` so the result
    does not depend on evaluation order. Negative values are clamped to zero
    and counted in ``metadata["clamped"]``.
    """
    if rel_sigma < 0:
        raise DataError(f"rel_sigma must be >= 0, got {rel_sigma!r}")
    meta = dict(spec.metadata)
    meta["seed"] = int(seed)
    meta["rel_sigma"] = rel_sigma
    if rel_sigma == 0:
        meta["clamped"] = 0
        return replace(spec, metadata=meta)
    std = rel_sigma * float(np.ptp(spec.signal))
    draws = np.array([np.random.default_rng([int(seed), i]).standard_normal() for i in range(len(spec))])
    noisy = spec.signal + std * draws
    clamped = int(np.count_nonzero(noisy < 0))
    meta["clamped"] = clamped
    noisy = np.maximum(noisy, 0.0)
    sigma = np.full_like(noisy, std)
    return replace(spec, signal=noisy, sigma=sigma, metadata=meta)


_HEADER = ("scan_freq_hz", "signal", "sigma")


def write_csv(spec: ScanResult, path: Union[str, Path, None] = None) -> str:
    """Render ``spec`` as CSV text; also write it to ``path`` when given."""
    buf = io.StringIO()
    meta = {"domain": spec.domain, "m": spec.m}
    meta.update({k: v for k, v in spec.metadata.items() if k not in ("domain", "m")})
    for key, value in meta.items():
        if isinstance(value, float):
            value = format_float(value)
        text = str(value)
        if "\n" in text or "=" in str(key):
            raise DataError(f"metadata entry {key!r} cannot be written on one comment line")
        buf.write(f"# {key}={text}\n")
    has_sigma = spec.sigma is not None
    buf.write(",".join(_HEADER if has_sigma else _HEADER[:2]) + "\n")
    for i in range(len(spec)):
        row = [format_float(spec.scan_freq[i]), format_float(spec.signal[i])]
        if has_sigma:
            row.append(format_float(spec.sigma[i]))
        buf.write(",".join(row) + "\n")
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def _parse_meta_value(value: str):
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        return value


def read_csv(source: Union[str, Path]) -> ScanResult:
    """Parse a spectrum file (path, or the CSV text itself if it contains a newline)."""
    if isinstance(source, Path) or "\n" not in str(source):
        name = str(source)
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise DataError(f"cannot read spectrum file {name}: {exc}") from None
    else:
        name, text = "<string>", str(source)
    meta = {}
    rows = []
    header = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, value = body.split("=", 1)
                meta[key.strip()] = _parse_meta_value(value.strip())
            continue
        cells = [c.strip() for c in line.split(",")]
        if header is None:
            header = cells
            if tuple(header) not in (_HEADER, _HEADER[:2]):
                raise DataError(
                    f"{name}:{lineno}: header must be 'scan_freq_hz,signal[,sigma]', got {line!r}"
                )
            continue
        if len(cells) != len(header):
            raise DataError(f"{name}:{lineno}: expected {len(header)} columns, got {len(cells)}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            raise DataError(f"{name}:{lineno}: non-numeric value in row {line!r}") from None
    if header is None:
        raise DataError(f"{name}: no header row found")
    arr = np.array(rows, dtype=float).reshape(-1, len(header))
    domain = str(meta.pop("domain", "pulse_rep"))
    m = meta.pop("m", 1)
    if not isinstance(m, int):
        raise DataError(f"{name}: metadata m must be an integer, got {m!r}")
    bad = np.nonzero(~np.isfinite(arr))[0]
    if bad.size:
        raise DataError(f"{name}: non-finite value in data row {int(bad[0]) + 1}")
    try:
        return ScanResult(
            scan_freq=arr[:, 0],
            signal=arr[:, 1],
            sigma=arr[:, 2] if len(header) == 3 else None,
            domain=domain,
            m=m,
            metadata=meta,
        )
    except (DataError, ConfigError) as exc:
        raise DataError(f"{name}: {exc}") from None
