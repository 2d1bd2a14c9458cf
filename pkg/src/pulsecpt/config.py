"""Run configuration: sectioned key=value text with unit-suffixed keys.

Example::

    [gas]
    name = Xe
    shift_hz_per_mbar = -885
    terms = collision

    [conditions]
    pressure_mbar = 53.3
    temperature_k = 294
    b_field_ut = 50

    [pulse]
    m = 13
    area1_rad = 1e-4

Parsing is strict: unknown sections or keys, malformed numbers and
conflicting alternatives (``pressure_mbar`` and ``pressure_torr``) are all
collected and reported together in one ``ConfigError``. Missing values fall
back to the built-in tables and each fallback is logged at INFO level.
Sections ``gas`` and ``conditions`` have no built-in default; when absent the
corresponding field is ``None`` and commands that need them refuse to run.
"""

from __future__ import annotations

import configparser
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from .core import (
    AMU,
    DEFAULT_CELL,
    RB87,
    AtomSpec,
    BufferGasSpec,
    CellGeometry,
    ExperimentConditions,
    convert_per_pressure,
    convert_pressure,
    get_gas,
)
from .dynamics import DEFAULT_OPTICAL_DEPHASING, NoiseSpec
from .errors import ConfigError, PulseCPTError
from .pulses import PulseTrainSpec
from .spectrum import DOMAINS

log = logging.getLogger(__name__)

__all__ = ["RunConfig", "ScanSettings", "InferenceSettings", "load_config", "parse_config", "SCHEMA"]

# key -> kind; kinds: float, int, str, bool
SCHEMA: Dict[str, Dict[str, str]] = {
    "atom": {
        "name": "str", "nu12_free_hz": "float", "nuclear_spin": "float", "g_j": "float", "g_i": "float",
        "mass_u": "float", "gamma_e_per_s": "float", "branching_lower": "float",
    },
    "gas": {
        "name": "str", "mass_u": "float", "d0_cm2_per_s": "float", "sigma2_cm2": "float",
        "shift_hz_per_mbar": "float", "shift_hz_per_torr": "float", "t0_k": "float", "terms": "str",
    },
    "cell": {"length_cm": "float", "diameter_cm": "float"},
    "conditions": {
        "pressure_mbar": "float", "pressure_torr": "float", "pressure_pa": "float",
        "temperature_k": "float", "temperature_c": "float", "b_field_ut": "float", "freq_offset_hz": "float",
    },
    "pulse": {
        "rep_freq_hz": "float", "duration_ps": "float", "shape": "str", "area1_rad": "float",
        "area2_rad": "float", "m": "int", "spectral_fwhm_ghz": "float",
    },
    "scan": {
        "center_hz": "float", "span_hz": "float", "widths": "float", "points": "int", "domain": "str",
        "workers": "int", "gamma1_per_s": "float", "temperature_scaling": "bool",
        "optical_dephasing_per_s": "float",
    },
    "noise": {"rel_sigma": "float", "seed": "int"},
    "inference": {
        "pressure_rel_uncertainty": "float", "b_field_uncertainty_ut": "float", "subtract_diffusion": "bool",
        "known_shift_hz_per_mbar": "float", "known_shift_hz_per_torr": "float",
        "known_shift_uncertainty_hz_per_mbar": "float",
    },
}

_TRUE = ("1", "true", "yes", "on")
_FALSE = ("0", "false", "no", "off")


@dataclass(frozen=True)
class ScanSettings:
    """Scan axis and engine options. ``center``/``span`` of None mean
    'centred on the expected resonance, ``widths`` linewidths wide'."""

    center: Optional[float] = None
    span: Optional[float] = None
    widths: float = 10.0
    points: int = 201
    domain: str = "pulse_rep"
    workers: int = 1
    gamma1: Optional[float] = None
    temperature_scaling: bool = True
    optical_dephasing: float = DEFAULT_OPTICAL_DEPHASING
    terms: str = "both"


@dataclass(frozen=True)
class InferenceSettings:
    pressure_rel_uncertainty: float = 0.0
    b_field_uncertainty: float = 0.0  # T
    subtract_diffusion: bool = False
    known_shift_coeff: Optional[float] = None  # Hz/mbar
    known_shift_uncertainty: float = 0.0  # Hz/mbar


@dataclass(frozen=True)
class RunConfig:
    atom: AtomSpec
    gas: Optional[BufferGasSpec]
    cell: CellGeometry
    conditions: Optional[ExperimentConditions]
    pulse: PulseTrainSpec
    scan: ScanSettings
    noise: Optional[NoiseSpec]
    inference: InferenceSettings
    freq_offset: float = 0.0
    notices: Tuple[str, ...] = field(default=(), compare=False)

    def require(self, *names: str):
        """Raise ConfigError naming every requested section that is missing."""
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise ConfigError("missing config section(s): " + ", ".join(f"[{n}]" for n in missing))


class _Reader:
    """Typed access to one parsed config with error collection."""

    def __init__(self, raw: Dict[str, Dict[str, str]]):
        self.raw = raw
        self.errors: List[str] = []
        self.notices: List[str] = []

    def has(self, section: str) -> bool:
        return section in self.raw

    def get(self, section: str, key: str, default=None, notice: bool = False):
        text = self.raw.get(section, {}).get(key)
        if text is None:
            if notice and default is not None:
                self.notices.append(f"[{section}] {key} not set; using built-in default {default!r}")
            return default
        kind = SCHEMA[section][key]
        try:
            if kind == "float":
                val = float(text)
                if math.isnan(val):
                    raise ValueError
                return val
            if kind == "int":
                return int(text)
            if kind == "bool":
                low = text.strip().lower()
                if low in _TRUE:
                    return True
                if low in _FALSE:
                    return False
                raise ValueError
            return text.strip()
        except ValueError:
            self.errors.append(f"[{section}] {key} = {text!r} is not a valid {kind}")
            return default

    def one_of(self, section: str, keys: Tuple[str, ...]):
        present = [k for k in keys if k in self.raw.get(section, {})]
        if len(present) > 1:
            self.errors.append(f"[{section}] give only one of {', '.join(present)}")
        return present[0] if present else None

    def build(self, label: str, factory, *args, **kwargs):
        try:
            return factory(*args, **kwargs)
        except PulseCPTError as exc:
            self.errors.append(f"[{label}] {exc}")
            return None


def _raw_sections(text: str, origin: str) -> Dict[str, Dict[str, str]]:
    parser = configparser.ConfigParser(interpolation=None, strict=True, default_section="__none__")
    parser.optionxform = str
    try:
        parser.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ConfigError(f"{origin}: {exc}") from None
    return {s: dict(parser.items(s)) for s in parser.sections()}


def _check_keys(raw: Dict[str, Dict[str, str]]) -> List[str]:
    """Report unknown sections and keys and drop them so parsing can go on."""
    errors = []
    for section in list(raw):
        if section not in SCHEMA:
            errors.append(f"unknown section [{section}] (known: {', '.join(SCHEMA)})")
            del raw[section]
            continue
        for key in list(raw[section]):
            if key not in SCHEMA[section]:
                errors.append(f"[{section}] unknown key {key!r}")
                del raw[section][key]
    return errors


def _atom(r: _Reader) -> Optional[AtomSpec]:
    name = r.get("atom", "name", RB87.name)
    base = RB87 if name == RB87.name else None
    vals = {}
    keys = {
        "nu12_free": ("nu12_free_hz", 1.0), "nuclear_spin": ("nuclear_spin", 1.0), "g_J": ("g_j", 1.0),
        "g_I": ("g_i", 1.0), "mass": ("mass_u", AMU), "gamma_e": ("gamma_e_per_s", 1.0),
        "branching_lower": ("branching_lower", 1.0),
    }
    for attr, (key, scale) in keys.items():
        v = r.get("atom", key)
        if v is None:
            if base is None:
                r.errors.append(f"[atom] {key} is required for atom {name!r} (no built-in table entry)")
                continue
            v = getattr(base, attr)
            if r.has("atom"):
                r.notices.append(f"[atom] {key} not set; using {RB87.name} table value")
        else:
            v = v * scale
        vals[attr] = v
    if len(vals) != len(keys):
        return None
    return r.build("atom", AtomSpec, name=name, **vals)


def _gas(r: _Reader) -> Optional[BufferGasSpec]:
    if not r.has("gas"):
        return None
    name = r.get("gas", "name")
    if name is None:
        r.errors.append("[gas] name is required")
        return None
    try:
        table = get_gas(name)
    except ConfigError:
        table = None
    mass = r.get("gas", "mass_u")
    if mass is None:
        if table is None:
            r.errors.append(f"[gas] mass_u is required for gas {name!r} (not in the built-in table)")
            return None
        mass = table.mass
        r.notices.append(f"[gas] mass_u not set; using table value for {table.name}")
    else:
        mass = mass * AMU
    d0 = r.get("gas", "d0_cm2_per_s", table.d0 if table else None)
    sigma2 = r.get("gas", "sigma2_cm2")
    if sigma2 is None and table is not None and table.sigma2 is not None:
        sigma2 = table.sigma2
        r.notices.append(f"[gas] sigma2_cm2 not set; using table value {sigma2!r} for {table.name}")
    shift = 0.0
    which = r.one_of("gas", ("shift_hz_per_mbar", "shift_hz_per_torr"))
    if which == "shift_hz_per_mbar":
        shift = r.get("gas", which, 0.0)
    elif which == "shift_hz_per_torr":
        shift = convert_per_pressure(r.get("gas", which, 0.0), "torr", "mbar")
    else:
        r.notices.append("[gas] no pressure shift given; using 0 Hz/mbar")
    t0 = r.get("gas", "t0_k", 273.15)
    return r.build("gas", BufferGasSpec, name=table.name if table else name, mass=mass, d0=d0,
                   sigma2=sigma2, shift_coeff=shift, t0=t0)


def _default_terms(gas: Optional[BufferGasSpec]) -> str:
    if gas is None or (gas.d0 is not None and gas.sigma2 is not None):
        return "both"
    if gas.sigma2 is not None:
        return "collision"
    if gas.d0 is not None:
        return "diffusion"
    return "both"


def _cell(r: _Reader) -> Optional[CellGeometry]:
    length = r.get("cell", "length_cm", DEFAULT_CELL.length * 100, notice=r.has("cell"))
    diameter = r.get("cell", "diameter_cm", DEFAULT_CELL.radius * 200, notice=r.has("cell"))
    return r.build("cell", CellGeometry, length / 100.0, diameter / 200.0)


def _conditions(r: _Reader, cell: Optional[CellGeometry]) -> Optional[ExperimentConditions]:
    if not r.has("conditions"):
        return None
    which = r.one_of("conditions", ("pressure_mbar", "pressure_torr", "pressure_pa"))
    pressure = None
    if which is None:
        r.errors.append("[conditions] one of pressure_mbar, pressure_torr, pressure_pa is required")
    else:
        value = r.get("conditions", which)
        if value is not None:
            pressure = r.build("conditions", convert_pressure, value, which.split("_")[1], "Pa")
    twhich = r.one_of("conditions", ("temperature_k", "temperature_c"))
    temperature = None
    if twhich is None:
        r.errors.append("[conditions] one of temperature_k, temperature_c is required")
    else:
        value = r.get("conditions", twhich)
        if value is not None:
            temperature = value if twhich == "temperature_k" else value + 273.15
    b = r.get("conditions", "b_field_ut", 0.0, notice=True)
    if pressure is None or temperature is None or cell is None:
        return None
    return r.build("conditions", ExperimentConditions, pressure, temperature, b * 1e-6, cell)


def _pulse(r: _Reader, atom: Optional[AtomSpec]) -> Optional[PulseTrainSpec]:
    m = r.get("pulse", "m", 13, notice=True)
    rep = r.get("pulse", "rep_freq_hz")
    if rep is None:
        if atom is None or not isinstance(m, int) or m < 1:
            return None
        rep = atom.nu12_free / m
        r.notices.append(f"[pulse] rep_freq_hz not set; using nu12_free/m = {rep!r}")
    duration = r.get("pulse", "duration_ps", 15.0, notice=True)
    shape = r.get("pulse", "shape", "gaussian")
    area1 = r.get("pulse", "area1_rad", 1e-4, notice=True)
    area2 = r.get("pulse", "area2_rad", area1)
    measured = r.get("pulse", "spectral_fwhm_ghz")
    return r.build("pulse", PulseTrainSpec, rep, duration * 1e-12, shape, area1, area2, m,
                   None if measured is None else measured * 1e9)


def _scan(r: _Reader, gas: Optional[BufferGasSpec]) -> ScanSettings:
    terms = r.get("gas", "terms") or _default_terms(gas)
    if terms not in ("both", "diffusion", "collision"):
        r.errors.append(f"[gas] terms must be both, diffusion or collision, got {terms!r}")
    domain = r.get("scan", "domain", "pulse_rep")
    if domain not in DOMAINS:
        r.errors.append(f"[scan] domain must be one of {', '.join(DOMAINS)}, got {domain!r}")
    points = r.get("scan", "points", 201)
    if isinstance(points, int) and points < 5:
        r.errors.append(f"[scan] points must be >= 5, got {points}")
    workers = r.get("scan", "workers", 1)
    if isinstance(workers, int) and workers < 1:
        r.errors.append(f"[scan] workers must be >= 1, got {workers}")
    span = r.get("scan", "span_hz")
    if span is not None and not span > 0:
        r.errors.append(f"[scan] span_hz must be > 0, got {span!r}")
    widths = r.get("scan", "widths", 10.0)
    if not widths > 0:
        r.errors.append(f"[scan] widths must be > 0, got {widths!r}")
    dephasing = r.get("scan", "optical_dephasing_per_s", DEFAULT_OPTICAL_DEPHASING)
    if not dephasing >= 0:
        r.errors.append(f"[scan] optical_dephasing_per_s must be >= 0, got {dephasing!r}")
    return ScanSettings(
        center=r.get("scan", "center_hz"),
        span=span,
        widths=widths,
        points=points,
        domain=domain,
        workers=workers,
        gamma1=r.get("scan", "gamma1_per_s"),
        temperature_scaling=r.get("scan", "temperature_scaling", True),
        optical_dephasing=dephasing,
        terms=terms,
    )


def _noise(r: _Reader) -> Optional[NoiseSpec]:
    if not r.has("noise"):
        return None
    rel = r.get("noise", "rel_sigma", 0.0)
    if not rel >= 0:
        r.errors.append(f"[noise] rel_sigma must be >= 0, got {rel!r}")
    return NoiseSpec(rel, r.get("noise", "seed", 0))


def _inference(r: _Reader) -> InferenceSettings:
    rel = r.get("inference", "pressure_rel_uncertainty", 0.0)
    ub = r.get("inference", "b_field_uncertainty_ut", 0.0)
    uk = r.get("inference", "known_shift_uncertainty_hz_per_mbar", 0.0)
    for key, val in (("pressure_rel_uncertainty", rel), ("b_field_uncertainty_ut", ub),
                     ("known_shift_uncertainty_hz_per_mbar", uk)):
        if not val >= 0:
            r.errors.append(f"[inference] {key} must be >= 0, got {val!r}")
    which = r.one_of("inference", ("known_shift_hz_per_mbar", "known_shift_hz_per_torr"))
    known = None
    if which is not None:
        value = r.get("inference", which)
        if value is not None:
            known = value if which.endswith("mbar") else convert_per_pressure(value, "torr", "mbar")
    return InferenceSettings(rel, ub * 1e-6, r.get("inference", "subtract_diffusion", False), known, uk)


def parse_config(text: str = "", overrides: Optional[Dict[str, str]] = None,
                 origin: str = "<config>") -> RunConfig:
    """Build a RunConfig from config text plus ``{"section.key": value}`` overrides."""
    raw = _raw_sections(text, origin)
    errors = _check_keys(raw)
    for dotted, value in (overrides or {}).items():
        section, _, key = dotted.partition(".")
        if section not in SCHEMA or key not in SCHEMA[section]:
            errors.append(f"override {dotted!r} does not name a known section.key")
            continue
        raw.setdefault(section, {})[key] = str(value)
    r = _Reader(raw)
    r.errors.extend(errors)
    atom = _atom(r)
    gas = _gas(r)
    cell = _cell(r)
    cond = _conditions(r, cell)
    pulse = _pulse(r, atom)
    scan = _scan(r, gas)
    noise = _noise(r)
    inference = _inference(r)
    freq_offset = r.get("conditions", "freq_offset_hz", 0.0)
    if r.errors:
        raise ConfigError(f"{origin}: " + "; ".join(r.errors))
    for note in r.notices:
        log.info(note)
    return RunConfig(atom, gas, cell, cond, pulse, scan, noise, inference, freq_offset, tuple(r.notices))


def load_config(path: Union[str, Path, None] = None, overrides: Optional[Dict[str, str]] = None) -> RunConfig:
    if path is None:
        return parse_config("", overrides, origin="<defaults>")
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    return parse_config(text, overrides, origin=str(path))
