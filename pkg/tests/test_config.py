import logging
import math

import pytest

from pulsecpt import RB87
from pulsecpt.config import load_config, parse_config
from pulsecpt.core import convert_per_pressure
from pulsecpt.errors import ConfigError

MINIMAL = """
[gas]
name = Xe
[conditions]
pressure_mbar = 53.3
temperature_k = 294
"""


def test_shipped_configs_parse(pytestconfig):
    root = pytestconfig.rootpath / "configs"
    xe = load_config(root / "xenon.ini")
    assert xe.gas.name == "Xe" and xe.gas.shift_coeff == -885.0
    assert xe.conditions.pressure == pytest.approx(5330.0)
    assert xe.conditions.b_field == pytest.approx(50e-6)
    assert xe.pulse.m == 13 and xe.pulse.duration_fwhm == pytest.approx(15e-12)
    assert xe.noise.seed == 1
    ar = load_config(root / "argon.ini")
    assert ar.inference.known_shift_coeff == pytest.approx(convert_per_pressure(-51.0, "torr", "mbar"))
    assert ar.conditions.temperature == pytest.approx(307.15)


def test_defaults_are_logged(caplog):
    with caplog.at_level(logging.INFO, logger="pulsecpt"):
        cfg = parse_config(MINIMAL)
    assert cfg.atom == RB87
    assert cfg.pulse.rep_freq == pytest.approx(RB87.nu12_free / 13)
    assert cfg.scan.optical_dephasing == math.inf
    assert any("rep_freq_hz" in n for n in cfg.notices)
    assert any("rep_freq_hz" in rec.getMessage() for rec in caplog.records)


def test_errors_are_aggregated():
    text = MINIMAL + """
[scan]
points = 3
bogus = 1
[plasma]
x = 1
[noise]
rel_sigma = -1
"""
    with pytest.raises(ConfigError) as exc:
        parse_config(text, origin="run.ini")
    msg = str(exc.value)
    assert msg.startswith("run.ini: ")
    for fragment in ("points must be >= 5", "unknown key 'bogus'", "unknown section [plasma]", "rel_sigma"):
        assert fragment in msg


def test_bad_value_types():
    with pytest.raises(ConfigError, match="pressure_mbar"):
        parse_config(MINIMAL.replace("53.3", "lots"))
    with pytest.raises(ConfigError, match="only one of"):
        parse_config(MINIMAL + "pressure_torr = 40\n")
    with pytest.raises(ConfigError):
        parse_config("[gas\nname=Xe")


def test_pressure_units_agree():
    a = parse_config(MINIMAL)
    b = parse_config(MINIMAL.replace("pressure_mbar = 53.3", "pressure_torr = " + repr(53.3 * 0.76 / 1.01325)))
    c = parse_config(MINIMAL.replace("pressure_mbar = 53.3", "pressure_pa = 5330"))
    assert b.conditions.pressure == pytest.approx(a.conditions.pressure, rel=1e-12)
    assert c.conditions.pressure == pytest.approx(a.conditions.pressure, rel=1e-12)
    d = parse_config(MINIMAL.replace("temperature_k = 294", "temperature_c = 20.85"))
    assert d.conditions.temperature == pytest.approx(294.0)


def test_shift_units():
    torr = parse_config(MINIMAL.replace("name = Xe", "name = Xe\nshift_hz_per_torr = -100"))
    assert torr.gas.shift_coeff == pytest.approx(-100 * 0.76 / 1.01325, rel=1e-12)


def test_overrides():
    cfg = parse_config(MINIMAL, {"pulse.m": "10", "scan.points": "51", "conditions.b_field_ut": "84.1"})
    assert cfg.pulse.m == 10 and cfg.scan.points == 51
    assert cfg.conditions.b_field == pytest.approx(84.1e-6)
    with pytest.raises(ConfigError, match="does not name"):
        parse_config(MINIMAL, {"pulse.colour": "red"})


def test_require_names_missing_sections():
    cfg = parse_config("")
    assert cfg.gas is None and cfg.conditions is None
    with pytest.raises(ConfigError, match=r"\[gas\], \[conditions\]"):
        cfg.require("gas", "conditions")


def test_unknown_gas_needs_mass():
    with pytest.raises(ConfigError, match="mass_u"):
        parse_config(MINIMAL.replace("name = Xe", "name = Kr2"))


def test_missing_file():
    with pytest.raises(ConfigError, match="cannot read"):
        load_config("/nonexistent.ini")
