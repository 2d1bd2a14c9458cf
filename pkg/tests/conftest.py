
import pytest

from pulsecpt import RB87, ExperimentConditions, PulseTrainSpec, get_gas
from pulsecpt.core import convert_per_pressure

ACCEPTANCE_LINES = []

XE_PRESSURE_PA = 5330.0
XE_TEMPERATURE = 294.0
AR_PRESSURE_PA = 3300.0
AR_TEMPERATURE = 307.15
REP_FREQ = 525.7e6


def record(criterion, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def atom():
    return RB87


@pytest.fixture
def xenon():
    return get_gas("Xe").with_(shift_coeff=-885.0)


@pytest.fixture
def xenon_cond():
    return ExperimentConditions(XE_PRESSURE_PA, XE_TEMPERATURE, 50e-6)


@pytest.fixture
def argon():
    return get_gas("Ar").with_(d0=0.23, sigma2=3.7e-22, shift_coeff=convert_per_pressure(-51.0, "torr", "mbar"))


@pytest.fixture
def argon_cond():
    return ExperimentConditions(AR_PRESSURE_PA, AR_TEMPERATURE, 84.1e-6)


@pytest.fixture
def weak_pulse():
    return PulseTrainSpec(REP_FREQ, 15e-12, area1=1e-4, area2=1e-4, m=13)
