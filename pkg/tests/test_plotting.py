import re
from pathlib import Path

import numpy as np
import pytest

from pulsecpt.lineshape import LorentzianParams, closed_form_signal, fit
from pulsecpt.plotting import axis_limits, emit_plot
from pulsecpt.spectrum import ScanResult, inject_noise

GOLDEN = Path(__file__).parent / "data" / "golden_plot.svg"


def golden_spectrum():
    x = np.linspace(525.7e6 - 6e3, 525.7e6 + 6e3, 61)
    y = closed_form_signal(x, LorentzianParams(-0.4, 525.7e6, 1.3e3, 1.0))
    return inject_noise(ScanResult(x, y, m=13), 0.02, 1)


def test_golden_file():
    spec = golden_spectrum()
    svg = emit_plot(spec, fit(spec), title="golden")
    assert svg == GOLDEN.read_text()


def test_deterministic_and_written(tmp_path):
    spec = golden_spectrum()
    path = tmp_path / "p.svg"
    a = emit_plot(spec, path=path)
    assert path.read_text() == a == emit_plot(spec)
    assert "<dc:date>" not in a


def test_points_only_mode():
    spec = golden_spectrum()
    # labels are rendered as paths; the fit curve is the only tab:red element
    assert "#d62728" not in emit_plot(spec)
    assert "#d62728" in emit_plot(spec, fit(spec))


@pytest.mark.parametrize("values", [[0.0, 10.0], [5.0, 5.0], [-3.0, 1.0, 7.0], [0.0, 0.0]])
def test_axis_padding(values):
    lo, hi = axis_limits(values)
    extent = max(values) - min(values)
    if extent > 0:
        assert lo == pytest.approx(min(values) - 0.05 * extent)
        assert hi == pytest.approx(max(values) + 0.05 * extent)
    assert lo < min(values) and hi > max(values)


def test_svg_view_box():
    svg = emit_plot(golden_spectrum())
    assert re.search(r'viewBox="0 0 432 288"', svg)
