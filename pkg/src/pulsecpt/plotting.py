"""Static SVG figure of a spectrum with an optional fitted Lorentzian.

Output is byte-identical for identical input: the Agg backend is used, the
SVG id salt is fixed and no creation date is embedded.
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import Optional, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .lineshape import LorentzianFit, closed_form_signal  # noqa: E402
from .spectrum import ScanResult  # noqa: E402

__all__ = ["axis_limits", "emit_plot"]

PAD = 0.05

_DOMAIN_LABEL = {
    "pulse_rep": "pulse repetition frequency",
    "hyperfine": "m x pulse repetition frequency",
}


def axis_limits(values, pad: float = PAD):
    """Data range widened by ``pad`` of its extent on each side."""
    lo, hi = float(np.min(values)), float(np.max(values))
    extent = hi - lo
    if extent == 0:
        extent = abs(lo) if lo != 0 else 1.0
    return lo - pad * extent, hi + pad * extent


def emit_plot(spec: ScanResult, fit: Optional[LorentzianFit] = None,
              path: Union[str, Path, None] = None, title: Optional[str] = None) -> str:
    """Render the spectrum (points, optional fit curve) and return the SVG text.

    The x axis shows the offset from the first scan frequency so that kHz-wide
    lines on a GHz carrier stay readable; the offset is printed in the label.
    """
    x0 = float(spec.scan_freq[0])
    x = spec.scan_freq - x0
    rc = {"svg.hashsalt": "pulsecpt", "svg.fonttype": "path", "path.simplify": False}
    with plt.rc_context(rc):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        if spec.sigma is not None:
            ax.errorbar(x, spec.signal, yerr=spec.sigma, fmt="o", ms=3, lw=0.8, color="k", label="data")
        else:
            ax.plot(x, spec.signal, "o", ms=3, color="k", label="data")
        ys = [spec.signal]
        if fit is not None:
            xf = np.linspace(spec.scan_freq[0], spec.scan_freq[-1], 1001)
            yf = closed_form_signal(xf, fit.params)
            ax.plot(xf - x0, yf, "-", lw=1.2, color="tab:red", label="Lorentzian fit")
            ys.append(yf)
            ax.legend(loc="best", frameon=False)
        ax.set_xlim(*axis_limits(x))
        ax.set_ylim(*axis_limits(np.concatenate(ys)))
        ax.set_xlabel(f"{_DOMAIN_LABEL[spec.domain]} - {x0:.6f} Hz  [Hz]  (domain={spec.domain}, m={spec.m})")
        ax.set_ylabel("fluorescence signal [arb. units]")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
        plt.close(fig)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text
