"""Command-line entry point ``pulsecpt``.

Subcommands::

    simulate-scan     config -> spectrum CSV
    closed-form       config (or explicit flags) -> Lorentzian model CSV
    fit               spectrum CSV -> JSON fit report
    infer-sigma2      config + spectrum CSV -> JSON report with sigma2
    infer-shift       config + spectrum CSV -> JSON report with the pressure shift
    infer-hfs         config + spectrum CSV -> JSON report with the free-atom splitting
    pulse-info        config -> JSON pulse diagnostics
    optimal-pressure  config -> JSON optimum buffer-gas pressure
    plot              spectrum CSV -> SVG (optionally with the fitted curve)

Precedence of values: command-line flag > config file > built-in default.
Exit codes: 0 success, 2 usage, 3 configuration error, 4 data error,
5 fit did not converge. ``PULSECPT_LOG_LEVEL`` sets the log verbosity
(default WARNING).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from typing import Dict, List, Optional

import numpy as np

from .config import RunConfig, load_config
from .dynamics import ScanGrid, default_grid, resonance_frequency, scan_spectrum
from .errors import ConfigError, DataError, NotConverged, PulseCPTError
from .inference import InferenceReport, extract_pressure_shift, extract_sigma2, recover_hyperfine
from .lineshape import LorentzianFit, LorentzianParams, closed_form_signal, fit
from .plotting import emit_plot
from .pulses import TIME_BANDWIDTH, autocorrelation_fwhm, excess_bandwidth, fourier_limit_fwhm
from .relaxation import gamma12, optimal_pressure
from .spectrum import ScanResult, inject_noise, read_csv, write_csv
from .zeeman import clock_shift, clock_shift_coefficient, isolation_check

log = logging.getLogger("pulsecpt")

EXIT_OK = 0
EXIT_CONFIG = 3
EXIT_DATA = 4
EXIT_NOT_CONVERGED = 5


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _emit_text(text: str, out: Optional[str]):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _emit_report(report: dict, out: Optional[str]):
    _emit_text(json.dumps(_jsonable(report), indent=2, sort_keys=False) + "\n", out)


def _overrides(args) -> Dict[str, str]:
    ov: Dict[str, str] = {}
    for item in getattr(args, "set", None) or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects SECTION.KEY=VALUE, got {item!r}")
        ov[key.strip()] = value.strip()
    named = {
        "seed": "noise.seed", "points": "scan.points", "span_hz": "scan.span_hz",
        "center_hz": "scan.center_hz", "domain": "scan.domain", "workers": "scan.workers",
        "rel_sigma": "noise.rel_sigma",
    }
    for attr, key in named.items():
        value = getattr(args, attr, None)
        if value is not None:
            ov[key] = str(value)
    return ov


def _config(args) -> RunConfig:
    return load_config(getattr(args, "config", None), _overrides(args))


def build_grid(cfg: RunConfig) -> ScanGrid:
    s = cfg.scan
    if s.center is not None and s.span is not None:
        return ScanGrid(s.center, s.span, s.points, s.domain)
    cfg.require("gas", "conditions")
    auto = default_grid(cfg.pulse, cfg.atom, cfg.gas, cfg.conditions, points=s.points, widths=s.widths,
                        domain=s.domain, terms=s.terms, temperature_scaling=s.temperature_scaling)
    center = auto.center if s.center is None else s.center
    span = auto.span if s.span is None else s.span
    return ScanGrid(center, span, s.points, s.domain)


def simulate(cfg: RunConfig) -> ScanResult:
    """Run the scan described by ``cfg`` (noise included when configured)."""
    cfg.require("gas", "conditions")
    s = cfg.scan
    return scan_spectrum(cfg.pulse, cfg.atom, cfg.gas, cfg.conditions, build_grid(cfg), cfg.noise,
                         terms=s.terms, gamma1=s.gamma1, freq_offset=cfg.freq_offset,
                         temperature_scaling=s.temperature_scaling, workers=s.workers,
                         optical_dephasing=s.optical_dephasing)


def _fit_or_fail(spec: ScanResult) -> LorentzianFit:
    result = fit(spec)
    if not result.converged:
        raise NotConverged(f"fit did not converge after {result.n_iterations} iterations: {result.message}")
    return result


def cmd_simulate_scan(args) -> int:
    cfg = _config(args)
    _emit_text(write_csv(simulate(cfg)), args.out)
    return EXIT_OK


def cmd_closed_form(args) -> int:
    cfg = _config(args)
    fwhm = args.fwhm_hz
    center = cfg.scan.center
    meta = {"model": "lorentzian"}
    if fwhm is None or center is None:
        cfg.require("gas", "conditions")
        relax = gamma12(cfg.cell, cfg.gas, cfg.conditions, cfg.atom, terms=cfg.scan.terms,
                        temperature_scaling=cfg.scan.temperature_scaling)
        factor = 1.0 / cfg.pulse.m if cfg.scan.domain == "pulse_rep" else 1.0
        if fwhm is None:
            fwhm = relax.fwhm_hf * factor
        if center is None:
            center = resonance_frequency(cfg.atom, cfg.gas, cfg.conditions) * factor
        meta["gamma12_per_s"] = relax.total
    span = cfg.scan.span if cfg.scan.span is not None else cfg.scan.widths * fwhm
    grid = ScanGrid(center, span, cfg.scan.points, cfg.scan.domain)
    params = LorentzianParams(args.amplitude, center, fwhm, args.offset)
    meta.update({"amplitude": params.amplitude, "center_hz": params.center, "fwhm_hz": params.fwhm,
                 "offset": params.offset})
    x = grid.values()
    spec = ScanResult(x, closed_form_signal(x, params), domain=grid.domain, m=cfg.pulse.m, metadata=meta)
    if cfg.noise is not None:
        spec = inject_noise(spec, cfg.noise.rel_sigma, cfg.noise.seed)
    _emit_text(write_csv(spec), args.out)
    return EXIT_OK


def _fit_report(spec: ScanResult, result: LorentzianFit) -> dict:
    return {"input_metadata": dict(spec.metadata), "fit": result.as_dict()}


def cmd_fit(args) -> int:
    spec = read_csv(args.input)
    result = fit(spec)
    _emit_report(_fit_report(spec, result), args.out)
    if not result.converged:
        log.error("fit did not converge: %s", result.message)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _inputs(cfg: RunConfig, spec: ScanResult) -> dict:
    cond = cfg.conditions
    return {
        "atom": cfg.atom.name,
        "gas": cfg.gas.name if cfg.gas else None,
        "pressure_mbar": cond.pressure_mbar,
        "temperature_k": cond.temperature,
        "b_field_ut": cond.b_field * 1e6,
        "m": spec.m,
        "domain": spec.domain,
        "pressure_rel_uncertainty": cfg.inference.pressure_rel_uncertainty,
        "b_field_uncertainty_ut": cfg.inference.b_field_uncertainty * 1e6,
    }


def _warnings(cfg: RunConfig, result: LorentzianFit) -> List[str]:
    out = []
    if result.r2 < 0.99:
        out.append(f"fit R^2 = {result.r2:.4f} is below 0.99; the Lorentzian model may not describe the data")
    if abs(result.skew) > 1.0:
        out.append(f"residual skew {result.skew:.3g}: line may be asymmetric (light shift?)")
    gamma = math.pi * result.fwhm_hf
    iso = isolation_check(cfg.atom, cfg.conditions.b_field, gamma) if cfg.conditions.b_field > 0 else None
    if iso is not None and not iso.isolated:
        out.append(f"m_F={iso.nearest_m_f:+g} line only {iso.ratio:.3g} linewidths away; "
                   f"0-0 resonance not isolated")
    return out


def _prepare_inference(args, need_gas: bool):
    cfg = _config(args)
    cfg.require("conditions", *(("gas",) if need_gas else ()))
    spec = read_csv(args.input)
    result = _fit_or_fail(spec)
    report = InferenceReport(inputs=_inputs(cfg, spec), warnings=_warnings(cfg, result))
    return cfg, spec, result, report


def _finish(report: InferenceReport, spec, result, out):
    data = report.as_dict()
    data["fit"] = result.as_dict()
    data["input_metadata"] = dict(spec.metadata)
    _emit_report(data, out)
    return EXIT_OK


def cmd_infer_sigma2(args) -> int:
    cfg, spec, result, report = _prepare_inference(args, need_gas=True)
    inf = cfg.inference
    report.sigma2 = extract_sigma2(result, cfg.conditions, cfg.atom, cfg.gas, cfg.cell,
                                   subtract_diffusion=inf.subtract_diffusion,
                                   pressure_rel_uncertainty=inf.pressure_rel_uncertainty,
                                   temperature_scaling=cfg.scan.temperature_scaling)
    report.inputs["subtract_diffusion"] = inf.subtract_diffusion
    return _finish(report, spec, result, args.out)


def cmd_infer_shift(args) -> int:
    cfg, spec, result, report = _prepare_inference(args, need_gas=False)
    inf = cfg.inference
    report.shift_coeff = extract_pressure_shift(result, cfg.conditions, cfg.atom, m=spec.m,
                                                pressure_rel_uncertainty=inf.pressure_rel_uncertainty,
                                                b_field_uncertainty=inf.b_field_uncertainty)
    return _finish(report, spec, result, args.out)


def cmd_infer_hfs(args) -> int:
    cfg, spec, result, report = _prepare_inference(args, need_gas=False)
    inf = cfg.inference
    known = inf.known_shift_coeff
    if known is None:
        if cfg.gas is None:
            raise ConfigError("[inference] known_shift_hz_per_mbar (or _per_torr) is required for infer-hfs")
        known = cfg.gas.shift_coeff
        report.warnings.append("known shift coefficient taken from [gas] shift; set [inference] "
                               "known_shift_hz_per_mbar to use an independent literature value")
    report.nu12_recovered = recover_hyperfine(result, cfg.conditions, cfg.atom, known, m=spec.m,
                                              pressure_rel_uncertainty=inf.pressure_rel_uncertainty,
                                              b_field_uncertainty=inf.b_field_uncertainty,
                                              shift_coeff_uncertainty=inf.known_shift_uncertainty)
    report.inputs["known_shift_hz_per_mbar"] = known
    report.inputs["literature_nu12_hz"] = cfg.atom.nu12_free
    report.inputs["deviation_from_literature_hz"] = report.nu12_recovered.value - cfg.atom.nu12_free
    return _finish(report, spec, result, args.out)


def cmd_pulse_info(args) -> int:
    cfg = _config(args)
    p = cfg.pulse
    report = {
        "shape": p.shape,
        "duration_fwhm_s": p.duration_fwhm,
        "rep_freq_hz": p.rep_freq,
        "period_s": p.period,
        "m": p.m,
        "time_bandwidth_product": TIME_BANDWIDTH[p.shape],
        "fourier_limit_fwhm_hz": fourier_limit_fwhm(p),
        "autocorrelation_fwhm_s": autocorrelation_fwhm(p),
        "autocorrelation_to_pulse_ratio": autocorrelation_fwhm(p) / p.duration_fwhm,
        "clock_shift_coefficient_hz_per_g2": clock_shift_coefficient(cfg.atom) * 1e-8,
    }
    if p.spectral_fwhm_measured is not None:
        report["spectral_fwhm_measured_hz"] = p.spectral_fwhm_measured
        report["excess_bandwidth_hz"] = excess_bandwidth(p)
    _emit_report(report, args.out)
    return EXIT_OK


def cmd_optimal_pressure(args) -> int:
    cfg = _config(args)
    cfg.require("gas", "conditions")
    s = cfg.scan
    opt = optimal_pressure(cfg.cell, cfg.gas, cfg.atom, cfg.conditions.temperature,
                           temperature_scaling=s.temperature_scaling)
    here = gamma12(cfg.cell, cfg.gas, cfg.conditions, cfg.atom, terms="both",
                   temperature_scaling=s.temperature_scaling)
    b = opt.breakdown
    report = {
        "gas": cfg.gas.name,
        "temperature_k": cfg.conditions.temperature,
        "optimal_pressure_mbar": opt.pressure_mbar,
        "gamma12_at_optimum_per_s": b.total,
        "diffusion_rate_at_optimum_per_s": b.diffusion_rate,
        "collision_rate_at_optimum_per_s": b.collision_rate,
        "fwhm_hyperfine_at_optimum_hz": b.fwhm_hf,
        "configured_pressure_mbar": cfg.conditions.pressure_mbar,
        "gamma12_at_configured_pressure_per_s": here.total,
        "fwhm_hyperfine_at_configured_pressure_hz": here.fwhm_hf,
        "clock_shift_hz": clock_shift(cfg.atom, cfg.conditions.b_field),
    }
    _emit_report(report, args.out)
    return EXIT_OK


def cmd_plot(args) -> int:
    spec = read_csv(args.input)
    result = _fit_or_fail(spec) if args.with_fit else None
    text = emit_plot(spec, result, title=args.title)
    _emit_text(text, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pulsecpt", description="Pulse-train dark-resonance toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True, scan=False):
        p.add_argument("--out", "-o", default=None, help="output path (default: stdout)")
        if config:
            p.add_argument("--config", "-c", default=None, help="run configuration file")
            p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                           help="override one config key (repeatable)")
        if scan:
            p.add_argument("--seed", type=int, default=None, help="noise seed ([noise] seed)")
            p.add_argument("--rel-sigma", type=float, default=None, help="noise level ([noise] rel_sigma)")
            p.add_argument("--points", type=int, default=None, help="scan points ([scan] points)")
            p.add_argument("--span-hz", type=float, default=None, help="scan span ([scan] span_hz)")
            p.add_argument("--center-hz", type=float, default=None, help="scan centre ([scan] center_hz)")
            p.add_argument("--domain", choices=("pulse_rep", "hyperfine"), default=None,
                           help="scan axis domain ([scan] domain)")
            p.add_argument("--workers", type=int, default=None, help="worker threads ([scan] workers)")
        return p

    p = common(sub.add_parser("simulate-scan", help="simulate a dark-resonance scan"), scan=True)
    p.set_defaults(func=cmd_simulate_scan)

    p = common(sub.add_parser("closed-form", help="sample the Lorentzian model"), scan=True)
    p.add_argument("--fwhm-hz", type=float, default=None, help="width in the scan domain")
    p.add_argument("--amplitude", type=float, default=-0.5, help="signed peak height (negative: dip)")
    p.add_argument("--offset", type=float, default=1.0, help="background level")
    p.set_defaults(func=cmd_closed_form)

    p = common(sub.add_parser("fit", help="fit a Lorentzian to a spectrum CSV"), config=False)
    p.add_argument("input", help="spectrum CSV")
    p.set_defaults(func=cmd_fit)

    for name, func, text in (("infer-sigma2", cmd_infer_sigma2, "decoherence cross section from the width"),
                             ("infer-shift", cmd_infer_shift, "pressure-shift coefficient from the centre"),
                             ("infer-hfs", cmd_infer_hfs, "free-atom hyperfine splitting")):
        p = common(sub.add_parser(name, help=text))
        p.add_argument("input", help="spectrum CSV")
        p.set_defaults(func=func)

    p = common(sub.add_parser("pulse-info", help="pulse diagnostics"))
    p.set_defaults(func=cmd_pulse_info)

    p = common(sub.add_parser("optimal-pressure", help="buffer-gas pressure of minimum linewidth"))
    p.set_defaults(func=cmd_optimal_pressure)

    p = common(sub.add_parser("plot", help="SVG figure of a spectrum"), config=False)
    p.add_argument("input", help="spectrum CSV")
    p.add_argument("--with-fit", action="store_true", help="overlay the fitted Lorentzian")
    p.add_argument("--title", default=None)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("PULSECPT_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except NotConverged as exc:
        log.error("%s", exc)
        return EXIT_NOT_CONVERGED
    except DataError as exc:
        log.error("data error: %s", exc)
        return EXIT_DATA
    except PulseCPTError as exc:  # pragma: no cover - every subclass is handled above
        log.error("%s", exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
