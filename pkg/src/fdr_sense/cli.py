"""Command-line entry point.

One subcommand per analysis stage: ``line`` (microstrip math), ``resonate``
(netlist resonance search), ``jcasa`` (full antenna model per diode state),
``analyze`` (sweep files), ``calibrate`` / ``estimate`` / ``sensitivity``
(inversion chain), ``mode`` (state table), and ``sense`` (the measurement
pipeline).  ``--json`` switches any subcommand to a single machine-readable
object with ``schema_version: 1``.

Exit codes: 0 success, 1 domain/input error (message on stderr), 2 usage
error.  Flag values beat the optional config file named by
``FDR_SENSE_CONFIG``, which beats built-in defaults.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import __version__, calibration, modes, netlist, sweep
from .circuit import ResonanceMethod, find_resonances, reflection
from .errors import NoDipFound, SensingDenied, ToolkitError
from .microstrip import (
    FormulaFidelity,
    MicrostripLine,
    Substrate,
    analyze as analyze_line,
)

SCHEMA_VERSION = 1

_CONFIG_KEYS = ("threshold_db", "repeatability_mhz", "fu_ghz", "z_ref_ohm",
                "points")


def _load_config(path: str | None) -> dict[str, float]:
    if not path:
        return {}
    config: dict[str, float] = {}
    for line_number, raw in enumerate(Path(path).read_text().splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        key, _, value = (part.strip() for part in body.partition("="))
        if key not in _CONFIG_KEYS:
            raise ToolkitError(f"config line {line_number}: unknown key {key!r}")
        try:
            config[key] = float(value)
        except ValueError:
            raise ToolkitError(
                f"config line {line_number}: non-numeric value for {key}"
            ) from None
    return config


def _resolve(flag_value, config: dict, key: str, default: float) -> float:
    if flag_value is not None:
        return flag_value
    return config.get(key, default)


def _parse_span(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise ToolkitError(f"span must look like 'lo:hi' in GHz, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise ToolkitError(f"non-numeric span {text!r}") from None


def _fidelity(name: str) -> FormulaFidelity:
    return (FormulaFidelity.PAPER_LITERAL if name == "paper-literal"
            else FormulaFidelity.STANDARD)


def _dip_payload(dip: sweep.Dip) -> dict:
    return {
        "f0_ghz": dip.f0_ghz,
        "depth_db": dip.depth_db,
        "band_lo_ghz": dip.band_lo_ghz,
        "band_hi_ghz": dip.band_hi_ghz,
    }


# -- subcommand handlers ------------------------------------------------------

def _cmd_line(args, config) -> tuple[dict, str]:
    substrate = Substrate(args.eps_r, args.tan_delta, args.height_mm)
    line = MicrostripLine(substrate, args.width_mm, args.length_mm)
    params = analyze_line(line, _fidelity(args.fidelity))
    payload = {
        "schema_version": SCHEMA_VERSION,
        "fidelity": args.fidelity,
        "eps_eff": params.eps_eff,
        "z0_ohm": params.z0_ohm,
        "inductance_nh": params.inductance_nh,
    }
    text = "\n".join([
        f"eps_eff        {params.eps_eff:12.6f}",
        f"z0             {params.z0_ohm:12.6f} ohm",
        f"inductance     {params.inductance_nh:12.6f} nH",
    ])
    return payload, text


def _cmd_resonate(args, config) -> tuple[dict, str]:
    net = netlist.parse_netlist(Path(args.netlist).read_text())
    span = _parse_span(args.span)
    points = int(_resolve(args.points, config, "points", 1001))
    z_ref = _resolve(args.z_ref, config, "z_ref_ohm", 50.0)
    threshold = _resolve(args.threshold_db, config, "threshold_db", -10.0)
    method = (ResonanceMethod.REFLECTION_DIP if args.method == "dip"
              else ResonanceMethod.REACTANCE_ZERO)
    report = find_resonances(net, span, points, method, z_ref, threshold)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "method": report.method.value,
        "reference_ohm": report.reference_ohm,
        "span_ghz": [span[0], span[1]],
        "resonances_ghz": list(report.frequencies_ghz),
    }
    lines = [f"{len(report.frequencies_ghz)} resonance(s), "
             f"method={report.method.value}"]
    lines += [f"  {f:.6f} GHz" for f in report.frequencies_ghz]
    return payload, "\n".join(lines)


def _cmd_jcasa(args, config) -> tuple[dict, str]:
    if args.params:
        params = netlist.load_params(args.params)
    else:
        params = netlist.load_default_params()
    net = params.build(args.state)
    span = _parse_span(args.span)
    points = int(_resolve(args.points, config, "points", 1501))
    z_ref = _resolve(args.z_ref, config, "z_ref_ohm", 50.0)
    threshold = _resolve(args.threshold_db, config, "threshold_db", -10.0)
    report = find_resonances(net, span, points,
                             ResonanceMethod.REFLECTION_DIP, z_ref, threshold)
    dips = []
    for f0 in report.frequencies_ghz:
        gamma = reflection(net, f0, z_ref)
        dips.append({"f0_ghz": f0, "depth_db": 20.0 * math.log10(abs(gamma))})
    payload = {
        "schema_version": SCHEMA_VERSION,
        "state": args.state,
        "span_ghz": [span[0], span[1]],
        "threshold_db": threshold,
        "dips": dips,
    }
    lines = [f"state {args.state}: {len(dips)} reflection dip(s)"]
    lines += [f"  {d['f0_ghz']:.4f} GHz  {d['depth_db']:7.2f} dB"
              for d in dips]
    return payload, "\n".join(lines)


def _cmd_analyze(args, config) -> tuple[dict, str]:
    threshold = _resolve(args.threshold_db, config, "threshold_db", -10.0)
    max_shift = _resolve(args.repeatability_mhz, config,
                         "repeatability_mhz", 10.0)
    sweeps = []
    reports = []
    for path in args.input:
        parsed = sweep.load_sweep(path)
        report = sweep.detect_dips(parsed, threshold)
        sweeps.append((path, parsed, report))
        reports.append({
            "file": str(path),
            "dips": [_dip_payload(d) for d in report.dips],
        })
    payload = {
        "schema_version": SCHEMA_VERSION,
        "threshold_db": threshold,
        "sweeps": reports,
    }
    lines = []
    for entry in reports:
        lines.append(f"{entry['file']}:")
        for d in entry["dips"]:
            band = ""
            if d["band_lo_ghz"] is not None and d["band_hi_ghz"] is not None:
                band = f"  band {d['band_lo_ghz']:.4f}-{d['band_hi_ghz']:.4f} GHz"
            lines.append(f"  dip {d['f0_ghz']:.4f} GHz "
                         f"{d['depth_db']:7.2f} dB{band}")
    if len(sweeps) == 2:
        rep = sweep.compare_repeatability(sweeps[0][1], sweeps[1][1],
                                          max_shift, threshold)
        payload["repeatability"] = {
            "max_shift_mhz": rep.max_shift_mhz,
            "count_mismatch": rep.count_mismatch,
            "flagged": rep.flagged,
            "pairs": [{
                "f0_a_ghz": p.f0_a_ghz,
                "f0_b_ghz": p.f0_b_ghz,
                "shift_mhz": p.shift_mhz,
                "flagged": p.flagged,
            } for p in rep.pairs],
        }
        lines.append(f"repeatability (limit {rep.max_shift_mhz:g} MHz): "
                     + ("FLAGGED" if rep.flagged else "ok"))
        for p in rep.pairs:
            mark = " *" if p.flagged else ""
            lines.append(f"  {p.f0_a_ghz:.4f} vs {p.f0_b_ghz:.4f} GHz: "
                         f"{p.shift_mhz:.2f} MHz{mark}")
    if args.plot:
        _write_plot(args.plot, sweeps, threshold)
        lines.append(f"plot written to {args.plot}")
        payload["plot"] = str(args.plot)
    return payload, "\n".join(lines)


def _write_plot(path: str, sweeps, threshold_db: float) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 5))
    for file_path, parsed, report in sweeps:
        ax.plot(parsed.freq_ghz, parsed.db, label=Path(file_path).name)
        for dip in report.dips:
            ax.plot([dip.f0_ghz], [dip.depth_db], "v", color="crimson")
            ax.annotate(f"{dip.f0_ghz:.3f}", (dip.f0_ghz, dip.depth_db),
                        textcoords="offset points", xytext=(4, -10),
                        fontsize=8)
    ax.axhline(threshold_db, color="gray", linestyle="--", linewidth=0.8)
    ax.set_xlabel("frequency (GHz)")
    ax.set_ylabel("|S11| (dB)")
    ax.legend(loc="lower right", fontsize=8)
    ax.grid(True, alpha=0.4)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _cmd_calibrate(args, config) -> tuple[dict, str]:
    points = calibration.load_points_csv(args.points)
    f_u = _resolve(args.fu_ghz, config, "fu_ghz", calibration.DEFAULT_F_U_GHZ)
    model = calibration.fit_linear(points, f_u)
    if args.out:
        calibration.save_model(model, args.out)
    payload = model.to_dict()  # carries schema_version already
    text = "\n".join([
        f"f_u            {model.f_u_ghz:12.6f} GHz",
        f"slope          {model.slope:12.6f} eps_r/GHz",
        f"intercept      {model.intercept:12.6f} eps_r",
        f"fit residual   {model.fit_residual:12.3e}",
    ] + ([f"model written to {args.out}"] if args.out else []))
    return payload, text


def _load_model_and_table(args, config):
    f_u_override = getattr(args, "fu_ghz", None)
    if args.model:
        model = calibration.load_model(args.model)
        if f_u_override is not None:
            model = calibration.CalibrationModel(
                f_u_override, model.slope, model.intercept,
                model.fit_residual)
    else:
        f_u = _resolve(f_u_override, config, "fu_ghz",
                       calibration.DEFAULT_F_U_GHZ)
        model = calibration.default_model(f_u)
    if getattr(args, "soil_table", None):
        table = calibration.load_soil_table_csv(args.soil_table)
    else:
        table = calibration.DEFAULT_SOIL_TABLE
    return model, table


def _estimate_payload(est: calibration.Estimate) -> dict:
    return {
        "delta_f_ghz": est.delta_f_ghz,
        "eps_r_real": est.eps_r_real,
        "vwc_percent": est.vwc_percent,
        "extrapolated": est.extrapolated,
    }


def _cmd_estimate(args, config) -> tuple[dict, str]:
    model, table = _load_model_and_table(args, config)
    est = calibration.estimate(args.fm_ghz, model, table)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "f_m_ghz": args.fm_ghz,
        "f_u_ghz": model.f_u_ghz,
        **_estimate_payload(est),
    }
    text = "\n".join([
        f"delta_f        {est.delta_f_ghz:12.6f} GHz",
        f"eps_r          {est.eps_r_real:12.6f}",
        f"vwc            {est.vwc_percent:12.6f} %",
        f"extrapolated   {str(est.extrapolated).lower():>12}",
    ])
    return payload, text


def _cmd_sensitivity(args, config) -> tuple[dict, str]:
    readings = calibration.load_readings_csv(args.readings)
    f_u = _resolve(args.fu_ghz, config, "fu_ghz", calibration.DEFAULT_F_U_GHZ)
    profile = calibration.sensitivity_profile(readings, f_u)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "f_u_ghz": f_u,
        "per_step_percent": list(profile),
        "at_max_eps_percent": profile[-1],
    }
    lines = [f"{len(profile)} step(s), f_u = {f_u:g} GHz"]
    for (f1, e1), (f2, e2), s in zip(readings, readings[1:], profile):
        lines.append(f"  {e1:6.2f} -> {e2:6.2f}: {s:.4f} %")
    lines.append(f"sensitivity at max eps_r: {profile[-1]:.4f} %")
    return payload, "\n".join(lines)


def _mode_payload(state: modes.ModeState) -> dict:
    return {
        "state": state.state_string,
        "mode_index": state.mode_index,
        "bands_ghz": [[lo, hi] for lo, hi in state.bands_ghz],
        "services": sorted(s.value for s in state.services),
        "application": state.application,
    }


def _cmd_mode(args, config) -> tuple[dict, str]:
    state = modes.resolve_string(args.state)
    payload = {"schema_version": SCHEMA_VERSION, **_mode_payload(state)}
    lines = [
        f"mode {state.mode_index} (state {state.state_string}): "
        f"{state.application}",
        "bands: " + ", ".join(f"{lo:.2f}-{hi:.2f} GHz"
                              for lo, hi in state.bands_ghz),
        "services: " + ", ".join(sorted(s.value for s in state.services)),
    ]
    if args.classify:
        threshold = _resolve(args.threshold_db, config, "threshold_db", -10.0)
        parsed = sweep.load_sweep(args.classify)
        report = sweep.detect_dips(parsed, threshold)
        labeled = modes.classify_dips(state, report)
        payload["classified"] = [{
            **_dip_payload(entry.dip),
            "role": entry.role.value,
        } for entry in labeled]
        lines.append(f"classified dips ({args.classify}):")
        lines += [f"  {entry.dip.f0_ghz:.4f} GHz -> {entry.role.value}"
                  for entry in labeled]
    return payload, "\n".join(lines)


def _cmd_sense(args, config) -> tuple[dict, str]:
    state = modes.resolve_string(args.state)
    decision = modes.guard_sensing(state)
    if not decision.permitted:
        raise SensingDenied(decision.reason)
    threshold = _resolve(args.threshold_db, config, "threshold_db", -10.0)
    max_shift = _resolve(args.repeatability_mhz, config,
                         "repeatability_mhz", 10.0)
    model, table = _load_model_and_table(args, config)

    parsed = sweep.load_sweep(args.input)
    report = sweep.detect_dips(parsed, threshold)
    labeled = modes.classify_dips(state, report)
    sensing_dips = [e.dip for e in labeled
                    if e.role is modes.BandRole.SENSING]
    if not sensing_dips:
        raise NoDipFound("no dip inside the sensing window")
    dip = min(sensing_dips, key=lambda d: d.depth_db)
    est = calibration.estimate(dip.f0_ghz, model, table)

    payload = {
        "schema_version": SCHEMA_VERSION,
        "state": state.state_string,
        "f0_ghz": dip.f0_ghz,
        "f_u_ghz": model.f_u_ghz,
        **_estimate_payload(est),
    }
    lines = [
        f"sensing dip    {dip.f0_ghz:12.6f} GHz ({dip.depth_db:.2f} dB)",
        f"delta_f        {est.delta_f_ghz:12.6f} GHz",
        f"eps_r          {est.eps_r_real:12.6f}",
        f"vwc            {est.vwc_percent:12.6f} %",
        f"extrapolated   {str(est.extrapolated).lower():>12}",
    ]
    if args.repeat:
        second = sweep.load_sweep(args.repeat)
        rep = sweep.compare_repeatability(parsed, second, max_shift,
                                          threshold)
        payload["repeatability"] = {
            "max_shift_mhz": rep.max_shift_mhz,
            "count_mismatch": rep.count_mismatch,
            "flagged": rep.flagged,
        }
        lines.append(f"repeatability (limit {rep.max_shift_mhz:g} MHz): "
                     + ("FLAGGED" if rep.flagged else "ok"))
    return payload, "\n".join(lines)


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdr-sense",
        description="Spiral-resonator antenna analysis and FDR soil-moisture "
                    "inversion toolkit.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_json(p):
        p.add_argument("--json", action="store_true",
                       help="emit a single JSON object instead of text")

    p = sub.add_parser("line", help="microstrip segment parameters")
    p.add_argument("--width-mm", type=float, required=True)
    p.add_argument("--height-mm", type=float, required=True)
    p.add_argument("--eps-r", type=float, required=True)
    p.add_argument("--tan-delta", type=float, default=0.0)
    p.add_argument("--length-mm", type=float, default=0.0)
    p.add_argument("--fidelity", choices=["standard", "paper-literal"],
                   default="standard",
                   help="formula rendering; 'standard' is the textbook form")
    add_json(p)
    p.set_defaults(handler=_cmd_line)

    p = sub.add_parser("resonate", help="resonances of a netlist one-port")
    p.add_argument("--netlist", required=True)
    p.add_argument("--span", default="0.5:2.0", help="scan span lo:hi in GHz")
    p.add_argument("--points", type=int, default=None,
                   help="grid points (default 1001)")
    p.add_argument("--method", choices=["reactance", "dip"],
                   default="reactance")
    p.add_argument("--z-ref", type=float, default=None,
                   help="reference impedance, ohm (default 50)")
    p.add_argument("--threshold-db", type=float, default=None,
                   help="dip threshold (default -10, the bandwidth convention)")
    add_json(p)
    p.set_defaults(handler=_cmd_resonate)

    p = sub.add_parser("jcasa", help="full antenna model for a diode state")
    p.add_argument("--params", default=None,
                   help="parameter file (default: shipped equivalent-circuit "
                        "fit, not measured values)")
    p.add_argument("--state", required=True, choices=["00", "10", "11"],
                   help="diode state as (D2, D1)")
    p.add_argument("--span", default="0.5:2.0")
    p.add_argument("--points", type=int, default=None,
                   help="grid points (default 1501)")
    p.add_argument("--z-ref", type=float, default=None)
    p.add_argument("--threshold-db", type=float, default=None)
    add_json(p)
    p.set_defaults(handler=_cmd_jcasa)

    p = sub.add_parser("analyze", help="dips and bandwidths of sweep files")
    p.add_argument("--input", nargs="+", required=True,
                   help="Touchstone .s1p or freq_ghz,s11_db .csv files")
    p.add_argument("--threshold-db", type=float, default=None,
                   help="detection threshold (default -10)")
    p.add_argument("--repeatability-mhz", type=float, default=None,
                   help="dip-shift limit when comparing two sweeps "
                        "(default 10)")
    p.add_argument("--plot", default=None, help="write a dB-vs-GHz plot (svg)")
    add_json(p)
    p.set_defaults(handler=_cmd_analyze)

    p = sub.add_parser("calibrate", help="fit shift -> permittivity model")
    p.add_argument("--points", required=True,
                   help="CSV 'delta_f_ghz,eps_r' with header")
    p.add_argument("--fu-ghz", type=float, default=None,
                   help="unloaded resonance (default 0.96, sensing-band "
                        "center)")
    p.add_argument("--out", default=None, help="write the model JSON here")
    add_json(p)
    p.set_defaults(handler=_cmd_calibrate)

    p = sub.add_parser("estimate", help="invert one measured resonance")
    p.add_argument("--model", default=None,
                   help="model JSON (default: two-point endpoint fit, not a "
                        "user calibration)")
    p.add_argument("--fm-ghz", type=float, required=True)
    p.add_argument("--fu-ghz", type=float, default=None,
                   help="override the model's unloaded resonance")
    p.add_argument("--soil-table", default=None,
                   help="CSV 'vwc_percent,eps_r' (default: built-in table)")
    add_json(p)
    p.set_defaults(handler=_cmd_estimate)

    p = sub.add_parser("sensitivity", help="per-step shift sensitivity")
    p.add_argument("--readings", required=True,
                   help="CSV 'f_ghz,eps_r' with header")
    p.add_argument("--fu-ghz", type=float, default=None)
    add_json(p)
    p.set_defaults(handler=_cmd_sensitivity)

    p = sub.add_parser("mode", help="diode-state table and dip labeling")
    p.add_argument("--state", required=True, help="two binary digits (D2, D1)")
    p.add_argument("--classify", default=None,
                   help="sweep file to label against the mode's bands")
    p.add_argument("--threshold-db", type=float, default=None)
    add_json(p)
    p.set_defaults(handler=_cmd_mode)

    p = sub.add_parser("sense", help="parse -> detect -> classify -> estimate")
    p.add_argument("--input", required=True, help="sweep file")
    p.add_argument("--state", default="00",
                   help="diode state; only the sensing mode is permitted")
    p.add_argument("--repeat", default=None,
                   help="second sweep for a repeatability check")
    p.add_argument("--model", default=None)
    p.add_argument("--fu-ghz", type=float, default=None)
    p.add_argument("--soil-table", default=None)
    p.add_argument("--threshold-db", type=float, default=None)
    p.add_argument("--repeatability-mhz", type=float, default=None)
    add_json(p)
    p.set_defaults(handler=_cmd_sense)

    return parser


def dispatch(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = _load_config(os.environ.get("FDR_SENSE_CONFIG"))
        payload, text = args.handler(args, config)
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.json:
        print(json.dumps(payload))
    else:
        print(text)
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
