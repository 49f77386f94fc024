"""``chiptrans`` command-line front end.

Data goes to stdout (or ``--output``), diagnostics to stderr. Exit codes:
0 success, 1 bad input, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import linkbudget as lb
from . import transitions as tr
from .calibration import (
    CalibrationError,
    ErrorBoxes,
    TrlStandards,
    apply_cal,
    deembed_line,
    ripple_amplitude,
    ripple_spacing_diagnostic,
    trl_calibrate,
)
from .netcore import FrequencyGrid, NetworkError, OnePortNetwork, SingularPointError, TwoPortNetwork, gmax
from .touchstone import TouchstoneError, TouchstoneOptions, parse_touchstone, read_touchstone, write_touchstone
from .tline import PropagationConstant, UnwrapError
from .units import parse_quantity

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2
_NUMERIC_ERRORS = (SingularPointError, CalibrationError, UnwrapError, FloatingPointError, np.linalg.LinAlgError)
_REF_CAVEAT = (
    "reference impedance is that of the TRL line standard; "
    "the port impedance below is nominal unless line_z0 was given"
)


class InputError(ValueError):
    pass


def _fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    x = float(x)
    if np.isnan(x):
        return "nan"
    return f"{x:.12g}"


def _json_value(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if x is None:
        return None
    x = float(x)
    return None if not np.isfinite(x) else float(f"{x:.12g}")


def _table(columns, rows, fmt):
    """Render rows as CSV or as a JSON list of objects."""
    if fmt == "json":
        return json.dumps([{c: _json_value(v) for c, v in zip(columns, r)} for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _record(obj, fmt):
    if fmt == "json":
        return json.dumps({k: _json_value(v) for k, v in obj.items()}, indent=2) + "\n"
    return _table(list(obj), [list(obj.values())], "csv")


_STDERR = object()


def _emit(text, path):
    if path is _STDERR:
        sys.stderr.write(text)
    elif path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _info(msg):
    print(msg, file=sys.stderr)


def _read_two_port(path):
    """Read a Touchstone file; ``-`` reads from stdin (port count inferred)."""
    try:
        if path == "-":
            net, opts = parse_touchstone(sys.stdin.read())
        elif not os.path.isfile(path):
            raise InputError(f"{path}: no such file")
        else:
            net, opts = read_touchstone(path)
    except TouchstoneError as exc:
        raise InputError(f"{path}: {exc}") from None
    return net, opts


def _need_two_port(net, path):
    if not isinstance(net, TwoPortNetwork):
        raise InputError(f"{path}: a 2-port file is required")
    return net


def _quantity(text, unit, name):
    try:
        return parse_quantity(text, unit)
    except ValueError as exc:
        raise InputError(f"--{name}: {exc}") from None


def _sweep(text, name, cast=float):
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(f"--{name} must be start:stop:{'npoints' if cast is int else 'step'}")
    try:
        return float(parts[0]), float(parts[1]), cast(parts[2])
    except ValueError:
        raise InputError(f"--{name}: cannot parse {text!r}") from None


def _load_json(path, what):
    if not os.path.isfile(path):
        raise InputError(f"{what} {path}: no such file")
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} {path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None


# ---------------------------------------------------------------------------
# commands


def cmd_convert(args):
    net, opts = _read_two_port(args.input)
    new = TouchstoneOptions(args.unit or opts.freq_unit, "S", args.format.upper(), opts.resistance)
    _emit(write_touchstone(net, new), args.output)
    return EXIT_OK


def gain_table(net: TwoPortNetwork):
    g = gmax(net)
    with np.errstate(divide="ignore"):
        s11 = 20 * np.log10(np.abs(net.s11))
        s21 = 20 * np.log10(np.abs(net.s21))
    rows = list(zip(net.f, g.gmax_db, g.stable, g.unilateral, s11, s21))
    return ["freq_hz", "gmax_db", "stable", "unilateral", "s11_db", "s21_db"], rows, g


def cmd_gmax(args):
    net, _ = _read_two_port(args.input)
    net = _need_two_port(net, args.input)
    cols, rows, g = gain_table(net)
    n_uni = int(np.count_nonzero(g.unilateral))
    if n_uni:
        _info(f"gmax: {n_uni} unilateral point(s) (S12*S21 ~ 0); gmax_db is nan there")
    n_unstable = int(np.count_nonzero(~g.stable & ~g.unilateral))
    if n_unstable:
        _info(f"gmax: {n_unstable} potentially unstable point(s); gmax_db is MSG there")
    _emit(_table(cols, rows, args.format), args.output)
    return EXIT_OK


def cmd_notch(args):
    if args.mode == "gsg-delay":
        if args.tau2 is None:
            raise InputError("gsg-delay needs --tau2")
        tau2 = _quantity(args.tau2, "s", "tau2")
        out = {"mode": args.mode, "tau2_s": tau2, "f_notch_hz": tr.gsg_notch_freq(tau2, args.harmonic)}
    elif args.mode == "gsg-pitch":
        if None in (args.H, args.pitch, args.eps):
            raise InputError("gsg-pitch needs --H, --pitch and --eps")
        g = tr.GsgGeometry(_quantity(args.H, "m", "H"), _quantity(args.pitch, "m", "pitch"), float(args.eps))
        out = {"mode": args.mode, "H_m": g.H, "pitch_m": g.pitch, "eps_r": g.eps_r,
               "f_notch_hz": tr.pitch_notch_estimate(g)}
    else:
        if args.tau1 is None or args.tau2 is None:
            raise InputError("loop needs --tau1 and --tau2")
        t1, t2 = _quantity(args.tau1, "s", "tau1"), _quantity(args.tau2, "s", "tau2")
        out = {"mode": args.mode, "tau1_s": t1, "tau2_s": t2, "f_rad_hz": tr.loop_radiation_freq(t1, t2)}
    _emit(_record(out, args.format), args.output)
    return EXIT_OK


def cmd_siw(args):
    g = tr.SiwGeometry(
        _quantity(args.w, "m", "w"), _quantity(args.d, "m", "d"), _quantity(args.p, "m", "p"), float(args.eps)
    )
    w_eff = tr.siw_effective_width(g)
    out = {"w_eff_m": w_eff, "f_cutoff_hz": tr.siw_te10_cutoff(w_eff, g.eps_r)}
    _emit(_record(out, args.format), args.output)
    return EXIT_OK


def _manifest_path(base, value, key):
    if not isinstance(value, str):
        raise InputError(f"manifest: '{key}' must be a file path")
    path = value if os.path.isabs(value) else os.path.join(base, value)
    if not os.path.isfile(path):
        raise InputError(f"manifest: '{key}' file {path} not found")
    return path


def load_trl_manifest(path):
    """Read a TRL manifest and its standards; relative paths are from the manifest's directory."""
    data = _load_json(path, "manifest")
    if not isinstance(data, dict):
        raise InputError("manifest must be a JSON object")
    missing = [k for k in ("thru", "line", "reflect", "delta_length") if k not in data]
    if missing:
        raise InputError("manifest: missing keys: " + ", ".join(missing))
    base = os.path.dirname(os.path.abspath(path))
    thru, _ = _read_two_port(_manifest_path(base, data["thru"], "thru"))
    line, _ = _read_two_port(_manifest_path(base, data["line"], "line"))
    _need_two_port(thru, "thru")
    _need_two_port(line, "line")
    refl = data["reflect"]
    if isinstance(refl, list):
        if len(refl) != 2:
            raise InputError("manifest: 'reflect' list must name two 1-port files")
        nets = [_read_two_port(_manifest_path(base, r, "reflect"))[0] for r in refl]
        if not all(isinstance(n, OnePortNetwork) for n in nets):
            raise InputError("manifest: reflect list entries must be 1-port files")
        reflect = tuple(nets)
    else:
        reflect, _ = _read_two_port(_manifest_path(base, refl, "reflect"))
        if isinstance(reflect, OnePortNetwork):
            reflect = (reflect, reflect)
    dl = data["delta_length"]
    dl = _quantity(dl, "m", "delta_length") if isinstance(dl, str) else float(dl)
    kind = data.get("reflect_kind", "short")
    line_z0 = data.get("line_z0")
    try:
        std = TrlStandards.from_networks(thru, line, reflect, dl, kind)
    except CalibrationError as exc:
        raise InputError(f"manifest: {exc}") from None
    return std, (None if line_z0 is None else float(line_z0))


def cmd_trl(args):
    std, line_z0 = load_trl_manifest(args.manifest)
    raw, _ = _read_two_port(args.raw)
    raw = _need_two_port(raw, args.raw)
    e = trl_calibrate(std, line_z0=line_z0)
    n_flag = int(np.count_nonzero(e.flags))
    if n_flag:
        _info(f"trl: {n_flag} of {len(e.flags)} point(s) flagged ill-conditioned")
    cal = apply_cal(e, raw, interpolate_flagged=args.interpolate_flagged)
    z1, z2 = cal.z_ref
    opts = TouchstoneOptions("GHz", "S", args.format.upper(), z1)
    _emit(write_touchstone(cal, opts, comments=[_REF_CAVEAT, cal.ref_label or ""]), args.output)
    if args.gamma_out:
        _emit(e.gamma_est.to_csv(), args.gamma_out)
    if args.flags_out:
        rows = list(zip(e.grid.points, e.flags, e.line_phase_deg))
        _emit(_table(["freq_hz", "flagged", "line_phase_deg"], rows, "csv"), args.flags_out)
    return EXIT_OK


def cmd_deembed(args):
    net, _ = _read_two_port(args.input)
    net = _need_two_port(net, args.input)
    if not os.path.isfile(args.gamma):
        raise InputError(f"{args.gamma}: no such file")
    with open(args.gamma) as fh:
        gamma = PropagationConstant.from_csv(fh.read())
    if not gamma.grid.same_as(net.grid):
        raise InputError("gamma CSV and network use different frequency grids")
    l1 = _quantity(args.l1, "m", "l1")
    l2 = _quantity(args.l2 if args.l2 is not None else args.l1, "m", "l2")
    out = deembed_line(net, gamma, l1, l2)
    opts = TouchstoneOptions("GHz", "S", args.format.upper(), float(out.z_ref[0]))
    _emit(write_touchstone(out, opts), args.output)
    report = {"l1_m": l1, "l2_m": l2}
    eps = None if args.eps is None else float(args.eps)
    try:
        rep = ripple_spacing_diagnostic(net, eps_r=eps)
        report.update(ripple_spacing_hz=rep.spacing_hz, ripple_peaks=rep.n_peaks, implied_length_m=rep.implied_length_m)
    except CalibrationError as exc:
        _info(f"deembed: {exc}")
        report.update(ripple_spacing_hz=None, ripple_peaks=0, implied_length_m=None)
    before = ripple_amplitude(net)
    after = ripple_amplitude(out)
    report.update(ripple_amplitude_before=before, ripple_amplitude_after=after,
                  residual_ratio=after / before if before > 0 else None)
    text = _record(report, "json" if args.report_format == "json" else "csv")
    _emit(text, _STDERR if args.report is None else args.report)
    return EXIT_OK


def cmd_linkbudget(args):
    data = _load_json(args.config, "config")
    try:
        cfg = lb.LinkBudgetConfig.from_dict(data)
    except (lb.ConfigError, TypeError, ValueError) as exc:
        raise InputError(f"config {args.config}: {exc}") from None
    start, stop, step = _sweep(args.il_sweep, "il-sweep")
    pts = lb.capacity_sweep(cfg, start, stop, step)
    sens = lb.sensitivity(cfg)
    _info(f"linkbudget: sensitivity {sens / 1e9:.4g} Gbit/s/dB")
    cols = ["il_db", "snr_db", "c_exact_bps", "c_approx_bps"]
    rows = [(p.il_db, p.snr_db, p.c_exact, p.c_approx) for p in pts]
    if args.format == "json":
        body = json.loads(_table(cols, rows, "json"))
        text = json.dumps({"sensitivity_bps_per_db": _json_value(sens), "points": body}, indent=2) + "\n"
    else:
        text = _table(cols, rows, "csv")
    _emit(text, args.output)
    return EXIT_OK


def cmd_model(args):
    start, stop, n = _sweep(args.grid, "grid", int)
    if n < 1 or not 0 < start <= stop:
        raise InputError("--grid needs 0 < start <= stop (GHz) and npoints >= 1")
    grid = FrequencyGrid.linspace(start * 1e9, stop * 1e9, n)
    src = args.stripline or args.gsg
    kind = "StriplineTransitionParams" if args.stripline else "GsgParams"
    data = _load_json(src, "parameter file")
    try:
        p = tr.load_params(data, kind=kind)
    except (ValueError, TypeError) as exc:
        raise InputError(f"parameter file {src}: {exc}") from None
    z_ref = float(args.z_ref)
    if args.stripline:
        net = tr.stripline_transition_model(p, grid, z_ref)
    else:
        net = tr.gsg_model(p, grid, z_ref)
    comments = []
    if args.match_f0 is not None:
        f0 = float(args.match_f0) * 1e9
        m, best = tr.design_series_match(net, f0)
        net = tr.apply_series_match(net, m)
        _info(f"model: series match z0={m.z0:g} ohm theta={m.theta_deg:g} deg at {f0 / 1e9:g} GHz, |S11|={best:.3g}")
        comments.append(f"series match z0={m.z0:g} ohm theta={m.theta_deg:g} deg f0={f0:.12g} Hz")
    opts = TouchstoneOptions("GHz", "S", args.format.upper(), z_ref)
    _emit(write_touchstone(net, opts, comments), args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="chiptrans", description="Chip-to-package transition analysis.")
    sub = p.add_subparsers(dest="command", required=True)

    def table_opts(sp):
        sp.add_argument("-o", "--output", help="output file (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")

    def s2p_opts(sp, default="ri"):
        sp.add_argument("-o", "--output", help="output .s2p (default stdout)")
        sp.add_argument("--format", choices=("ri", "ma", "db"), default=default, help="Touchstone data format")

    sp = sub.add_parser("convert", help="rewrite a Touchstone file in another format")
    sp.add_argument("input", help="Touchstone file, or - for stdin")
    s2p_opts(sp)
    sp.add_argument("--unit", choices=("Hz", "kHz", "MHz", "GHz"))
    sp.set_defaults(func=cmd_convert)

    sp = sub.add_parser("gmax", help="maximum available gain table")
    sp.add_argument("input", help="Touchstone file, or - for stdin")
    table_opts(sp)
    sp.set_defaults(func=cmd_gmax)

    sp = sub.add_parser("notch", help="notch / resonance predictors")
    sp.add_argument("--mode", choices=("gsg-delay", "gsg-pitch", "loop"), required=True)
    sp.add_argument("--tau1")
    sp.add_argument("--tau2")
    sp.add_argument("--harmonic", type=int, default=1)
    sp.add_argument("--H")
    sp.add_argument("--pitch")
    sp.add_argument("--eps")
    table_opts(sp)
    sp.set_defaults(func=cmd_notch)

    sp = sub.add_parser("siw", help="via-cage effective width and TE10 cutoff")
    sp.add_argument("--w", required=True)
    sp.add_argument("--d", required=True)
    sp.add_argument("--p", required=True)
    sp.add_argument("--eps", default="1.0")
    table_opts(sp)
    sp.set_defaults(func=cmd_siw)

    sp = sub.add_parser("trl", help="TRL calibration of a raw 2-port")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("raw", help="raw 2-port Touchstone file, or - for stdin")
    s2p_opts(sp)
    sp.add_argument("--gamma-out", help="write the extracted propagation constant CSV here")
    sp.add_argument("--flags-out", help="write per-frequency conditioning flags CSV here")
    sp.add_argument("--interpolate-flagged", action="store_true")
    sp.set_defaults(func=cmd_trl)

    sp = sub.add_parser("deembed", help="strip feed lines using a propagation-constant CSV")
    sp.add_argument("input", help="Touchstone file, or - for stdin")
    sp.add_argument("--gamma", required=True)
    sp.add_argument("--l1", required=True)
    sp.add_argument("--l2")
    sp.add_argument("--eps", help="relative permittivity for the implied remnant length")
    s2p_opts(sp)
    sp.add_argument("--report", help="ripple report file (default stderr)")
    sp.add_argument("--report-format", choices=("csv", "json"), default="json")
    sp.set_defaults(func=cmd_deembed)

    sp = sub.add_parser("linkbudget", help="capacity versus transition loss")
    sp.add_argument("--config", required=True)
    sp.add_argument("--il-sweep", default="0:6:0.5", help="start:stop:step in dB")
    table_opts(sp)
    sp.set_defaults(func=cmd_linkbudget)

    sp = sub.add_parser("model", help="write the circuit model of a transition as .s2p")
    grp = sp.add_mutually_exclusive_group(required=True)
    grp.add_argument("--stripline")
    grp.add_argument("--gsg")
    sp.add_argument("--grid", required=True, help="start:stop:npoints in GHz")
    sp.add_argument("--z-ref", default="50")
    sp.add_argument("--match-f0", help="design and insert a series match at this frequency (GHz)")
    s2p_opts(sp)
    sp.set_defaults(func=cmd_model)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _NUMERIC_ERRORS as exc:
        _info(f"chiptrans {args.command}: numerical failure: {exc}")
        return EXIT_NUMERIC
    except (InputError, TouchstoneError, NetworkError, ValueError, OSError) as exc:
        _info(f"chiptrans {args.command}: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
