"""Command-line front end.

Every subcommand delegates to one library call; numeric flags accept SI
prefixes (``--r-we 60M --i-lsb 125p``). Exit codes: 0 success, 2 usage or
validation error, 3 analysis-domain error (no crossover, unstable regime,
unreachable target, too few periods).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .compare_harness import (REFERENCE_C_WE, REFERENCE_CONFIG, default_r_sweep, gm_r_sweep,
                              run_comparison, summary_dict)
from .describing_function import UnstableRegimeError, predict_limit_cycle
from .electrode_model import ElectrodeLoad, load_pole, zoh_load_tf
from .linear_analysis import (COUNTER_LSB_VOLT, LoopConfig, NoCrossoverError, freq_response,
                              open_loop_tf, stability_check)
from .op_conditions import (REFERENCE_CONFIG as TABLE_CONFIG, REFERENCE_ROWS, TargetUnreachableError,
                            format_table, table_report, table_to_csv)
from .root_locus import locus_sweep
from .time_sim import (InsufficientPeriodsError, SimConfig, extract_limit_cycle, simulate,
                       step_metrics)
from .units import parse_si

log = logging.getLogger("potentiostat_loop")

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN = 0, 2, 3
DOMAIN_ERRORS = (NoCrossoverError, UnstableRegimeError, TargetUnreachableError,
                 InsufficientPeriodsError)


def _si(text):
    try:
        return parse_si(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_load(p, r_default=None, c_default=None):
    p.add_argument("--r-we", type=_si, default=r_default, required=r_default is None,
                   help="working-electrode resistance, ohm (e.g. 60M)")
    p.add_argument("--c-we", type=_si, default=c_default, required=c_default is None,
                   help="working-electrode capacitance, F (e.g. 1n)")


def _add_loop(p, fs_required=True, i_lsb=None, fs=None, repeat_fs=False):
    g = p.add_mutually_exclusive_group(required=i_lsb is None)
    g.add_argument("--i-lsb", type=_si, default=i_lsb, help="DAC LSB current, A (e.g. 10n)")
    g.add_argument("--gm-lsb", type=_si, help="LSB transconductance, S (I_LSB / 1 V)")
    if repeat_fs:
        p.add_argument("--fs", type=_si, action="append", required=True,
                       help="sampling frequency, Hz; repeat for several curves")
    else:
        p.add_argument("--fs", type=_si, default=fs, required=fs_required and fs is None,
                       help="sampling frequency, Hz")
    p.add_argument("--bits", type=int, default=10, help="DAC bit width")
    p.add_argument("--v-ref", type=_si, default=0.6, help="reference voltage, V")
    p.add_argument("--v-dd", type=_si, default=1.2, help="supply voltage, V")


def _loop_cfg(a, fs=None) -> LoopConfig:
    i_lsb = a.i_lsb if a.gm_lsb is None else a.gm_lsb * COUNTER_LSB_VOLT
    return LoopConfig(i_lsb=i_lsb, fs=a.fs if fs is None else fs, dac_bits=a.bits,
                      v_ref=a.v_ref, v_dd=a.v_dd)


def _manifest(args) -> dict:
    params = {k: v for k, v in sorted(vars(args).items())
              if k not in ("func", "json", "out", "quiet", "command")}
    return {"subcommand": args.command, "parameters": params, "version": __version__,
            "timestamp": datetime.now(timezone.utc).isoformat()}


def _jsonable(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


class _Output:
    """Routes results to stdout / files and writes manifests next to files."""

    def __init__(self, args):
        self.args = args
        self.manifest = _manifest(args)

    def info(self, text):
        if not self.args.quiet:
            print(text)

    def write_file(self, path, text):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        Path(str(path) + ".manifest.json").write_text(json.dumps(_jsonable(self.manifest), indent=2) + "\n")
        log.info("wrote %s", path)

    def emit(self, result: dict, text: str, csv_text: str = None):
        if self.args.out and csv_text is not None:
            self.write_file(self.args.out, csv_text)
        if self.args.json:
            doc = {"manifest": self.manifest, "result": result}
            print(json.dumps(_jsonable(doc), indent=2, sort_keys=True))
        elif csv_text is not None and not self.args.out:
            print(csv_text, end="")
            if text:
                self.info(text)
        else:
            self.info(text)


def _bode_csv(points) -> str:
    lines = ["freq_Hz,mag_dB,phase_deg"]
    lines += [f"{p.freq_hz!r},{p.magnitude_db!r},{p.phase_deg!r}" for p in points]
    return "\n".join(lines) + "\n"


def cmd_bode(args, out: _Output):
    load = ElectrodeLoad(args.r_we, args.c_we)
    curves, texts = [], []
    for fs in args.fs:
        cfg = _loop_cfg(args, fs)
        f_max = args.f_max if args.f_max is not None else 0.499 * fs
        f_min = args.f_min if args.f_min is not None else fs * 1e-6
        n = max(2, int(math.ceil(args.points_per_decade * math.log10(f_max / f_min))) + 1)
        freqs = np.geomspace(f_min, f_max, n)
        tf = open_loop_tf(load, cfg) if args.tf == "open-loop" else zoh_load_tf(load, fs)
        pts = freq_response(tf, freqs)
        curves.append((fs, pts))
    multi = len(curves) > 1
    for fs, pts in curves:
        csv_text = _bode_csv(pts)
        if args.out:
            path = Path(args.out)
            if multi:
                path = path.with_name(f"{path.stem}_fs{fs:g}Hz{path.suffix or '.csv'}")
            out.write_file(path, csv_text)
        else:
            texts.append((f"# fs={fs:g} Hz\n" if multi else "") + csv_text)
        if args.plot_data:
            d = Path(args.plot_data)
            d.mkdir(parents=True, exist_ok=True)
            (d / f"mag_fs{fs:g}Hz.txt").write_text("".join(f"{p.freq_hz!r} {p.magnitude_db!r}\n" for p in pts))
            (d / f"phase_fs{fs:g}Hz.txt").write_text("".join(f"{p.freq_hz!r} {p.phase_deg!r}\n" for p in pts))
    if args.json:
        out.emit({"curves": [{"fs": fs, "points": [asdict(p) for p in pts]} for fs, pts in curves]}, "")
    elif texts and not args.quiet:
        print("".join(texts), end="")


def cmd_pm(args, out: _Output):
    load = ElectrodeLoad(args.r_we, args.c_we)
    rows, lines = [], []
    for fs in args.fs:
        rep = stability_check(load, _loop_cfg(args, fs))
        if rep.phase_margin_deg is None:
            raise NoCrossoverError(f"fs={fs:g} Hz: loop gain never crosses 0 dB below Nyquist")
        rows.append({"fs": fs, **asdict(rep)})
        lines.append(f"fs={fs:g} Hz  PM={rep.phase_margin_deg:.2f} deg  crossover={rep.crossover_hz:.6g} Hz  "
                     f"gm*R={rep.gm_r_product:.6g}  K={rep.k:.6g}  K1={rep.k1:.6g}  "
                     f"{'stable' if rep.stable else 'UNSTABLE'}")
    out.emit({"reports": rows}, "\n".join(lines))


def cmd_roots(args, out: _Output):
    if args.p is not None:
        p = args.p
    else:
        if args.r_we is None or args.c_we is None or args.fs is None:
            raise ValueError("give either --p or all of --r-we, --c-we, --fs")
        p = load_pole(ElectrodeLoad(args.r_we, args.c_we), args.fs[0])
    k_max = args.k_max if args.k_max is not None else 2 * (1 - p)
    grid = np.linspace(args.k_min, k_max, args.k_points)
    sweep = locus_sweep(p, grid)
    lines = ["k,r1_re,r1_im,r2_re,r2_im,max_abs"]
    for rp in sweep:
        lines.append(f"{rp.k_effective!r},{rp.r1.real!r},{rp.r1.imag!r},{rp.r2.real!r},{rp.r2.imag!r},"
                     f"{rp.max_modulus!r}")
    csv_text = "\n".join(lines) + "\n"
    result = {"p": p, "breakaway_gain": sweep.breakaway_gain, "stability_limit": sweep.stability_limit,
              "pairs": [asdict(rp) for rp in sweep]}
    out.emit(result, f"# p={p!r} breakaway K={sweep.breakaway_gain!r} stability limit K1={sweep.stability_limit!r}",
             csv_text)


def cmd_simulate(args, out: _Output):
    load = ElectrodeLoad(args.r_we, args.c_we)
    cfg = _loop_cfg(args)
    trace = simulate(SimConfig(load, cfg, args.duration, args.v0, args.code0, linear=args.linear))
    m = step_metrics(trace, cfg.v_ref)
    result = {"n_samples": len(trace), "step_metrics": asdict(m)}
    text = (f"samples={len(trace)} overshoot={m.overshoot_fraction:.4g} "
            f"settling_time={m.settling_time:.6g} s settled={m.settled}")
    try:
        lc = extract_limit_cycle(trace, args.discard)
        result["limit_cycle"] = {**asdict(lc), "freq_hz": lc.freq_hz}
        text += f"\nlimit cycle: amplitude={lc.amplitude:.6g} V omega={lc.omega:.6g} rad/s " \
                f"({lc.freq_hz:.6g} Hz) over {lc.n_periods} periods"
    except InsufficientPeriodsError as exc:
        result["limit_cycle"] = None
        text += f"\nlimit cycle: {exc}"
    if args.out:
        out.write_file(args.out, trace.to_csv_string())
        out.emit(result, text)
    elif args.json:
        out.emit(result, text)
    else:
        print(trace.to_csv_string(), end="")
        out.info(text)


def cmd_limitcycle(args, out: _Output):
    load = ElectrodeLoad(args.r_we, args.c_we)
    pred = predict_limit_cycle(load, _loop_cfg(args))
    result = {**asdict(pred), "freq_hz": pred.freq_hz}
    out.emit(result, f"amplitude={pred.amplitude:.6g} V  omega={pred.omega:.6g} rad/s  "
                     f"f={pred.freq_hz:.6g} Hz  boundary root={pred.root_at_boundary:.12g}")


def cmd_opcond(args, out: _Output):
    if args.row:
        rows = [tuple(parse_si(x) for x in r.split(",")) for r in args.row]
        if any(len(r) != 3 for r in rows):
            raise ValueError("--row takes I_meas,R_WE,C_WE")
        if args.pm_min is None or args.pm_max is None:
            raise ValueError("custom rows need --pm-min and --pm-max")
        bands = (args.pm_min, args.pm_max)
        cfg = LoopConfig(i_lsb=args.i_lsb, fs=1.0, dac_bits=args.bits, v_ref=args.v_ref, v_dd=args.v_dd)
    else:
        rows = [r for r, _ in REFERENCE_ROWS]
        bands = [b for _, b in REFERENCE_ROWS]
        if args.pm_min is not None or args.pm_max is not None:
            bands = (args.pm_min or 20.4, args.pm_max or 29.2)
        cfg = LoopConfig(fs=1.0, **TABLE_CONFIG)
    entries = table_report(rows, cfg, bands)
    result = {"entries": [{"i_meas": e.i_meas, "r_we": e.r_we, "c_we": e.c_we, "error": e.error,
                           "window": None if e.window is None else
                           {k: v for k, v in asdict(e.window).items() if k != "load"}}
                          for e in entries]}
    out.emit(result, format_table(entries), table_to_csv(entries) if args.out else None)
    if all(e.window is None for e in entries):
        raise TargetUnreachableError("no row has a reachable phase-margin window")


def cmd_compare(args, out: _Output):
    cfg = LoopConfig(i_lsb=args.i_lsb, fs=args.fs, dac_bits=args.bits, v_ref=args.v_ref, v_dd=args.v_dd)
    if args.r:
        r_values = args.r
    elif args.gm_r_range:
        lo, hi = args.gm_r_range
        r_values = gm_r_sweep(cfg, lo, hi, args.points)
    else:
        r_values = default_r_sweep(cfg, args.c_we, args.points)
    summary = run_comparison(r_values, args.c_we, cfg, args.duration, args.discard, workers=args.workers)
    lines = [f"{'R_WE [ohm]':>12} {'a_pred [V]':>11} {'a_meas [V]':>11} {'f_pred [Hz]':>11} "
             f"{'f_meas [Hz]':>11} {'err_a':>7} {'err_f':>7}  status"]
    for r in summary.rows:
        lines.append(f"{r.r_we:12.4g} {r.predicted_a:11.4g} {r.measured_a:11.4g} "
                     f"{r.predicted_freq_hz:11.4g} {r.measured_freq_hz:11.4g} "
                     f"{r.err_a:7.3f} {r.err_omega:7.3f}  {r.status}")
    lines.append(f"max err_a={summary.max_err_a:.4f}  max err_omega={summary.max_err_omega:.4f}  "
                 f"valid rows={summary.n_valid_rows}/{len(summary.rows)}")
    if args.summary:
        out.write_file(args.summary, json.dumps(_jsonable(summary_dict(summary)), indent=2, sort_keys=True) + "\n")
    out.emit(_jsonable(summary_dict(summary)), "\n".join(lines), summary.to_csv() if args.out else None)


def _global_flags(default) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--json", action="store_true", default=default,
                   help="emit a JSON document with run manifest")
    p.add_argument("--out", default=None if default is False else default,
                   help="write the CSV result to this path (plus <path>.manifest.json)")
    p.add_argument("--quiet", action="store_true", default=default, help="suppress human-readable output")
    return p


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="potentiostat-loop", parents=[_global_flags(False)],
                                 description="Stability, limit-cycle and time-domain analysis of a "
                                             "comparator/counter/DAC potentiostat loop.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    # accepted after the subcommand too, without clobbering values given before it
    common = _global_flags(argparse.SUPPRESS)

    p = sub.add_parser("bode", parents=[common], help="open-loop frequency response")
    _add_load(p)
    _add_loop(p, repeat_fs=True)
    p.add_argument("--f-min", type=_si, help="lowest frequency, Hz (default fs*1e-6)")
    p.add_argument("--f-max", type=_si, help="highest frequency, Hz (default 0.499*fs)")
    p.add_argument("--points-per-decade", type=int, default=64)
    p.add_argument("--tf", choices=("open-loop", "load"), default="open-loop")
    p.add_argument("--plot-data", help="directory for two-column magnitude/phase text files")
    p.set_defaults(func=cmd_bode)

    p = sub.add_parser("pm", parents=[common], help="phase margin and stability verdict")
    _add_load(p)
    _add_loop(p, repeat_fs=True)
    p.set_defaults(func=cmd_pm)

    p = sub.add_parser("roots", parents=[common], help="closed-loop root locus versus gain")
    p.add_argument("--p", type=float, help="load pole exp(-Ts/tau) in (0, 1)")
    p.add_argument("--r-we", type=_si)
    p.add_argument("--c-we", type=_si)
    p.add_argument("--fs", type=_si, action="append")
    p.add_argument("--k-min", type=float, default=0.0)
    p.add_argument("--k-max", type=float, help="default 2*(1-p)")
    p.add_argument("--k-points", type=int, default=101)
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("simulate", parents=[common], help="nonlinear time-domain simulation")
    _add_load(p)
    _add_loop(p)
    p.add_argument("--duration", type=_si, required=True, help="simulated time, s")
    p.add_argument("--v0", type=_si, default=0.0, help="initial V_RE, V")
    p.add_argument("--code0", type=int, default=0, help="initial counter code")
    p.add_argument("--linear", action="store_true", help="unity-gain comparator, real-valued counter")
    p.add_argument("--discard", type=float, default=0.5, help="fraction dropped before limit-cycle extraction")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("limitcycle", parents=[common], help="describing-function limit-cycle prediction")
    _add_load(p)
    _add_loop(p)
    p.set_defaults(func=cmd_limitcycle)

    p = sub.add_parser("opcond", parents=[common], help="fs windows for a phase-margin band")
    p.add_argument("--row", action="append", help="I_meas,R_WE,C_WE (SI prefixes allowed); repeatable. "
                                                  "Without rows the reference table is computed.")
    p.add_argument("--pm-min", type=float)
    p.add_argument("--pm-max", type=float)
    p.add_argument("--i-lsb", type=_si, default=TABLE_CONFIG["i_lsb"])
    p.add_argument("--bits", type=int, default=TABLE_CONFIG["dac_bits"])
    p.add_argument("--v-ref", type=_si, default=TABLE_CONFIG["v_ref"])
    p.add_argument("--v-dd", type=_si, default=TABLE_CONFIG["v_dd"])
    p.set_defaults(func=cmd_opcond)

    p = sub.add_parser("compare", parents=[common], help="prediction versus simulation over an R sweep")
    p.add_argument("--r", type=_si, action="append", help="electrode resistance; repeatable")
    p.add_argument("--gm-r-range", type=float, nargs=2, metavar=("LO", "HI"),
                   help="log-spaced sweep of gm*R_WE instead of explicit resistances")
    p.add_argument("--points", type=int, default=10)
    p.add_argument("--c-we", type=_si, default=REFERENCE_C_WE)
    p.add_argument("--i-lsb", type=_si, default=REFERENCE_CONFIG.i_lsb)
    p.add_argument("--fs", type=_si, default=REFERENCE_CONFIG.fs)
    p.add_argument("--bits", type=int, default=REFERENCE_CONFIG.dac_bits)
    p.add_argument("--v-ref", type=_si, default=REFERENCE_CONFIG.v_ref)
    p.add_argument("--v-dd", type=_si, default=REFERENCE_CONFIG.v_dd)
    p.add_argument("--duration", type=_si, help="minimum simulated time per point, s")
    p.add_argument("--discard", type=float, default=0.5)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--summary", help="write the JSON summary to this path")
    p.set_defaults(func=cmd_compare)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        args.func(args, _Output(args))
    except DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
