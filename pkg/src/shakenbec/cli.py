"""Command-line scan harness.

Subcommands: rates, k0c, bdg, twa, endphase, fit.  Every command reads
a layered configuration (--preset under --config), writes plot-ready
CSV files plus a manifest.json into --out, and returns exit code 0 on
success, 2 for configuration problems, 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import math
import sys
from pathlib import Path

import numpy as np

from . import analytics, bdg, fitting, twa
from .config import (
    bdg_from_config,
    drive_from_config,
    lattice_from_config,
    load_config,
    scan_from_config,
    twa_from_config,
    _get,
    _bool,
)
from .errors import (
    ConfigError,
    DomainError,
    InvertedBandError,
    NoCriticalAmplitudeError,
    NumericalError,
)
from .model import DriveSpec, Envelope, Trajectory
from .output import config_as_dict, utc_stamp, write_csv, write_manifest
from .specialmath import j0_first_zero

TWO_PI = 2.0 * math.pi


def _setup(args):
    args._started = utc_stamp()
    cp = load_config(args.config, args.preset)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    return cp, outdir


def _finish(args, cp, outdir, command, outputs) -> int:
    write_manifest(
        outdir,
        command,
        config_as_dict(cp),
        getattr(args, "seed", None),
        getattr(args, "workers", 1),
        outputs,
        started=getattr(args, "_started", None),
    )
    return 0


def _drive_variant(drive: DriveSpec, variable: str, value: float) -> DriveSpec:
    if variable == "omega":
        return dataclasses.replace(drive, omega=value)
    if variable == "k0":
        return dataclasses.replace(drive, k0=value)
    raise ConfigError(f"cannot scan drive variable '{variable}'")


def cmd_rates(args) -> int:
    cp, outdir = _setup(args)
    p = lattice_from_config(cp)
    drive = drive_from_config(cp)
    scan = scan_from_config(cp, allowed=("omega", "k0"))
    if scan is None:
        scan_var, values = "omega", np.array([drive.omega])
    else:
        scan_var, values = scan.variable, scan.values

    header = [
        "trajectory", "k0", "omega_rad_s", "omega_hz", "regime",
        "qx_mum", "qy_mum", "n_pairs", "gamma_rad_s", "big_gamma_rad_s",
        "omega_c_rad_s", "omega_c_hz", "bandwidth_rad_s",
        "cusp_at_bandwidth", "k0_critical", "inverted_band",
    ]
    rows = []
    for value in values:
        d = _drive_variant(drive, scan_var, float(value))
        try:
            k0c = analytics.critical_drive_amplitude(d.omega, p)
        except NoCriticalAmplitudeError:
            k0c = None
        for traj in Trajectory:
            try:
                res = analytics.most_unstable_mode(traj, d.k0, d.omega, p)
                cusp = analytics.cusp_frequency(traj, d.k0, p)
                q = res.q_mum[0]
                rows.append([
                    traj.value, d.k0, d.omega, d.omega / TWO_PI,
                    res.regime.value, q.qx, q.qy, len(res.q_mum),
                    res.gamma, res.big_gamma, cusp.omega_c,
                    cusp.omega_c / TWO_PI, cusp.bandwidth,
                    cusp.equals_bandwidth, k0c, 0,
                ])
            except InvertedBandError:
                rows.append([
                    traj.value, d.k0, d.omega, d.omega / TWO_PI,
                    None, None, None, None, None, None, None, None, None,
                    None, k0c, 1,
                ])
    write_csv(outdir / "rates.csv", header, rows)
    return _finish(args, cp, outdir, "rates", ["rates.csv"])


def cmd_k0c(args) -> int:
    cp, outdir = _setup(args)
    p = lattice_from_config(cp)
    scan = scan_from_config(cp, allowed=("omega",))
    if scan is None:
        drive = drive_from_config(cp)
        values = np.array([drive.omega])
    else:
        values = scan.values
    asymptote = j0_first_zero()
    header = [
        "omega_rad_s", "omega_hz", "g_over_omega",
        "k0_critical", "k0_critical_asymptote", "no_solution",
    ]
    rows = []
    for omega in values:
        omega = float(omega)
        try:
            k0c = analytics.critical_drive_amplitude(omega, p)
            rows.append([omega, omega / TWO_PI, p.g / omega, k0c, asymptote, 0])
        except NoCriticalAmplitudeError:
            rows.append([omega, omega / TWO_PI, p.g / omega, None, asymptote, 1])
    write_csv(outdir / "k0c.csv", header, rows)
    return _finish(args, cp, outdir, "k0c", ["k0c.csv"])


def cmd_bdg(args) -> int:
    cp, outdir = _setup(args)
    p = lattice_from_config(cp)
    drive = drive_from_config(cp)
    cfg = bdg_from_config(cp)
    scan = scan_from_config(cp, allowed=("omega", "k0"))
    if scan is None:
        points = [("omega", drive.omega)]
    else:
        points = [(scan.variable, float(v)) for v in scan.values]

    header = [
        "trajectory", "k0", "omega_rad_s", "omega_hz",
        "extracted_rate_rad_s", "analytic_rate_rad_s",
        "qx_max", "qy_max", "qz_max", "norm_drift", "status",
    ]
    rows = []
    single = scan is None
    for variable, value in points:
        d = _drive_variant(drive, variable, value)
        try:
            analytic = 2.0 * analytics.most_unstable_mode(
                d.trajectory, d.k0, d.omega, p
            ).gamma
        except InvertedBandError:
            analytic = None
        try:
            result = bdg.grid_instability_scan(d, p, cfg, workers=args.workers)
            q = result.q_max
            rows.append([
                d.trajectory.value, d.k0, d.omega, d.omega / TWO_PI,
                result.rate, analytic, q.qx, q.qy, q.qz,
                result.norm_drift, "ok",
            ])
        except NumericalError as exc:
            if single:
                raise
            print(f"shakenbec bdg: point {variable}={value} failed: {exc}",
                  file=sys.stderr)
            rows.append([
                d.trajectory.value, d.k0, d.omega, d.omega / TWO_PI,
                None, analytic, None, None, None, None,
                type(exc).__name__,
            ])
    write_csv(outdir / "bdg.csv", header, rows)
    return _finish(args, cp, outdir, "bdg", ["bdg.csv"])


def _early_slice(trace: fitting.DecayTrace, n_keep: int) -> fitting.DecayTrace:
    return fitting.DecayTrace(
        trace.times[: n_keep + 1], trace.values[: n_keep + 1], trace.kind
    )


def _rate_with_error(traces, window, period, seed, resamples):
    fitter = lambda tr: fitting.windowed_log_slope(tr, window, period)
    mean = fitting.DecayTrace(
        traces[0].times,
        np.stack([tr.values for tr in traces]).mean(axis=0),
        traces[0].kind,
    )
    fit = fitter(mean)
    boot = fitting.bootstrap_rate(traces, fitter, n_resamples=resamples, seed=seed)
    return fit, boot


def cmd_twa(args) -> int:
    cp, outdir = _setup(args)
    p = lattice_from_config(cp)
    drive = drive_from_config(cp)
    grid, run_cfg, ens_cfg, window = twa_from_config(cp, args.seed)
    scan = scan_from_config(cp, allowed=("g",))
    period = drive.period

    if scan is not None:
        header = [
            "g_rad_s", "g_over_j", "rate_rad_s", "rate_err_rad_s",
            "n_realizations", "status",
        ]
        rows = []
        for g in scan.values:
            p_g = dataclasses.replace(p, g=float(g))
            try:
                result = twa.ensemble_run(
                    grid, drive, p_g, run_cfg, ens_cfg, workers=args.workers
                )
                traces = [
                    fitting.DecayTrace(tr.times, np.maximum(tr.n_ex, 0.0),
                                       fitting.TraceKind.MODE_OCCUPATION)
                    for tr in result.traces
                ]
                fit, boot = _rate_with_error(
                    traces, window, period, ens_cfg.master_seed,
                    ens_cfg.bootstrap_resamples,
                )
                rows.append([float(g), float(g) / p.j, fit.rate, boot.std,
                             ens_cfg.n_realizations, "ok"])
            except NumericalError as exc:
                print(f"shakenbec twa: point g={g} failed: {exc}", file=sys.stderr)
                rows.append([float(g), float(g) / p.j, None, None,
                             ens_cfg.n_realizations, type(exc).__name__])
        write_csv(outdir / "twa_g_scan.csv", header, rows)
        return _finish(args, cp, outdir, "twa", ["twa_g_scan.csv"])

    result = twa.ensemble_run(grid, drive, p, run_cfg, ens_cfg, workers=args.workers)
    trace_rows = [
        [t, cycle, raw, sub, lo, hi, cf]
        for cycle, (t, raw, sub, lo, hi, cf) in enumerate(
            zip(result.times, result.n_ex_raw, result.n_ex,
                result.band_lo, result.band_hi, result.condensed_fraction)
        )
    ]
    write_csv(
        outdir / "twa_trace.csv",
        ["time_s", "cycle", "n_ex_raw", "n_ex", "band_lo", "band_hi",
         "condensed_fraction"],
        trace_rows,
    )

    traces = [
        fitting.DecayTrace(tr.times, np.maximum(tr.n_ex, 0.0),
                           fitting.TraceKind.MODE_OCCUPATION)
        for tr in result.traces
    ]
    n_samples = traces[0].times.size
    rate_rows = []
    for label, subset in (
        ("early", [_early_slice(tr, min(window, n_samples - 1)) for tr in traces]),
        ("late", traces),
    ):
        fit, boot = _rate_with_error(
            subset, min(window, n_samples - 1), period,
            ens_cfg.master_seed, ens_cfg.bootstrap_resamples,
        )
        rate_rows.append([
            label, fit.method.value, fit.rate, boot.std,
            fit.window[0], fit.window[1], fit.n_points, fit.warning,
        ])
    write_csv(
        outdir / "twa_rates.csv",
        ["window", "method", "rate_rad_s", "rate_err_rad_s",
         "window_start_s", "window_end_s", "n_points", "warning"],
        rate_rows,
    )
    return _finish(args, cp, outdir, "twa", ["twa_trace.csv", "twa_rates.csv"])


def cmd_endphase(args) -> int:
    cp, outdir = _setup(args)
    p = lattice_from_config(cp)
    drive = drive_from_config(cp)
    grid, run_cfg, ens_cfg, _ = twa_from_config(cp, args.seed)
    env = drive.envelope
    if env is None:
        raise ConfigError("endphase needs [drive] envelope keys (ramp_up, hold)")

    default_phases = "0, 0.7853981633974483, 1.5707963267948966"
    raw = _get(cp, "endphase", "phases", str, default_phases)
    try:
        phases = [float(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad [endphase] phases list: {raw!r}") from exc
    include_ramped = _get(cp, "endphase", "include_ramped", _bool, True)
    ramp_down = _get(cp, "endphase", "ramp_down", int, 1)
    post_hold = _get(cp, "endphase", "post_hold_periods", int, 8)

    def run_with(envelope: Envelope, extra_hold: int):
        d = dataclasses.replace(drive, envelope=envelope)
        cfg = dataclasses.replace(
            run_cfg, n_cycles=None, post_hold_periods=extra_hold
        )
        result = twa.ensemble_run(grid, d, p, cfg, ens_cfg, workers=args.workers)
        i_stop = envelope.total_periods
        return float(result.n_ex[i_stop]), float(result.n_ex[-1])

    rows = []
    for phase in phases:
        envelope = Envelope(
            ramp_up=env.ramp_up, hold=env.hold, ramp_down=0,
            abrupt_stop=True, end_phase=phase,
        )
        n_stop, n_final = run_with(envelope, post_hold)
        rows.append(["abrupt", phase, n_stop, n_final])
    if include_ramped:
        extra = post_hold + 1 - ramp_down
        if extra < 0:
            raise ConfigError(
                "[endphase] ramp_down exceeds post_hold_periods + 1; "
                "the ramped control would outlast the comparison window"
            )
        envelope = Envelope(
            ramp_up=env.ramp_up, hold=env.hold, ramp_down=ramp_down,
            abrupt_stop=False,
        )
        n_stop, n_final = run_with(envelope, extra)
        rows.append(["ramped", None, n_stop, n_final])
    write_csv(
        outdir / "endphase.csv",
        ["protocol", "end_phase_rad", "n_ex_at_stop", "n_ex_final"],
        rows,
    )
    return _finish(args, cp, outdir, "endphase", ["endphase.csv"])


def _read_trace_csv(path) -> tuple[np.ndarray, np.ndarray]:
    times, values = [], []
    try:
        fh = open(path, encoding="utf-8", newline="")
    except FileNotFoundError as exc:
        raise ConfigError(f"trace file not found: {path}") from exc
    with fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if not row or not any(tok.strip() for tok in row):
                continue
            if len(row) < 2:
                raise ConfigError(
                    f"{path}: line {line_no}: need at least two columns"
                )
            try:
                t, y = float(row[0]), float(row[1])
            except ValueError:
                if line_no == 1:
                    continue  # header row
                raise ConfigError(
                    f"{path}: line {line_no}: non-numeric entry in {row[:2]}"
                ) from None
            times.append(t)
            values.append(y)
    if len(times) < 2:
        raise ConfigError(f"{path}: fewer than two data rows")
    return np.array(times), np.array(values)


def cmd_fit(args) -> int:
    cp, outdir = _setup(args)
    times, values = _read_trace_csv(args.trace)
    kind_name = _get(cp, "fit", "kind", str, "condensed_fraction").strip().lower()
    kinds = {k.value: k for k in fitting.TraceKind}
    if kind_name not in kinds:
        raise ConfigError(
            f"[fit] kind must be one of {', '.join(kinds)}, got '{kind_name}'"
        )
    threshold = _get(cp, "fit", "r2_threshold", float, 0.9)
    try:
        trace = fitting.DecayTrace(times, values, kinds[kind_name])
    except DomainError as exc:
        raise ConfigError(f"{args.trace}: {exc}") from exc
    result = fitting.fit_decay_rate(trace, r2_threshold=threshold)
    write_csv(
        outdir / "fit.csv",
        ["method", "amplitude", "rate_rad_s", "stderr_rad_s", "r_squared",
         "window_start_s", "window_end_s", "n_points", "warning"],
        [[result.method.value, result.amplitude, result.rate, result.stderr,
          result.r_squared, result.window[0], result.window[1],
          result.n_points, result.warning]],
    )
    return _finish(args, cp, outdir, "fit", ["fit.csv"])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="shakenbec",
        description="Parametric instabilities of shaken lattice condensates: "
        "closed-form rates, Bogoliubov mode dynamics, truncated-Wigner runs.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, trace_arg=False):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", metavar="PATH", help="config file (ini-style)")
        sp.add_argument("--preset", metavar="NAME", help="built-in parameter preset")
        sp.add_argument("--out", metavar="DIR", default=".", help="output directory")
        sp.add_argument("--seed", type=int, metavar="N",
                        help="override the ensemble master seed")
        sp.add_argument("--workers", type=int, default=1, metavar="N",
                        help="parallel workers for ensembles and grid scans")
        if trace_arg:
            sp.add_argument("trace", help="input CSV with time,value columns")
        sp.set_defaults(func=func)
        return sp

    add("rates", cmd_rates, "closed-form instability rates for all trajectories")
    add("k0c", cmd_k0c, "runaway-heating threshold amplitude vs frequency")
    add("bdg", cmd_bdg, "Bogoliubov grid scans vs the analytic rate")
    add("twa", cmd_twa, "truncated-Wigner ensemble runs and g scans")
    add("endphase", cmd_endphase, "post-stop excitation vs drive end phase")
    add("fit", cmd_fit, "fit a decay/growth rate to a trace CSV", trace_arg=True)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"shakenbec: config error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"shakenbec: invalid parameter: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"shakenbec: numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
