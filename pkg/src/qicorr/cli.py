"""Command-line front end.

    qicorr simulate   --config run.toml --out run.qits
    qicorr g2         run.qits [--bins 1] [--lag-range -200:200] [--out g2.csv]
    qicorr sweep      --config run.toml --kind noise --values 0,1e5,2e5 --out sweep.csv
    qicorr fit        sweep.csv --model sinusoid
    qicorr saturation --rates 1e5,1e6,1e7 --out sat.csv

Exit codes: 0 ok, 2 configuration error, 3 data error, 4 fit failure.
"""

import argparse
import math
import sys

import numpy as np

from . import analysis
from .analysis import FitError
from .config import ConfigError, load_config
from .correlator import CorrelogramConfig, NoPeakError, UndefinedG2Error, correlogram, g2, peak_bin
from .detector import DetectorModel, saturation_curve
from .tsfile import TimestampFileError, read_csv, read_timestamps, write_csv, write_timestamps

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_FIT = 0, 2, 3, 4

SWEEP_COLUMNS = ["x", "counts", "g2", "snr", "sigma"]
VISIBILITY_COLUMNS = ["x", "c_max", "c_min", "c_ac", "visibility", "sigma_v", "observed_rate", "d"]

SWEEP_HELP = """\
CSV columns for --kind noise and qwp:
  x       injected noise rate (photons/s) or wave-plate angle (degrees)
  counts  coincidences in the peak bin
  g2      normalized coincidences in the peak bin
  snr     g2 - 1
  sigma   Poisson error sqrt(counts)
For --kind visibility:
  x, c_max (0 deg), c_min (45 deg), c_ac (= c_min), visibility, sigma_v,
  observed_rate (signal detector clicks/s at the maximum), d (correction factor)
"""


class UsageError(Exception):
    pass


def _floats(text):
    """Comma list ``a,b,c`` or linear range ``start:stop:count``."""
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            return [float(v) for v in np.linspace(float(start), float(stop), int(num))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse values {text!r}") from None


def _lag_range(text):
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError("lag range must be MIN:MAX in ticks") from None


def _load(args):
    cfg = load_config(args.config, seed=args.seed)
    if getattr(args, "arrangement", None):
        cfg = cfg.with_(channel__arrangement=args.arrangement.upper())
    return cfg


def cmd_simulate(args, out):
    cfg = _load(args)
    run = analysis.simulate(cfg)
    write_timestamps(args.out, [run.reference, run.signal], channel_count=2)
    T = cfg.duration
    print(f"duration_s: {T!r}", file=out)
    print(f"arrangement: {cfg.channel.arrangement}", file=out)
    print(f"tick_ps: {round(cfg.tick / 1e-12)}", file=out)
    print(f"channel 0 (reference) clicks: {len(run.reference)}  rate_per_s: {len(run.reference) / T:.6g}", file=out)
    print(f"channel 1 (signal) clicks: {len(run.signal)}  rate_per_s: {len(run.signal) / T:.6g}", file=out)
    print(f"wrote: {args.out}", file=out)
    return EXIT_OK


def cmd_g2(args, out):
    data = read_timestamps(args.file)
    tick = data.tick_ps * 1e-12
    if args.duration is not None:
        duration_ticks = int(math.floor(args.duration / tick))
    else:
        duration_ticks = int(data.ticks[-1]) + 1 if len(data.ticks) else 0
    sig = data.stream(args.signal_channel, duration_ticks)
    ref = data.stream(args.reference_channel, duration_ticks)
    lo, hi = args.lag_range
    try:
        cfg = CorrelogramConfig(args.bins, lo, hi)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    corr = correlogram(sig, ref, cfg)
    est = g2(corr)
    k = peak_bin(corr)
    T = corr.duration
    print(f"duration_s: {T:.9g}", file=out)
    print(f"singles_signal_per_s: {corr.n_s / T:.6g}", file=out)
    print(f"singles_reference_per_s: {corr.n_r / T:.6g}", file=out)
    print(f"bin_width_ps: {cfg.bin_width * data.tick_ps}", file=out)
    print(f"peak_lag_ticks: {int(corr.lags[k])}", file=out)
    print(f"peak_lag_ns: {corr.lags[k] * tick * 1e9:.6g}", file=out)
    print(f"peak_coincidences: {int(corr.counts[k])}", file=out)
    print(f"coincidence_rate_per_s: {corr.counts[k] / T:.6g}", file=out)
    print(f"peak_g2: {est.peak_g2:.6g}", file=out)
    print(f"snr: {est.snr:.6g}", file=out)
    print(f"significant: {'yes' if est.significant else 'no'}", file=out)
    if args.out:
        rows = ({"lag_ticks": lag, "counts": c, "g2": v} for lag, c, v in zip(corr.lags, corr.counts, est.g2))
        write_csv(args.out, rows, ["lag_ticks", "counts", "g2"])
    return EXIT_OK


def cmd_sweep(args, out):
    cfg = _load(args)
    values = args.values
    if not values:
        raise UsageError("--values is empty")
    if args.kind == "noise":
        res = analysis._noise_sweep(cfg, values)
        rows = list(res.rows())
        columns = SWEEP_COLUMNS
    elif args.kind == "qwp":
        res = analysis.sweep_qwp(cfg, np.radians(values))
        rows = list(res.rows())
        for row, deg in zip(rows, values):
            row["x"] = deg
        columns = SWEEP_COLUMNS
    else:
        res = analysis.sweep_visibility(cfg, values)
        rows = list(res.rows())
        columns = VISIBILITY_COLUMNS
    write_csv(args.out, rows, columns)
    for i, msg in res.errors:
        print(f"point {i} failed: {msg}", file=sys.stderr)
    print(f"kind: {args.kind}", file=out)
    print(f"points: {len(rows)}", file=out)
    print(f"peak_lag_ticks: {res.lag}", file=out)
    print(f"wrote: {args.out}", file=out)
    return EXIT_OK


def cmd_fit(args, out):
    if args.model == "sinusoid":
        data = read_csv(args.csv, required=["x", "counts", "sigma"])
        fit = analysis.fit_sinusoid(theta=np.radians(data["x"]), counts=data["counts"], sigma=data["sigma"])
        print("model: floor + amplitude*cos^2(2*theta - phase)", file=out)
        print(f"c_max: {fit.c_max:.6g} +- {fit.sigma_c_max:.3g}", file=out)
        print(f"c_min: {fit.c_min:.6g} +- {fit.sigma_c_min:.3g}", file=out)
        print(f"phase_deg: {math.degrees(fit.phase):.6g} +- {math.degrees(fit.sigma_phase):.3g}", file=out)
        print(f"visibility: {fit.visibility:.6g}", file=out)
        print(f"chi2: {fit.chi2:.6g}", file=out)
        print(f"residual_norm: {fit.residual_norm:.6g}", file=out)
        if fit.degenerate:
            print("degenerate: yes (zero amplitude, phase undetermined)", file=out)
        return EXIT_OK
    data = read_csv(args.csv, required=["c_ac", "visibility", "sigma_v", "observed_rate", "c_max", "c_min"])
    detector = DetectorModel(dead_time=args.dead_time_ns * 1e-9)
    guess = float(np.nanmax(data["c_max"] - data["c_min"]))
    if not guess > 0:
        raise FitError("no positive C_max - C_min to start from")
    fit = analysis.fit_visibility_curve(data["c_ac"], data["visibility"], data["observed_rate"], guess,
                                        detector, sigma_v=data["sigma_v"],
                                        correct_dead_time=not args.no_dead_time)
    print("model: V = C_corr / (C_corr + 2 C_ac d)", file=out)
    print(f"c_corr: {fit.c_corr:.6g} +- {fit.sigma_c_corr:.3g}", file=out)
    print(f"dead_time_ns: {args.dead_time_ns:g}", file=out)
    print(f"d_range: {np.min(fit.d):.6g} .. {np.max(fit.d):.6g}", file=out)
    print(f"chi2: {fit.chi2:.6g}", file=out)
    print(f"residual_norm: {float(np.linalg.norm(fit.residuals)):.6g}", file=out)
    return EXIT_OK


def cmd_saturation(args, out):
    if args.config:
        det = load_config(args.config).signal_detector
    else:
        det = DetectorModel(args.efficiency, args.dead_time_ns * 1e-9)
    seed = 0 if args.seed is None else args.seed
    reports = saturation_curve(det, args.rates, duration=args.duration, seed=seed)
    rows = [{"incident_rate": r.incident_rate, "observed_rate": r.observed_rate,
             "d": r.correction_factor, "overflow": r.overflow} for r in reports]
    columns = ["incident_rate", "observed_rate", "d", "overflow"]
    if args.out:
        write_csv(args.out, rows, columns)
    else:
        write_csv(out, rows, columns)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="qicorr", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="override the configuration seed")

    p = sub.add_parser("simulate", parents=[common], help="simulate a run and write a timestamp file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--arrangement", choices=["tc", "tpc"], type=str.lower)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("g2", help="correlogram, peak g2 and SNR of a timestamp file")
    p.add_argument("file")
    p.add_argument("--bins", type=int, default=1, help="bin width in ticks")
    p.add_argument("--lag-range", type=_lag_range, default=(-200, 200), help="MIN:MAX in ticks")
    p.add_argument("--duration", type=float, help="acquisition time in s (default: last tick + 1)")
    p.add_argument("--signal-channel", type=int, default=1)
    p.add_argument("--reference-channel", type=int, default=0)
    p.add_argument("--out", help="per-bin CSV (lag_ticks, counts, g2)")
    p.set_defaults(func=cmd_g2)

    p = sub.add_parser("sweep", parents=[common], help="noise, wave-plate or visibility sweep to CSV",
                       epilog=SWEEP_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", required=True)
    p.add_argument("--kind", choices=["noise", "qwp", "visibility"], required=True)
    p.add_argument("--values", type=_floats, required=True,
                   help="comma list or start:stop:count (noise in photons/s, qwp in degrees)")
    p.add_argument("--arrangement", choices=["tc", "tpc"], type=str.lower)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="fit a sweep CSV")
    p.add_argument("csv")
    p.add_argument("--model", choices=["sinusoid", "visibility"], required=True)
    p.add_argument("--dead-time-ns", type=float, default=18.0)
    p.add_argument("--no-dead-time", action="store_true", help="force d = 1")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("saturation", parents=[common], help="observed rate and correction factor vs incident rate")
    p.add_argument("--rates", type=_floats, required=True)
    p.add_argument("--config", help="take the signal detector from this configuration")
    p.add_argument("--efficiency", type=float, default=1.0)
    p.add_argument("--dead-time-ns", type=float, default=18.0)
    p.add_argument("--duration", type=float, default=1e-2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_saturation)
    return parser


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG if getattr(args, "config", None) == exc.filename else EXIT_DATA
    except (TimestampFileError, NoPeakError, UndefinedG2Error, UsageError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FitError as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return EXIT_FIT
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
