"""Command-line front end.

Exit codes: 0 success, 1 validation failure (including failed margin pairs),
2 I/O failure.
"""

from __future__ import annotations

import argparse
import signal
import sys
from datetime import timedelta
from pathlib import Path

from .errors import ValidationError
from .ingestion import default_config, load_config, load_season_map, load_snapshot
from .margins import DEFAULT_HORIZONS, compute_margin_set, horizon_pairs
from .model import DEFAULT_SEASONS
from .series import read_series, rows_from_results, write_series

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


def _horizons(values) -> tuple[int, ...]:
    out = []
    for chunk in values:
        for part in str(chunk).split(","):
            if part.strip():
                minutes = int(part)
                if minutes < 0:
                    raise argparse.ArgumentTypeError("horizons must be >= 0")
                out.append(minutes)
    return tuple(dict.fromkeys(out))


def _write_table(frame, out):
    if out is None:
        frame.to_csv(sys.stdout, index=False, lineterminator="\n")
    else:
        frame.to_csv(out, index=False, lineterminator="\n")


def _seasons(args, config=None):
    if args.season_map:
        return load_season_map(args.season_map)
    return config.seasons if config is not None else dict(DEFAULT_SEASONS)


def cmd_compute(args) -> int:
    config = load_config(args.config) if args.config else default_config()
    horizons = _horizons(args.horizons) if args.horizons else DEFAULT_HORIZONS
    rows, failures = [], []
    for path in args.snapshot:
        snapshot = load_snapshot(path)
        if args.lead is not None:
            t = snapshot.t0 + timedelta(minutes=args.lead)
            pairs = [(t, t + timedelta(minutes=h)) for h in horizons]
        else:
            pairs = horizon_pairs(snapshot, horizons)
        batch = compute_margin_set(snapshot, pairs, config, workers=args.workers)
        rows.extend(rows_from_results(batch.results))
        failures.extend(f"{path}: {f}" for f in batch.failures)
    write_series(rows, args.out)
    for line in failures:
        print(f"error: {line}", file=sys.stderr)
    print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    return EXIT_INVALID if failures else EXIT_OK


def cmd_validate(args) -> int:
    if not (args.snapshot or args.config or args.series):
        print("error: nothing to validate; pass --snapshot, --config or --series", file=sys.stderr)
        return EXIT_INVALID
    if args.config:
        load_config(args.config)
        print(f"ok: {args.config}")
    for path in args.snapshot or ():
        snap = load_snapshot(path)
        print(f"ok: {path} ({len(snap.rows)} rows, drivers: {','.join(sorted(snap.drivers))})")
    for path in args.series or ():
        print(f"ok: {path} ({len(read_series(path))} rows)")
    return EXIT_OK


def _stats(args, compute, plot):
    rows = read_series(args.series)
    table = compute(rows)
    _write_table(table, args.out)
    if args.plots:
        Path(args.plots).mkdir(parents=True, exist_ok=True)
        for p in plot(table, args.plots):
            print(f"wrote {p}", file=sys.stderr)
    return EXIT_OK


def cmd_stats_exceedance(args) -> int:
    from . import plots, stats

    return _stats(args, stats.exceedance_ratio, plots.plot_exceedance)


def cmd_stats_box(args) -> int:
    from . import plots, stats

    seasons = _seasons(args)
    return _stats(args, lambda rows: stats.seasonal_boxstats(rows, seasons), plots.plot_boxstats)


def cmd_stats_hourly(args) -> int:
    from . import plots, stats

    seasons = _seasons(args)
    return _stats(args, lambda rows: stats.hourly_means(rows, seasons, by_horizon=args.by_horizon),
                  plots.plot_hourly)


def cmd_serve(args) -> int:
    import uvicorn

    from .service import SeriesStore, create_app

    store = SeriesStore(args.series)
    if hasattr(signal, "SIGHUP"):
        def _reload(signum, frame):
            try:
                state = store.reload()
                print(f"reloaded {state.rows} rows from {state.source}", file=sys.stderr)
            except (OSError, ValidationError) as exc:
                print(f"reload failed, keeping previous series: {exc}", file=sys.stderr)

        signal.signal(signal.SIGHUP, _reload)
    uvicorn.run(create_app(store), host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def cmd_synth_year(args) -> int:
    from .synthetic import SyntheticYear, synthetic_config

    config = load_config(args.config) if args.config else synthetic_config()
    kwargs = {"year": args.year}
    if args.days:
        kwargs["days"] = tuple(int(d) for d in args.days.split(","))
    rows, failures = SyntheticYear(**kwargs).compute(config)
    write_series(rows, args.out)
    for f in failures:
        print(f"error: {f}", file=sys.stderr)
    print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    return EXIT_INVALID if failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dynmargin", description="Dynamic sizing of required balancing margins")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="compute margins for forecast snapshots")
    p.add_argument("--snapshot", nargs="+", required=True, help="snapshot CSV file(s)")
    p.add_argument("--config", help="engine configuration JSON (default: shipped config)")
    p.add_argument("--horizons", nargs="+", help="anticipation periods in minutes (default 15,30,60,120)")
    p.add_argument("--lead", type=int, help="fix t = t0 + LEAD minutes and study T = t + horizon; "
                                            "default pairs every snapshot instant with every horizon")
    p.add_argument("--workers", type=int, default=1, help="threads used for (t, T) pairs")
    p.add_argument("--out", required=True, help="output margin series CSV")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("validate", help="validate input files without computing")
    p.add_argument("--snapshot", nargs="+")
    p.add_argument("--config")
    p.add_argument("--series", nargs="+")
    p.set_defaults(func=cmd_validate)

    for name, func, help_text in (("stats-exceedance", cmd_stats_exceedance, "monthly exceedance ratios"),
                                  ("stats-box", cmd_stats_box, "seasonal box-plot statistics"),
                                  ("stats-hourly", cmd_stats_hourly, "hourly seasonal means")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--series", required=True, help="margin series CSV")
        p.add_argument("--out", help="output CSV (default stdout)")
        p.add_argument("--plots", help="directory for SVG figures")
        if name != "stats-exceedance":
            p.add_argument("--season-map", help="JSON mapping season name to month numbers")
        if name == "stats-hourly":
            p.add_argument("--by-horizon", action="store_true", help="also group by anticipation period")
        p.set_defaults(func=func)

    p = sub.add_parser("serve", help="serve a margin series over HTTP (read-only)")
    p.add_argument("--series", required=True)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("synth-year", help="compute the synthetic reference year")
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="engine configuration JSON (default: the synthetic year's own)")
    p.add_argument("--year", type=int, default=2022)
    p.add_argument("--days", help="days of each month, comma separated (default 1,8,15,22)")
    p.set_defaults(func=cmd_synth_year)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
