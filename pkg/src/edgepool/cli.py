"""Command-line front end: run experiments, fit datasets, report artifacts.

Exit codes: 0 success, 1 runtime failure, 2 configuration/input error.
EDGEPOOL_LOG=debug|info|... controls log verbosity (debug also traces
dispatched events in wire form).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
from datetime import datetime
from pathlib import Path
from statistics import mean

from . import __version__
from .errors import ConfigError, EdgePoolError, MissingArtifact, ParseError, TooFewSamples
from .metrics import emit_csv
from .scenario import load_config, resolved_dict, write_rates_file
from .workload import OccupancyModel, fit_normal, fit_poisson

logger = logging.getLogger("edgepool")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _configure_logging() -> None:
    level_name = os.environ.get("EDGEPOOL_LOG", "warning").upper()
    level = getattr(logging, level_name, logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


# --- run ---

def cmd_run(args) -> int:
    cfg = load_config(args.scenario, overrides=args.set or [])
    if args.seed is not None or args.reps is not None:
        raw = resolved_dict(cfg)
        if args.seed is not None:
            raw["seed"] = args.seed
        if args.reps is not None:
            raw["repetitions"] = args.reps
        from .scenario import config_from_dict
        cfg = config_from_dict(raw)

    from .experiments import run_experiment
    result = run_experiment(cfg, workers=args.workers)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = emit_csv(result.tables, out_dir)
    config_dict = resolved_dict(cfg)
    config_blob = json.dumps(config_dict, sort_keys=True).encode()
    manifest = {
        "tool_version": __version__,
        "config_sha256": hashlib.sha256(config_blob).hexdigest(),
        "seeds": result.seeds,
        "config": config_dict,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2,
                                                      sort_keys=True) + "\n")
    for name, path in sorted(paths.items()):
        logger.info("wrote %s", path)
    print(f"artifacts written to {out_dir}")
    return EXIT_OK


# --- fit ---

def _read_parking_csv(path: Path) -> list[tuple[datetime, datetime]]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["vehicle_id", "enter_iso8601", "leave_iso8601"]:
            raise ParseError(f"{path}: expected header "
                             "vehicle_id,enter_iso8601,leave_iso8601", line=1)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise ParseError(f"{path}: expected 3 columns", line=lineno)
            try:
                enter = datetime.fromisoformat(row[1])
                leave = datetime.fromisoformat(row[2])
            except ValueError as exc:
                raise ParseError(f"{path}: {exc}", line=lineno)
            rows.append((enter, leave))
    return rows


def _read_wifi_csv(path: Path) -> list[datetime]:
    stamps = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["timestamp_iso8601"]:
            raise ParseError(f"{path}: expected header timestamp_iso8601", line=1)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 1:
                raise ParseError(f"{path}: expected 1 column", line=lineno)
            try:
                stamps.append(datetime.fromisoformat(row[0]))
            except ValueError as exc:
                raise ParseError(f"{path}: {exc}", line=lineno)
    return stamps


def _hourly_counts(stamps: list[datetime]) -> dict[int, list[int]]:
    """Counts per hour of day over every calendar day the data spans."""
    if not stamps:
        raise TooFewSamples("no timestamps to fit hourly rates from")
    days = sorted({s.date() for s in stamps})
    first, last = days[0], days[-1]
    span = [(first.toordinal() + i) for i in range((last - first).days + 1)]
    counts = {hour: {day: 0 for day in span} for hour in range(24)}
    for stamp in stamps:
        counts[stamp.hour][stamp.date().toordinal()] += 1
    return {hour: [counts[hour][day] for day in span] for hour in range(24)}


def cmd_fit(args) -> int:
    parking = _read_parking_csv(Path(args.parking))
    wifi = _read_wifi_csv(Path(args.wifi))

    durations = [(leave - enter).total_seconds() / 60.0 for enter, leave in parking]
    mu, sigma = fit_normal(durations)
    vehicle_rates = fit_poisson(_hourly_counts([enter for enter, _ in parking]))
    ue_rates = fit_poisson(_hourly_counts(wifi))

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_rates_file(out, OccupancyModel(mu, sigma),
                     vehicle_rates.rates, ue_rates.rates)
    print(f"occupancy: mu={mu:.2f} min sigma={sigma:.2f} min "
          f"({len(durations)} stays); rates written to {out}")
    return EXIT_OK


# --- report ---

def _load_csv(path: Path) -> list[dict[str, str]]:
    if not path.exists():
        raise MissingArtifact(str(path))
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def cmd_report(args) -> int:
    art = Path(args.artifacts)
    manifest_path = art / "manifest.json"
    if not manifest_path.exists():
        raise MissingArtifact(str(manifest_path))
    manifest = json.loads(manifest_path.read_text())
    rtt_rows = _load_csv(art / "rtt.csv")
    migration_rows = _load_csv(art / "migrations.csv")
    downtime_rows = _load_csv(art / "downtime.csv")

    print(f"edgepool report (tool {manifest.get('tool_version', '?')}, "
          f"{len(manifest.get('seeds', []))} repetitions)")

    if rtt_rows:
        by_scheme: dict[str, list[float]] = {}
        for row in rtt_rows:
            by_scheme.setdefault(row["scheme"], []).append(float(row["mean_ms"]))
        means = {s: mean(v) for s, v in by_scheme.items()}
        for scheme in sorted(means):
            print(f"  mean RTT [{scheme}]: {means[scheme]:.3f} ms")
        if "far_edge" in means and "cloud" in means and means["cloud"] > 0:
            print(f"  far-edge/cloud RTT ratio: "
                  f"{means['far_edge'] / means['cloud']:.2f}")
        if "far_edge" in means and "edge" in means:
            print(f"  far-edge - edge RTT delta: "
                  f"{means['far_edge'] - means['edge']:.3f} ms")

    if migration_rows:
        by_hour: dict[int, list[int]] = {}
        for row in migration_rows:
            by_hour.setdefault(int(row["hour"]), []).append(int(row["count"]))
        print("  migrations per hour (mean over runs):")
        for hour in sorted(by_hour):
            print(f"    {hour:02d}:00  {mean(by_hour[hour]):.1f}")

    if downtime_rows:
        weighted = [float(r["mean_ms"]) for r in downtime_rows
                    if float(r["mean_ms"]) > 0]
        if weighted:
            print(f"  mean downtime: {mean(weighted):.3f} ms")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgepool",
        description="MEC + vehicular far-edge resource pooling simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write CSV artifacts")
    run.add_argument("--scenario", required=True, help="scenario YAML (or manifest.json)")
    run.add_argument("--seed", type=int, default=None, help="override base seed")
    run.add_argument("--reps", type=int, default=None, help="override repetitions")
    run.add_argument("--out", default="artifacts", help="artifact directory")
    run.add_argument("--set", action="append", metavar="KEY=VALUE",
                     help="override a config key (dotted path)")
    run.add_argument("--workers", type=int, default=None,
                     help="parallel repetitions (default: min(reps, cores))")
    run.set_defaults(fn=cmd_run)

    fit = sub.add_parser("fit", help="fit occupancy + hourly rates from CSVs")
    fit.add_argument("--parking", required=True,
                     help="CSV: vehicle_id,enter_iso8601,leave_iso8601")
    fit.add_argument("--wifi", required=True,
                     help="CSV: timestamp_iso8601 (one row per join)")
    fit.add_argument("--out", required=True, help="rates file to write")
    fit.set_defaults(fn=cmd_fit)

    report = sub.add_parser("report", help="summarize an artifact directory")
    report.add_argument("--artifacts", required=True)
    report.set_defaults(fn=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ParseError, TooFewSamples, MissingArtifact) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EdgePoolError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
