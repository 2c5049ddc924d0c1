"""Metrics collection, cross-run summaries, and deterministic CSV artifacts.

CSV files are byte-identical for identical inputs: rows sorted, floats fixed
to three decimals of milliseconds, no timestamps or machine-dependent
content.

Column contracts:
    rtt.csv        scheme,ue_count,run,mean_ms
    migrations.csv hour,run,count
    downtime.csv   hour,run,mean_ms,std_ms
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from statistics import mean, pstdev

from .engine import hour_of_day, us_to_ms
from .mechost import MigrationRecord

SCHEMES = ("cloud", "edge", "far_edge")


@dataclass(frozen=True)
class RttSample:
    ue_id: str
    scheme: str
    value_ms: float
    at: int

    def __post_init__(self):
        if self.value_ms <= 0:
            raise ValueError("round trips are strictly positive")


@dataclass
class HourBucket:
    hour: int
    migration_count: int = 0
    downtime_samples_ms: list[float] = field(default_factory=list)


@dataclass
class RunSeries:
    """All samples collected by one simulation run."""

    scheme: str | None = None
    ue_count: int | None = None
    run: int = 0
    rtt_samples: list[RttSample] = field(default_factory=list)
    migrations: list[MigrationRecord] = field(default_factory=list)

    def record(self, item) -> None:
        if isinstance(item, RttSample):
            self.rtt_samples.append(item)
        elif isinstance(item, MigrationRecord):
            self.migrations.append(item)
        else:
            raise TypeError(f"cannot record {item!r}")

    def hour_buckets(self) -> dict[int, HourBucket]:
        """Migrations bucketed by the hour of day of the app shutdown."""
        buckets: dict[int, HourBucket] = {}
        for record in self.migrations:
            hour = hour_of_day(record.shutdown_at)
            bucket = buckets.setdefault(hour, HourBucket(hour))
            bucket.migration_count += 1
            bucket.downtime_samples_ms.append(us_to_ms(record.downtime_us))
        return buckets

    def mean_rtt_ms(self) -> float | None:
        if not self.rtt_samples:
            return None
        return mean(s.value_ms for s in self.rtt_samples)


@dataclass
class Summary:
    """Cross-run aggregate: means and spreads over repetitions."""

    rtt_by_level: dict[tuple[str, int], tuple[float, float]]
    migrations_by_hour: dict[int, float]
    downtime_by_hour: dict[int, tuple[float, float]]
    total_migrations_mean: float


def summarize(runs: list[RunSeries]) -> Summary:
    if not runs:
        raise ValueError("need at least one run")
    by_level: dict[tuple[str, int], list[float]] = {}
    for run in runs:
        value = run.mean_rtt_ms()
        if value is not None and run.scheme is not None:
            by_level.setdefault((run.scheme, run.ue_count or 0), []).append(value)
    rtt_by_level = {k: (mean(v), pstdev(v) if len(v) > 1 else 0.0)
                    for k, v in by_level.items()}

    counts_by_hour: dict[int, list[int]] = {}
    downtimes_by_hour: dict[int, list[float]] = {}
    for run in runs:
        buckets = run.hour_buckets()
        for hour, bucket in buckets.items():
            counts_by_hour.setdefault(hour, []).append(bucket.migration_count)
            downtimes_by_hour.setdefault(hour, []).extend(bucket.downtime_samples_ms)
    n_runs = len(runs)
    migrations_by_hour = {h: sum(c) / n_runs for h, c in counts_by_hour.items()}
    downtime_by_hour = {h: (mean(d), pstdev(d) if len(d) > 1 else 0.0)
                        for h, d in downtimes_by_hour.items()}
    totals = [len(run.migrations) for run in runs]
    return Summary(rtt_by_level, migrations_by_hour, downtime_by_hour,
                   sum(totals) / n_runs)


# --- CSV artifacts ---

RTT_HEADER = ("scheme", "ue_count", "run", "mean_ms")
MIGRATIONS_HEADER = ("hour", "run", "count")
DOWNTIME_HEADER = ("hour", "run", "mean_ms", "std_ms")


def _write_rows(path: Path, header: tuple[str, ...], rows: list[tuple]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_rtt_csv(path: Path, rows: list[tuple[str, int, int, float]]) -> None:
    ordered = sorted(rows, key=lambda r: (r[0], r[1], r[2]))
    _write_rows(path, RTT_HEADER,
                [(s, u, r, f"{v:.3f}") for s, u, r, v in ordered])


def write_migrations_csv(path: Path, rows: list[tuple[int, int, int]]) -> None:
    ordered = sorted(rows, key=lambda r: (r[0], r[1]))
    _write_rows(path, MIGRATIONS_HEADER, ordered)


def write_downtime_csv(path: Path,
                       rows: list[tuple[int, int, float, float]]) -> None:
    ordered = sorted(rows, key=lambda r: (r[0], r[1]))
    _write_rows(path, DOWNTIME_HEADER,
                [(h, r, f"{m:.3f}", f"{s:.3f}") for h, r, m, s in ordered])


@dataclass
class TableSet:
    """Per-run aggregate rows destined for the three CSV artifacts."""

    rtt_rows: list[tuple[str, int, int, float]] = field(default_factory=list)
    migration_rows: list[tuple[int, int, int]] = field(default_factory=list)
    downtime_rows: list[tuple[int, int, float, float]] = field(default_factory=list)


def emit_csv(tables: TableSet, out_dir: Path) -> dict[str, Path]:
    """Write the three CSV artifacts; a pure function of the tables."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "rtt": out_dir / "rtt.csv",
        "migrations": out_dir / "migrations.csv",
        "downtime": out_dir / "downtime.csv",
    }
    write_rtt_csv(paths["rtt"], tables.rtt_rows)
    write_migrations_csv(paths["migrations"], tables.migration_rows)
    write_downtime_csv(paths["downtime"], tables.downtime_rows)
    return paths
