import csv
import json
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np
import pytest

from edgepool.cli import main
from edgepool.scenario import read_rates_file

FLASH_YAML = """\
version: 1
experiment: flash_crowd
seed: 42
repetitions: 2
flash_crowd:
  ue_counts: [10, 20]
  vehicles: 5
  probes_per_ue: 3
"""

DAILY_YAML = """\
version: 1
experiment: daily_migration
seed: 42
repetitions: 2
daily_migration:
  parking_capacity: 50
  vehicle_rates: {9: 6.0, 10: 6.0, 11: 6.0, 12: 6.0, 13: 6.0, 14: 6.0, 15: 6.0}
  ue_rates: {12: 5.0, 13: 6.0, 14: 6.0, 15: 5.0}
"""


@pytest.fixture
def flash_scenario(tmp_path):
    path = tmp_path / "flash.yaml"
    path.write_text(FLASH_YAML)
    return path


@pytest.fixture
def daily_scenario(tmp_path):
    path = tmp_path / "daily.yaml"
    path.write_text(DAILY_YAML)
    return path


def test_run_writes_artifacts_and_manifest(flash_scenario, tmp_path):
    out = tmp_path / "artifacts"
    assert main(["run", "--scenario", str(flash_scenario), "--out", str(out),
                 "--workers", "1"]) == 0
    rows = list(csv.DictReader(open(out / "rtt.csv")))
    assert len(rows) == 2 * 3 * 2  # ue_counts x schemes x reps
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seeds"] == [42, 43]
    assert manifest["config"]["experiment"] == "flash_crowd"
    assert "config_sha256" in manifest


def test_run_is_byte_deterministic(flash_scenario, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--scenario", str(flash_scenario), "--out", str(out1),
                 "--workers", "1"]) == 0
    assert main(["run", "--scenario", str(flash_scenario), "--out", str(out2),
                 "--workers", "2"]) == 0
    for name in ("rtt.csv", "migrations.csv", "downtime.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_rerun_from_manifest_reproduces_artifacts(flash_scenario, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    main(["run", "--scenario", str(flash_scenario), "--out", str(out1),
          "--workers", "1"])
    assert main(["run", "--scenario", str(out1 / "manifest.json"),
                 "--out", str(out2), "--workers", "1"]) == 0
    assert (out1 / "rtt.csv").read_bytes() == (out2 / "rtt.csv").read_bytes()


def test_malformed_config_exits_2_without_artifacts(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("version: 1\nexperiment: flash_crowd\ntypo_key: 1\n")
    out = tmp_path / "artifacts"
    assert main(["run", "--scenario", str(bad), "--out", str(out)]) == 2
    assert not out.exists()
    assert "unknown key" in capsys.readouterr().err


def test_missing_scenario_exits_2(tmp_path):
    assert main(["run", "--scenario", str(tmp_path / "none.yaml")]) == 2


def test_set_overrides_apply(flash_scenario, tmp_path):
    out = tmp_path / "artifacts"
    assert main(["run", "--scenario", str(flash_scenario), "--out", str(out),
                 "--workers", "1", "--reps", "1",
                 "--set", "flash_crowd.ue_counts=[5]"]) == 0
    rows = list(csv.DictReader(open(out / "rtt.csv")))
    assert {r["ue_count"] for r in rows} == {"5"}
    assert len(rows) == 3


def test_daily_run_covers_report_window(daily_scenario, tmp_path):
    out = tmp_path / "artifacts"
    assert main(["run", "--scenario", str(daily_scenario), "--out", str(out),
                 "--workers", "1"]) == 0
    rows = list(csv.DictReader(open(out / "migrations.csv")))
    assert sorted({int(r["hour"]) for r in rows}) == list(range(13, 22))
    assert sorted({r["run"] for r in rows}) == ["0", "1"]


# --- fit ---

def write_parking_csv(path: Path, durations_min, start="2024-03-01T08:00:00"):
    t0 = datetime.fromisoformat(start)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["vehicle_id", "enter_iso8601", "leave_iso8601"])
        for i, minutes in enumerate(durations_min):
            enter = t0 + timedelta(minutes=(i * 7) % 600)
            leave = enter + timedelta(minutes=float(minutes))
            w.writerow([f"v{i}", enter.isoformat(), leave.isoformat()])


def write_wifi_csv(path: Path, stamps):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp_iso8601"])
        for s in stamps:
            w.writerow([s.isoformat()])


def test_fit_recovers_the_occupancy_parameters(tmp_path):
    rng = np.random.default_rng(17)
    durations = rng.normal(202.80, 135.07, size=200_000)
    parking = tmp_path / "parking.csv"
    write_parking_csv(parking, durations)
    stamps = [datetime(2024, 3, 1, 12, 0) + timedelta(minutes=int(m))
              for m in rng.integers(0, 59, size=500)]
    wifi = tmp_path / "wifi.csv"
    write_wifi_csv(wifi, stamps)
    out = tmp_path / "rates.txt"
    assert main(["fit", "--parking", str(parking), "--wifi", str(wifi),
                 "--out", str(out)]) == 0
    occupancy, vehicle_rates, ue_rates = read_rates_file(out)
    assert occupancy.mu_minutes == pytest.approx(202.80, rel=0.01)
    assert occupancy.sigma_minutes == pytest.approx(135.07, rel=0.01)
    assert ue_rates[12] == 500.0  # all joins in one hour of one day
    assert set(vehicle_rates) == set(range(24))


def test_fit_header_only_csv_exits_2(tmp_path, capsys):
    parking = tmp_path / "parking.csv"
    parking.write_text("vehicle_id,enter_iso8601,leave_iso8601\n")
    wifi = tmp_path / "wifi.csv"
    wifi.write_text("timestamp_iso8601\n")
    assert main(["fit", "--parking", str(parking), "--wifi", str(wifi),
                 "--out", str(tmp_path / "rates.txt")]) == 2


def test_fit_bad_timestamp_names_the_line(tmp_path, capsys):
    parking = tmp_path / "parking.csv"
    parking.write_text("vehicle_id,enter_iso8601,leave_iso8601\n"
                       "v0,2024-03-01T08:00:00,2024-03-01T09:00:00\n"
                       "v1,not-a-date,2024-03-01T09:00:00\n")
    wifi = tmp_path / "wifi.csv"
    wifi.write_text("timestamp_iso8601\n")
    assert main(["fit", "--parking", str(parking), "--wifi", str(wifi),
                 "--out", str(tmp_path / "rates.txt")]) == 2
    assert "line 3" in capsys.readouterr().err


def test_fit_wrong_header_rejected(tmp_path):
    parking = tmp_path / "parking.csv"
    parking.write_text("id,start,end\nv0,2024-03-01T08:00:00,2024-03-01T09:00:00\n")
    wifi = tmp_path / "wifi.csv"
    wifi.write_text("timestamp_iso8601\n")
    assert main(["fit", "--parking", str(parking), "--wifi", str(wifi),
                 "--out", str(tmp_path / "rates.txt")]) == 2


# --- report ---

def test_report_prints_headline_comparisons(flash_scenario, tmp_path, capsys):
    out = tmp_path / "artifacts"
    main(["run", "--scenario", str(flash_scenario), "--out", str(out),
          "--workers", "1"])
    assert main(["report", "--artifacts", str(out)]) == 0
    text = capsys.readouterr().out
    assert "far-edge/cloud RTT ratio: 0.50" in text
    assert "far-edge - edge RTT delta: 3.000 ms" in text


def test_report_on_daily_artifacts_shows_downtime(daily_scenario, tmp_path, capsys):
    out = tmp_path / "artifacts"
    main(["run", "--scenario", str(daily_scenario), "--out", str(out),
          "--workers", "1"])
    assert main(["report", "--artifacts", str(out)]) == 0
    text = capsys.readouterr().out
    assert "mean downtime: 7.000 ms" in text
    assert "migrations per hour" in text


def test_report_on_empty_dir_exits_2(tmp_path, capsys):
    assert main(["report", "--artifacts", str(tmp_path / "void")]) == 2
    assert "manifest.json" in capsys.readouterr().err
