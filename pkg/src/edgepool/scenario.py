"""Scenario configuration: YAML loading, validation, overrides, rates files.

Configs are versioned structured text; unknown keys are rejected so typos
fail fast. A run manifest embeds the fully resolved config, and the loader
accepts a manifest wherever it accepts a scenario file, which makes any
artifact directory re-runnable as-is.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml

from .domain import AppDescriptor, AreaOfInterest, ResourceCapacity, Zone
from .errors import ConfigError
from .netdelay import DelayProfile
from .workload import (
    DEFAULT_OCCUPANCY_MU,
    DEFAULT_OCCUPANCY_SIGMA,
    OccupancyModel,
)

CONFIG_VERSION = 1

GiB = 1024 ** 3
MiB = 1024 ** 2

# Scenario-default magnitudes (configurable; chosen so a vehicle comfortably
# hosts 16 default apps and the local tier can absorb whole-pool migrations).
DEFAULT_APP = {"cpu": 1_000_000, "ram": 64 * MiB, "disk": 16 * MiB, "state_size": 30}
DEFAULT_VEHICLE_LEASE = {"cpu": 16_000_000, "ram": GiB, "disk": 512 * MiB}
DEFAULT_LOCAL = {"cpu": 4_000_000_000, "ram": 128 * GiB, "disk": 1024 * GiB}
DEFAULT_CLOUD = {"cpu": 400_000_000_000, "ram": 4096 * GiB, "disk": 65536 * GiB}


@dataclass(frozen=True)
class FlashCrowdSettings:
    ue_counts: tuple[int, ...] = tuple(range(50, 501, 50))
    vehicles: int = 100
    probes_per_ue: int = 10
    probe_period_ms: float = 100.0


@dataclass(frozen=True)
class DailySettings:
    parking_capacity: int = 100
    capacity_scale: float = 1.0
    occupancy: OccupancyModel = OccupancyModel()
    vehicle_rates: tuple[tuple[int, float], ...] = ()
    ue_rates: tuple[tuple[int, float], ...] = ()
    report_hours: tuple[int, int] = (13, 21)
    sim_hours: int = 24
    warning_zone_radius_m: float = 150.0

    def vehicle_rate_map(self) -> dict[int, float]:
        return dict(self.vehicle_rates)

    def ue_rate_map(self) -> dict[int, float]:
        return dict(self.ue_rates)


@dataclass(frozen=True)
class ScenarioConfig:
    experiment: str
    seed: int
    repetitions: int
    delay: DelayProfile
    signalling_ms: float
    aoi: AreaOfInterest
    reward_value: float
    app: AppDescriptor
    vehicle_lease: ResourceCapacity
    local_capacity: ResourceCapacity
    cloud_capacity: ResourceCapacity
    placement: str
    flash_crowd: FlashCrowdSettings
    daily: DailySettings


def _require_map(value, where: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{where} must be a mapping")
    return value


def _check_keys(mapping: dict, allowed: set[str], where: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")


def _number(mapping: dict, key: str, default, where: str,
            minimum=None, integer=False):
    value = mapping.get(key, default)
    if integer:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{where}.{key} must be an integer")
    elif not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{where}.{key} must be a number")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{where}.{key} must be >= {minimum}")
    return value


def _capacity(mapping: dict, key: str, defaults: dict, where: str) -> ResourceCapacity:
    section = _require_map(mapping.get(key, dict(defaults)), f"{where}.{key}")
    _check_keys(section, {"cpu", "ram", "disk"}, f"{where}.{key}")
    return ResourceCapacity(
        cpu=_number(section, "cpu", defaults["cpu"], f"{where}.{key}", 0, True),
        ram=_number(section, "ram", defaults["ram"], f"{where}.{key}", 0, True),
        disk=_number(section, "disk", defaults["disk"], f"{where}.{key}", 0, True),
    )


def _rates(mapping: dict, key: str, where: str) -> tuple[tuple[int, float], ...]:
    section = mapping.get(key, {})
    if not isinstance(section, dict):
        raise ConfigError(f"{where}.{key} must map hour -> rate")
    rates = []
    for hour, rate in section.items():
        if not isinstance(hour, int) or not 0 <= hour <= 23:
            raise ConfigError(f"{where}.{key}: hour {hour!r} outside 0..23")
        if not isinstance(rate, (int, float)) or rate < 0:
            raise ConfigError(f"{where}.{key}: rate for hour {hour} must be >= 0")
        rates.append((hour, float(rate)))
    return tuple(sorted(rates))


def _parse_aoi(raw, where: str) -> AreaOfInterest:
    section = _require_map(raw, where)
    _check_keys(section, {"zones"}, where)
    zones_raw = section.get("zones")
    if not isinstance(zones_raw, list) or not zones_raw:
        raise ConfigError(f"{where}.zones must be a non-empty list")
    zones = []
    for i, z in enumerate(zones_raw):
        zw = f"{where}.zones[{i}]"
        zmap = _require_map(z, zw)
        _check_keys(zmap, {"center", "radius_m"}, zw)
        center = zmap.get("center")
        if (not isinstance(center, list) or len(center) != 2
                or not all(isinstance(c, (int, float)) for c in center)):
            raise ConfigError(f"{zw}.center must be [x, y]")
        radius = _number(zmap, "radius_m", None, zw, minimum=0)
        zones.append(Zone(f"zone-{i}", (float(center[0]), float(center[1])),
                          float(radius)))
    return AreaOfInterest("aoi-0", tuple(zones))


_TOP_KEYS = {
    "version", "experiment", "seed", "repetitions", "delay", "signalling_ms",
    "aoi", "reward_value", "app", "vehicle_lease", "local_capacity",
    "cloud_capacity", "placement", "flash_crowd", "daily_migration",
}

_DELAY_KEYS = {"radio_ms", "edge_ms", "core_ms", "per_byte_ms", "jitter_ms"}
_FLASH_KEYS = {"ue_counts", "vehicles", "probes_per_ue", "probe_period_ms"}
_DAILY_KEYS = {
    "parking_capacity", "capacity_scale", "occupancy", "vehicle_rates",
    "ue_rates", "rates_file", "report_hours", "sim_hours",
    "warning_zone_radius_m",
}

_DEFAULT_AOI = {"zones": [{"center": [0.0, 0.0], "radius_m": 500.0}]}


def config_from_dict(raw: dict, base_dir: Path | None = None) -> ScenarioConfig:
    raw = _require_map(raw, "scenario")
    _check_keys(raw, _TOP_KEYS, "scenario")
    if raw.get("version") != CONFIG_VERSION:
        raise ConfigError(f"config version must be {CONFIG_VERSION}")
    experiment = raw.get("experiment")
    if experiment not in ("flash_crowd", "daily_migration"):
        raise ConfigError("experiment must be flash_crowd or daily_migration")

    seed = _number(raw, "seed", 42, "scenario", 0, True)
    repetitions = _number(raw, "repetitions", 5, "scenario", 1, True)

    delay_raw = _require_map(raw.get("delay", {}), "delay")
    _check_keys(delay_raw, _DELAY_KEYS, "delay")
    delay = DelayProfile(
        radio_ms=_number(delay_raw, "radio_ms", 2.0, "delay", 0),
        edge_ms=_number(delay_raw, "edge_ms", 0.5, "delay", 0),
        core_ms=_number(delay_raw, "core_ms", 5.5, "delay", 0),
        per_byte_ms=_number(delay_raw, "per_byte_ms", 0.0, "delay", 0),
        jitter_ms=_number(delay_raw, "jitter_ms", 0.0, "delay", 0),
    )
    signalling_ms = _number(raw, "signalling_ms", 1.0, "scenario", 0)
    aoi = _parse_aoi(raw.get("aoi", _DEFAULT_AOI), "aoi")
    reward_value = _number(raw, "reward_value", 1.0, "scenario", 0)

    app_raw = _require_map(raw.get("app", dict(DEFAULT_APP)), "app")
    _check_keys(app_raw, {"cpu", "ram", "disk", "state_size"}, "app")
    app = AppDescriptor(
        app_type="warning-zone",
        required=ResourceCapacity(
            cpu=_number(app_raw, "cpu", DEFAULT_APP["cpu"], "app", 0, True),
            ram=_number(app_raw, "ram", DEFAULT_APP["ram"], "app", 0, True),
            disk=_number(app_raw, "disk", DEFAULT_APP["disk"], "app", 0, True),
        ),
        state_size=_number(app_raw, "state_size", DEFAULT_APP["state_size"],
                           "app", 0, True),
    )
    vehicle_lease = _capacity(raw, "vehicle_lease", DEFAULT_VEHICLE_LEASE, "scenario")
    local_capacity = _capacity(raw, "local_capacity", DEFAULT_LOCAL, "scenario")
    cloud_capacity = _capacity(raw, "cloud_capacity", DEFAULT_CLOUD, "scenario")

    placement = raw.get("placement", "remote-first")
    if placement != "remote-first":
        raise ConfigError("placement must be remote-first")

    flash_raw = _require_map(raw.get("flash_crowd", {}), "flash_crowd")
    _check_keys(flash_raw, _FLASH_KEYS, "flash_crowd")
    ue_counts_raw = flash_raw.get("ue_counts", list(range(50, 501, 50)))
    if (not isinstance(ue_counts_raw, list) or not ue_counts_raw
            or not all(isinstance(n, int) and n >= 1 for n in ue_counts_raw)):
        raise ConfigError("flash_crowd.ue_counts must be a list of counts >= 1")
    flash = FlashCrowdSettings(
        ue_counts=tuple(ue_counts_raw),
        vehicles=_number(flash_raw, "vehicles", 100, "flash_crowd", 0, True),
        probes_per_ue=_number(flash_raw, "probes_per_ue", 10, "flash_crowd", 1, True),
        probe_period_ms=_number(flash_raw, "probe_period_ms", 100.0,
                                "flash_crowd", minimum=0.001),
    )

    daily_raw = _require_map(raw.get("daily_migration", {}), "daily_migration")
    _check_keys(daily_raw, _DAILY_KEYS, "daily_migration")
    occ_raw = _require_map(daily_raw.get("occupancy", {}), "daily_migration.occupancy")
    _check_keys(occ_raw, {"mu_minutes", "sigma_minutes"}, "daily_migration.occupancy")
    occupancy = OccupancyModel(
        mu_minutes=_number(occ_raw, "mu_minutes", DEFAULT_OCCUPANCY_MU,
                           "daily_migration.occupancy"),
        sigma_minutes=_number(occ_raw, "sigma_minutes", DEFAULT_OCCUPANCY_SIGMA,
                              "daily_migration.occupancy", 0),
    )
    vehicle_rates = _rates(daily_raw, "vehicle_rates", "daily_migration")
    ue_rates = _rates(daily_raw, "ue_rates", "daily_migration")

    rates_file = daily_raw.get("rates_file")
    if rates_file is not None:
        path = Path(rates_file)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise ConfigError(f"rates_file not found: {path}")
        occupancy, vehicle_table, ue_table = read_rates_file(path)
        vehicle_rates = tuple(sorted(vehicle_table.items()))
        ue_rates = tuple(sorted(ue_table.items()))

    report_raw = daily_raw.get("report_hours", [13, 21])
    if (not isinstance(report_raw, list) or len(report_raw) != 2
            or not all(isinstance(h, int) and 0 <= h <= 23 for h in report_raw)
            or report_raw[0] > report_raw[1]):
        raise ConfigError("daily_migration.report_hours must be [first, last]")
    daily = DailySettings(
        parking_capacity=_number(daily_raw, "parking_capacity", 100,
                                 "daily_migration", 1, True),
        capacity_scale=_number(daily_raw, "capacity_scale", 1.0,
                               "daily_migration", minimum=0.000001),
        occupancy=occupancy,
        vehicle_rates=vehicle_rates,
        ue_rates=ue_rates,
        report_hours=(report_raw[0], report_raw[1]),
        sim_hours=_number(daily_raw, "sim_hours", 24, "daily_migration", 1, True),
        warning_zone_radius_m=_number(daily_raw, "warning_zone_radius_m", 150.0,
                                      "daily_migration", minimum=0),
    )
    if experiment == "daily_migration" and not vehicle_rates and not ue_rates:
        raise ConfigError("daily_migration needs vehicle_rates/ue_rates "
                          "(inline or via rates_file)")

    return ScenarioConfig(
        experiment=experiment, seed=seed, repetitions=repetitions, delay=delay,
        signalling_ms=signalling_ms, aoi=aoi, reward_value=reward_value,
        app=app, vehicle_lease=vehicle_lease, local_capacity=local_capacity,
        cloud_capacity=cloud_capacity, placement=placement,
        flash_crowd=flash, daily=daily,
    )


def resolved_dict(cfg: ScenarioConfig) -> dict:
    """Round-trippable plain-dict form of a validated config."""
    return {
        "version": CONFIG_VERSION,
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "repetitions": cfg.repetitions,
        "delay": {
            "radio_ms": cfg.delay.radio_ms,
            "edge_ms": cfg.delay.edge_ms,
            "core_ms": cfg.delay.core_ms,
            "per_byte_ms": cfg.delay.per_byte_ms,
            "jitter_ms": cfg.delay.jitter_ms,
        },
        "signalling_ms": cfg.signalling_ms,
        "aoi": {"zones": [{"center": [z.center[0], z.center[1]],
                           "radius_m": z.radius_m} for z in cfg.aoi.zones]},
        "reward_value": cfg.reward_value,
        "app": {"cpu": cfg.app.required.cpu, "ram": cfg.app.required.ram,
                "disk": cfg.app.required.disk, "state_size": cfg.app.state_size},
        "vehicle_lease": {"cpu": cfg.vehicle_lease.cpu,
                          "ram": cfg.vehicle_lease.ram,
                          "disk": cfg.vehicle_lease.disk},
        "local_capacity": {"cpu": cfg.local_capacity.cpu,
                           "ram": cfg.local_capacity.ram,
                           "disk": cfg.local_capacity.disk},
        "cloud_capacity": {"cpu": cfg.cloud_capacity.cpu,
                           "ram": cfg.cloud_capacity.ram,
                           "disk": cfg.cloud_capacity.disk},
        "placement": cfg.placement,
        "flash_crowd": {
            "ue_counts": list(cfg.flash_crowd.ue_counts),
            "vehicles": cfg.flash_crowd.vehicles,
            "probes_per_ue": cfg.flash_crowd.probes_per_ue,
            "probe_period_ms": cfg.flash_crowd.probe_period_ms,
        },
        "daily_migration": {
            "parking_capacity": cfg.daily.parking_capacity,
            "capacity_scale": cfg.daily.capacity_scale,
            "occupancy": {"mu_minutes": cfg.daily.occupancy.mu_minutes,
                          "sigma_minutes": cfg.daily.occupancy.sigma_minutes},
            "vehicle_rates": {h: r for h, r in cfg.daily.vehicle_rates},
            "ue_rates": {h: r for h, r in cfg.daily.ue_rates},
            "report_hours": list(cfg.daily.report_hours),
            "sim_hours": cfg.daily.sim_hours,
            "warning_zone_radius_m": cfg.daily.warning_zone_radius_m,
        },
    }


def apply_overrides(raw: dict, overrides: list[str]) -> dict:
    """Apply --set key.path=value pairs onto the raw config dict."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value: {item!r}")
        key_path, _, value_text = item.partition("=")
        try:
            value = yaml.safe_load(value_text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse override value {value_text!r}: {exc}")
        node = raw
        parts = key_path.split(".")
        for part in parts[:-1]:
            child = node.get(part)
            if not isinstance(child, dict):
                child = {}
                node[part] = child
            node = child
        node[parts[-1]] = value
    return raw


def load_config(path: str | Path, overrides: list[str] | None = None) -> ScenarioConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"scenario file not found: {path}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError(f"{path} does not contain a mapping")
    if "config" in raw and "tool_version" in raw:
        raw = _require_map(raw["config"], "manifest.config")  # run manifest
    if overrides:
        raw = apply_overrides(raw, list(overrides))
    return config_from_dict(raw, base_dir=path.parent)


# --- fitted-rates file (documented key-value text) ---

RATES_MAGIC = "edgepool-rates v1"


def write_rates_file(path: str | Path, occupancy: OccupancyModel,
                     vehicle_rates: dict[int, float],
                     ue_rates: dict[int, float]) -> None:
    lines = [RATES_MAGIC]
    lines.append(f"occupancy_mu_minutes {occupancy.mu_minutes:.6f}")
    lines.append(f"occupancy_sigma_minutes {occupancy.sigma_minutes:.6f}")
    for hour in sorted(vehicle_rates):
        lines.append(f"vehicle_rate {hour} {vehicle_rates[hour]:.6f}")
    for hour in sorted(ue_rates):
        lines.append(f"ue_rate {hour} {ue_rates[hour]:.6f}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_rates_file(path: str | Path) -> tuple[OccupancyModel, dict[int, float],
                                               dict[int, float]]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != RATES_MAGIC:
        raise ConfigError(f"{path} is not a rates file (missing '{RATES_MAGIC}')")
    mu = DEFAULT_OCCUPANCY_MU
    sigma = DEFAULT_OCCUPANCY_SIGMA
    vehicle_rates: dict[int, float] = {}
    ue_rates: dict[int, float] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        try:
            if parts[0] == "occupancy_mu_minutes":
                mu = float(parts[1])
            elif parts[0] == "occupancy_sigma_minutes":
                sigma = float(parts[1])
            elif parts[0] == "vehicle_rate":
                vehicle_rates[int(parts[1])] = float(parts[2])
            elif parts[0] == "ue_rate":
                ue_rates[int(parts[1])] = float(parts[2])
            else:
                raise ConfigError(f"{path}:{lineno}: unknown entry {parts[0]!r}")
        except (IndexError, ValueError):
            raise ConfigError(f"{path}:{lineno}: malformed rates entry")
    return OccupancyModel(mu, sigma), vehicle_rates, ue_rates
