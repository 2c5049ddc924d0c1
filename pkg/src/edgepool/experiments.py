"""Experiment wiring: flash-crowd RTT sweeps and daily migration scenarios.

A flash-crowd run measures probe round trips for one delivery scheme and one
UE count: vehicles join the pool over the full broker protocol, all UEs
spawn at the same instant, request one app each, then probe it periodically.

A daily run drives a parking lot from per-hour Poisson tables: vehicles park,
lease resources while parked, and leave after a truncated-normal occupancy,
migrating any hosted apps to the local infrastructure on the way out. UEs
arrive from their own hourly table and each runs one warning-zone app.
"""

from __future__ import annotations

import itertools
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .broker import BROKER_TARGET, Broker
from .domain import (
    AppInstance,
    FarEdgeHost,
    HostStatus,
    LocalInfrastructure,
    RewardOffer,
    UserEquipment,
    Zone,
    update_zone_presence,
)
from .engine import Engine, US_PER_HOUR, US_PER_MS, US_PER_SECOND, minutes_to_us, us_to_ms
from .mechost import HostLevel, MigrationRecord
from .mecsystem import DeliveryScheme, RequestStatus, SystemLevel
from .messages import (
    AppAddress,
    AppRejected,
    ProbeReply,
    ProbeRequest,
    ProbeTimer,
    RegisterResources,
    RegistrationAck,
    ReleaseAck,
    ReleaseResources,
    RewardCatalog,
    RewardQuery,
    UeArrival,
    VehicleArrival,
    VehicleDeparture,
)
from .metrics import RunSeries, RttSample, TableSet
from .netdelay import PathKind, one_way_us
from .scenario import ScenarioConfig
from .workload import (
    HourlyRateTable,
    OccupancyModel,
    ParkingLot,
    gen_arrivals,
    gen_occupancy,
    spawn_flash_crowd,
    uniform_position_in_aoi,
)

MEC_HOST_ID = "mec-h-0"
LOCAL_ID = "mec-h-0-local"
CLOUD_ID = "cloud"

FLASH_CROWD_AT = 1 * US_PER_SECOND
FLASH_PROBES_AT = 2 * US_PER_SECOND

trace_log = logging.getLogger("edgepool.trace")


def _install_trace(engine: Engine) -> None:
    """Log every dispatched event in wire form when debug tracing is on."""
    if not trace_log.isEnabledFor(logging.DEBUG):
        return
    from .messages import to_wire

    def hook(event):
        try:
            payload = to_wire(event.payload)
        except TypeError:
            payload = repr(event.payload)
        trace_log.debug("t=%d target=%s %s", event.fire_at, event.target, payload)

    engine.dispatch_hook = hook


@dataclass
class World:
    """One simulation's entities and module instances."""

    engine: Engine
    cfg: ScenarioConfig
    scheme: DeliveryScheme
    broker: Broker
    host: HostLevel
    system: SystemLevel
    cloud: LocalInfrastructure
    sink: RunSeries
    vehicles: dict[str, FarEdgeHost] = field(default_factory=dict)
    ues: dict[str, UserEquipment] = field(default_factory=dict)
    apps: dict[str, AppInstance] = field(default_factory=dict)
    lot: ParkingLot | None = None
    occupancy: OccupancyModel | None = None
    warning_zone: Zone | None = None
    probes_per_ue: int = 0
    probe_period_us: int = 0
    # vehicle ids that must release as soon as their registration is acked
    _deferred_release: set[str] = field(default_factory=set)
    _acked: set[str] = field(default_factory=set)

    # --- vehicle agent (registration protocol, steps 1-6) ---

    def vehicle_target(self, vehicle_id: str) -> str:
        return f"vehicle:{vehicle_id}"

    def _to_broker_delay(self) -> int:
        return one_way_us(PathKind.VEHICLE_TO_MEC_HOST, 0, self.cfg.delay)

    def handle_vehicle(self, vehicle_id: str, payload) -> None:
        vehicle = self.vehicles[vehicle_id]
        if isinstance(payload, VehicleArrival):
            vehicle.status = HostStatus.NEGOTIATING
            self.engine.schedule_in(self._to_broker_delay(), BROKER_TARGET,
                                    RewardQuery(vehicle_id, vehicle.position))
        elif isinstance(payload, RewardCatalog):
            # Basic reward policy: any offer is acceptable; take the first.
            if payload.offers and vehicle_id not in self._deferred_release:
                self.engine.schedule_in(
                    self._to_broker_delay(), BROKER_TARGET,
                    RegisterResources(vehicle_id, vehicle.leased,
                                      payload.offers[0].reward_id))
        elif isinstance(payload, RegistrationAck):
            vehicle.status = HostStatus.REGISTERED
            self._acked.add(vehicle_id)
            if vehicle_id in self._deferred_release:
                self._deferred_release.discard(vehicle_id)
                self._send_release(vehicle_id)
        elif isinstance(payload, VehicleDeparture):
            if self.lot is not None:
                self.lot.leave()
            if vehicle_id in self._acked:
                self._send_release(vehicle_id)
            else:
                # Departure raced the registration protocol; release as soon
                # as (and if) the broker confirms it.
                self._deferred_release.add(vehicle_id)
        elif isinstance(payload, ReleaseAck):
            pass  # pool-side cleanup happens when the VIM gets the release
        else:
            raise TypeError(f"vehicle agent cannot handle {payload!r}")

    def _send_release(self, vehicle_id: str) -> None:
        self.vehicles[vehicle_id].status = HostStatus.RELEASING
        self._acked.discard(vehicle_id)
        self.engine.schedule_in(self._to_broker_delay(), BROKER_TARGET,
                                ReleaseResources(vehicle_id))

    def add_vehicle(self, vehicle: FarEdgeHost, arrive_at: int) -> None:
        self.vehicles[vehicle.vehicle_id] = vehicle
        target = self.vehicle_target(vehicle.vehicle_id)
        self.engine.register(
            target, lambda payload, vid=vehicle.vehicle_id:
            self.handle_vehicle(vid, payload))
        self.engine.schedule(arrive_at, target, VehicleArrival(vehicle.vehicle_id))

    # --- UE agent (request, address, probes) ---

    def ue_target(self, ue_id: str) -> str:
        return f"ue:{ue_id}"

    def handle_ue(self, ue_id: str, payload) -> None:
        ue = self.ues[ue_id]
        if isinstance(payload, UeArrival):
            self.system.request_app(ue_id, self.cfg.app)
        elif isinstance(payload, AppAddress):
            ue.app_instance_id = payload.instance_id
            if self.probes_per_ue and ue.probe_period_us:
                start = max(FLASH_PROBES_AT, self.engine.now)
                for k in range(self.probes_per_ue):
                    self.engine.schedule(start + k * ue.probe_period_us,
                                         self.ue_target(ue_id), ProbeTimer(ue_id))
        elif isinstance(payload, AppRejected):
            pass  # terminal; nothing further for this UE
        elif isinstance(payload, ProbeTimer):
            if ue.app_instance_id is None:
                return
            instance_id = ue.app_instance_id
            path = self.path_to_app(instance_id)
            delay = one_way_us(path, 0, self.cfg.delay, self._probe_jitter())
            self.engine.schedule_in(
                delay, f"app:{instance_id}",
                ProbeRequest(ue_id, instance_id, self.engine.now, ue.position))
        elif isinstance(payload, ProbeReply):
            rtt_ms = us_to_ms(self.engine.now - payload.sent_at)
            self.sink.record(RttSample(ue_id, self.scheme.value, rtt_ms,
                                       self.engine.now))
        else:
            raise TypeError(f"UE agent cannot handle {payload!r}")

    def add_ue(self, ue: UserEquipment, arrive_at: int) -> None:
        self.ues[ue.ue_id] = ue
        target = self.ue_target(ue.ue_id)
        self.engine.register(
            target, lambda payload, uid=ue.ue_id: self.handle_ue(uid, payload))
        self.engine.schedule(arrive_at, target, UeArrival(ue.ue_id))

    # --- app instances ---

    def make_app(self, instance_id: str, ue_id: str, descriptor) -> AppInstance:
        app = AppInstance(instance_id, ue_id, descriptor)
        if self.warning_zone is not None:
            app.zone = self.warning_zone
            app.last_inside = self.warning_zone.contains(self.ues[ue_id].position)
        self.apps[instance_id] = app
        self.engine.register(
            f"app:{instance_id}",
            lambda payload, iid=instance_id: self.handle_app(iid, payload))
        return app

    def handle_app(self, instance_id: str, payload) -> None:
        if not isinstance(payload, ProbeRequest):
            raise TypeError(f"app cannot handle {payload!r}")
        app = self.apps[instance_id]
        if app.placement is None:
            return  # mid-migration; the probe is lost
        zone_alert = update_zone_presence(app, payload.position)
        path = self.path_to_app(instance_id)
        delay = one_way_us(path, len(app.app_state), self.cfg.delay,
                           self._probe_jitter())
        self.engine.schedule_in(
            delay, self.ue_target(payload.ue_id),
            ProbeReply(payload.ue_id, instance_id, payload.sent_at, zone_alert))

    def path_to_app(self, instance_id: str) -> PathKind:
        placement = self.apps[instance_id].placement
        if placement == CLOUD_ID:
            return PathKind.UE_TO_CLOUD_APP
        if placement in self.vehicles:
            return PathKind.UE_TO_FAR_EDGE_APP
        return PathKind.UE_TO_EDGE_APP

    def _probe_jitter(self):
        if self.cfg.delay.jitter_ms > 0:
            return self.engine.rng.stream("probe-jitter")
        return None


def build_world(cfg: ScenarioConfig, scheme: DeliveryScheme, seed: int,
                run: int = 0, ue_count: int | None = None) -> World:
    engine = Engine(seed)
    _install_trace(engine)
    local = LocalInfrastructure(LOCAL_ID, cfg.local_capacity, cfg.local_capacity)
    cloud = LocalInfrastructure(CLOUD_ID, cfg.cloud_capacity, cfg.cloud_capacity)
    sink = RunSeries(scheme=scheme.value, ue_count=ue_count, run=run)

    world: World | None = None  # closed over by the lookups below

    broker = Broker(engine, cfg.delay,
                    position_of=lambda vid: world.vehicles[vid].position)
    host = HostLevel(
        engine, MEC_HOST_ID, local, cfg.delay,
        signalling_ms=cfg.signalling_ms,
        vehicle_lookup=lambda vid: world.vehicles[vid],
        jitter_rng=(engine.rng.stream("migration-jitter")
                    if cfg.delay.jitter_ms > 0 else None),
    )
    broker.subscribe_aoi(MEC_HOST_ID, cfg.aoi, host.vim_target)
    # One basic offer per AoI; vehicles always accept it.
    broker.set_rewards(cfg.aoi,
                       [RewardOffer("reward-0", cfg.aoi.aoi_id, cfg.reward_value)])
    system = SystemLevel(engine, cfg.delay, hosts=[(cfg.aoi, host)], ues={},
                         scheme=scheme, cloud=cloud)

    world = World(engine=engine, cfg=cfg, scheme=scheme, broker=broker,
                  host=host, system=system, cloud=cloud, sink=sink)
    system.ues = world.ues
    system.make_instance = world.make_app
    broker.set_reply_hook(
        lambda vid, result: engine.schedule_in(
            one_way_us(PathKind.MEC_HOST_TO_VEHICLE, 0, cfg.delay),
            world.vehicle_target(vid), result))

    def migration_done(record: MigrationRecord) -> None:
        sink.record(record)
        system.on_migration_complete(record)

    host.on_migration_complete = migration_done
    return world


# --- flash-crowd experiment ---

def simulate_flash(cfg: ScenarioConfig, scheme: DeliveryScheme, ue_count: int,
                   run: int, seed: int, vehicles: int | None = None) -> RunSeries:
    world = build_world(cfg, scheme, seed, run=run, ue_count=ue_count)
    engine = world.engine
    world.probes_per_ue = cfg.flash_crowd.probes_per_ue
    world.probe_period_us = int(round(cfg.flash_crowd.probe_period_ms * US_PER_MS))

    if scheme is DeliveryScheme.FAR_EDGE:
        n_vehicles = cfg.flash_crowd.vehicles if vehicles is None else vehicles
        position_stream = engine.rng.stream("vehicle-positions")
        for i in range(n_vehicles):
            position = uniform_position_in_aoi(cfg.aoi, position_stream)
            world.add_vehicle(
                FarEdgeHost(f"veh-{i:05d}", cfg.vehicle_lease, cfg.vehicle_lease,
                            position), arrive_at=0)

    crowd = spawn_flash_crowd(ue_count, cfg.aoi, engine.rng.stream("ue-positions"),
                              probe_period_us=world.probe_period_us)
    for ue in crowd:
        world.add_ue(ue, arrive_at=FLASH_CROWD_AT)

    horizon = (FLASH_PROBES_AT
               + cfg.flash_crowd.probes_per_ue * world.probe_period_us
               + US_PER_SECOND)
    engine.run_until(horizon)
    return world.sink


def run_flash_rep(cfg: ScenarioConfig, run: int) -> list[tuple[str, int, int, float]]:
    """All (scheme, ue_count) cells for one repetition; one CSV row each."""
    seed = cfg.seed + run
    rows = []
    for ue_count in cfg.flash_crowd.ue_counts:
        for scheme in (DeliveryScheme.CLOUD, DeliveryScheme.EDGE,
                       DeliveryScheme.FAR_EDGE):
            series = simulate_flash(cfg, scheme, ue_count, run, seed)
            mean_rtt = series.mean_rtt_ms()
            if mean_rtt is None:
                raise RuntimeError(
                    f"no RTT samples for {scheme.value}/{ue_count} UEs")
            rows.append((scheme.value, ue_count, run, mean_rtt))
    return rows


# --- daily migration experiment ---

@dataclass
class DailyRunResult:
    run: int
    migration_rows: list[tuple[int, int, int]]
    downtime_rows: list[tuple[int, int, float, float]]
    total_migrations: int
    window_migrations: int
    downtimes_ms: list[float]
    dropped_arrivals: int
    rejected_requests: int


def simulate_daily(cfg: ScenarioConfig, run: int, seed: int) -> DailyRunResult:
    world = build_world(cfg, DeliveryScheme.FAR_EDGE, seed, run=run)
    engine = world.engine
    daily = cfg.daily
    world.lot = ParkingLot(daily.parking_capacity)
    world.occupancy = daily.occupancy
    anchor = cfg.aoi.zones[0]
    world.warning_zone = Zone("warning-zone", anchor.center,
                              daily.warning_zone_radius_m)

    vehicle_table = HourlyRateTable(daily.vehicle_rate_map(), daily.capacity_scale)
    ue_table = HourlyRateTable(daily.ue_rate_map())
    vehicle_stream = engine.rng.stream("vehicle-arrivals")
    ue_stream = engine.rng.stream("ue-arrivals")
    occupancy_stream = engine.rng.stream("occupancy")
    vehicle_positions = engine.rng.stream("vehicle-positions")
    ue_positions = engine.rng.stream("ue-positions")

    lot = world.lot
    vehicle_ids = itertools.count()
    ue_ids = itertools.count()

    def vehicle_arrival(_payload) -> None:
        # Gate on lot capacity first: a full lot turns the vehicle away
        # before it ever talks to the broker.
        if not lot.try_enter():
            return
        vid = f"veh-{next(vehicle_ids):05d}"
        vehicle = FarEdgeHost(vid, cfg.vehicle_lease, cfg.vehicle_lease,
                              uniform_position_in_aoi(cfg.aoi, vehicle_positions))
        world.add_vehicle(vehicle, arrive_at=engine.now)
        stay_us = minutes_to_us(gen_occupancy(daily.occupancy, occupancy_stream))
        engine.schedule(engine.now + stay_us, world.vehicle_target(vid),
                        VehicleDeparture(vid))

    def ue_arrival(_payload) -> None:
        uid = f"ue-{next(ue_ids):05d}"
        ue = UserEquipment(uid, uniform_position_in_aoi(cfg.aoi, ue_positions))
        world.add_ue(ue, arrive_at=engine.now)

    engine.register("workload:vehicle", vehicle_arrival)
    engine.register("workload:ue", ue_arrival)

    for hour in range(daily.sim_hours):
        base = hour * US_PER_HOUR
        for offset in gen_arrivals(vehicle_table, hour % 24, vehicle_stream):
            engine.schedule(base + offset, "workload:vehicle", None)
        for offset in gen_arrivals(ue_table, hour % 24, ue_stream):
            engine.schedule(base + offset, "workload:ue", None)

    engine.run_until(daily.sim_hours * US_PER_HOUR)

    first, last = daily.report_hours
    buckets = world.sink.hour_buckets()
    migration_rows = []
    downtime_rows = []
    window_total = 0
    for hour in range(first, last + 1):
        bucket = buckets.get(hour)
        count = bucket.migration_count if bucket else 0
        window_total += count
        migration_rows.append((hour, run, count))
        if bucket and bucket.downtime_samples_ms:
            samples = bucket.downtime_samples_ms
            mean_ms = sum(samples) / len(samples)
            var = sum((x - mean_ms) ** 2 for x in samples) / len(samples)
            downtime_rows.append((hour, run, mean_ms, var ** 0.5))
        else:
            downtime_rows.append((hour, run, 0.0, 0.0))

    rejected = sum(1 for r in world.system.requests.values()
                   if r.status is RequestStatus.REJECTED)
    return DailyRunResult(
        run=run,
        migration_rows=migration_rows,
        downtime_rows=downtime_rows,
        total_migrations=len(world.sink.migrations),
        window_migrations=window_total,
        downtimes_ms=[us_to_ms(m.downtime_us) for m in world.sink.migrations],
        dropped_arrivals=lot.dropped,
        rejected_requests=rejected,
    )


def run_daily_rep(cfg: ScenarioConfig, run: int) -> DailyRunResult:
    return simulate_daily(cfg, run, cfg.seed + run)


# --- repetition orchestration ---

@dataclass
class ExperimentResult:
    tables: TableSet
    seeds: list[int]
    daily_runs: list[DailyRunResult] = field(default_factory=list)


def _flash_worker(args: tuple[ScenarioConfig, int]):
    return run_flash_rep(*args)


def _daily_worker(args: tuple[ScenarioConfig, int]):
    return run_daily_rep(*args)


def run_experiment(cfg: ScenarioConfig, workers: int | None = None) -> ExperimentResult:
    """Run every repetition; results merge in repetition order regardless of
    completion order, so worker count never changes the artifacts."""
    reps = range(cfg.repetitions)
    seeds = [cfg.seed + r for r in reps]
    if workers is None:
        workers = min(cfg.repetitions, os.cpu_count() or 1)
    worker = _flash_worker if cfg.experiment == "flash_crowd" else _daily_worker
    jobs = [(cfg, r) for r in reps]
    if workers > 1 and cfg.repetitions > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(worker, jobs))
    else:
        results = [worker(job) for job in jobs]

    tables = TableSet()
    daily_runs: list[DailyRunResult] = []
    if cfg.experiment == "flash_crowd":
        for rows in results:
            tables.rtt_rows.extend(rows)
    else:
        for result in results:
            daily_runs.append(result)
            tables.migration_rows.extend(result.migration_rows)
            tables.downtime_rows.extend(result.downtime_rows)
    return ExperimentResult(tables=tables, seeds=seeds, daily_runs=daily_runs)
