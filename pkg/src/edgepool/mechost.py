"""Host level: VIM resource pool, Round-Robin placement, app migration.

The VIM manages one local infrastructure plus an ordered list of pooled
vehicles. Placement scans the vehicle list round-robin from a cursor,
skipping hosts that cannot fit the request; the local infrastructure only
takes an app when no vehicle fits. When a vehicle releases its resources,
every app it hosts migrates to the local infrastructure (never to another
vehicle, which would just re-trigger migrations when that vehicle leaves).

A migration's downtime runs from the app shutdown on the vehicle to the
moment the UE learns the new location: state transfer leg, zero-time
re-instantiation, then the mobility-service notification leg. Each leg
additionally pays a fixed signalling overhead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .domain import (
    AppInstance,
    AppStatus,
    FarEdgeHost,
    HostStatus,
    LocalInfrastructure,
    ResourceCapacity,
    capacity_fits,
)
from .engine import Engine, RngStream, ms_to_us
from .errors import DuplicateHost, NoCapacity, TargetFull, UnknownHost
from .messages import MigrationComplete, MigrationStateArrival, ResourceJoin, ResourceRelease
from .netdelay import DelayProfile, PathKind, one_way_us


@dataclass(frozen=True)
class MigrationRecord:
    instance_id: str
    from_host: str
    to_host: str
    shutdown_at: int
    ue_notified_at: int
    state_bytes: int

    @property
    def downtime_us(self) -> int:
        return self.ue_notified_at - self.shutdown_at


@dataclass
class ResourcePool:
    local: LocalInfrastructure
    remote: list[FarEdgeHost]
    rr_cursor: int = 0

    def size(self) -> int:
        return 1 + len(self.remote)

    def find_remote(self, vehicle_id: str) -> FarEdgeHost | None:
        for host in self.remote:
            if host.vehicle_id == vehicle_id:
                return host
        return None


class RoundRobinScheduler:
    """Cyclic scan from the pool cursor; first fitting vehicle wins."""

    def select(self, pool: ResourcePool, required: ResourceCapacity) -> FarEdgeHost | None:
        n = len(pool.remote)
        for step in range(n):
            idx = (pool.rr_cursor + step) % n
            host = pool.remote[idx]
            if capacity_fits(required, host.available):
                pool.rr_cursor = (idx + 1) % n
                return host
        return None


class HostLevel:
    """VIM plus the migration-side platform roles for one MEC host."""

    def __init__(self, engine: Engine, host_id: str,
                 local: LocalInfrastructure, profile: DelayProfile,
                 signalling_ms: float = 1.0,
                 vehicle_lookup: Callable[[str], FarEdgeHost] | None = None,
                 scheduler: RoundRobinScheduler | None = None,
                 allow_local_fallback: bool = True,
                 jitter_rng: RngStream | None = None):
        self.engine = engine
        self.host_id = host_id
        self.pool = ResourcePool(local=local, remote=[])
        self.profile = profile
        self.signalling_us = ms_to_us(signalling_ms)
        self.scheduler = scheduler or RoundRobinScheduler()
        self.allow_local_fallback = allow_local_fallback
        self.apps: dict[str, AppInstance] = {}
        self.migrations: list[MigrationRecord] = []
        self.on_migration_complete: Callable[[MigrationRecord], None] | None = None
        self._vehicle_lookup = vehicle_lookup
        self._jitter_rng = jitter_rng
        self._in_flight: dict[str, MigrationRecord] = {}
        engine.register(self.vim_target, self.handle)

    @property
    def vim_target(self) -> str:
        return f"vim:{self.host_id}"

    # --- pool membership ---

    def add_remote(self, vehicle: FarEdgeHost) -> int:
        if self.pool.find_remote(vehicle.vehicle_id) is not None:
            raise DuplicateHost(vehicle.vehicle_id)
        self.pool.remote.append(vehicle)
        return self.pool.size()

    def remove_remote(self, vehicle_id: str) -> list[MigrationRecord]:
        pool = self.pool
        idx = next((i for i, h in enumerate(pool.remote)
                    if h.vehicle_id == vehicle_id), None)
        if idx is None:
            raise UnknownHost(vehicle_id)
        host = pool.remote.pop(idx)
        # Cursor repair: keep pointing at the successor of whatever was next.
        if idx < pool.rr_cursor:
            pool.rr_cursor -= 1
        if pool.rr_cursor >= len(pool.remote):
            pool.rr_cursor = 0
        records = [self._migrate(self.apps[iid], host, pool.local)
                   for iid in sorted(host.apps)]
        host.status = HostStatus.OUTSIDE
        return records

    # --- placement ---

    def allocate(self, required: ResourceCapacity) -> str:
        """Pick a host for the requested resources and debit its ledger."""
        host = self.scheduler.select(self.pool, required)
        if host is not None:
            host.available = host.available - required
            return host.vehicle_id
        local = self.pool.local
        if self.allow_local_fallback and capacity_fits(required, local.available):
            local.available = local.available - required
            return local.host_id
        raise NoCapacity(f"nothing in the pool fits {required}")

    def attach_app(self, app: AppInstance, host_id: str) -> None:
        """Bind an app to the host the allocation chose (same event turn)."""
        app.placement = host_id
        self._host_apps(host_id).add(app.instance_id)
        self.apps[app.instance_id] = app

    def release_app(self, app: AppInstance) -> None:
        """Return an app's resources to its host (termination path)."""
        host_id = app.placement
        if host_id is None:
            return
        self._host_apps(host_id).discard(app.instance_id)
        self._credit(host_id, app.descriptor.required)
        app.placement = None
        self.apps.pop(app.instance_id, None)

    # --- migration ---

    def migrate(self, app: AppInstance, target: LocalInfrastructure) -> MigrationRecord:
        source_id = app.placement
        source = self.pool.find_remote(source_id) if source_id else None
        if source is None:
            raise UnknownHost(f"{app.instance_id} is not running on a pooled vehicle")
        return self._migrate(app, source, target)

    def _migrate(self, app: AppInstance, source: FarEdgeHost,
                 target: LocalInfrastructure) -> MigrationRecord:
        now = self.engine.now
        # (a) shutdown on the vehicle: the app leaves its ledger immediately.
        source.apps.discard(app.instance_id)
        source.available = source.available + app.descriptor.required
        app.placement = None
        app.status = AppStatus.MIGRATING
        # (b) serialized state travels vehicle -> MEC host, (d) the mobility
        # service tells the UE the new location; both legs pay signalling.
        state_leg = one_way_us(PathKind.VEHICLE_TO_MEC_HOST, len(app.app_state),
                               self.profile, self._jitter_rng) + self.signalling_us
        notify_leg = one_way_us(PathKind.MEC_HOST_TO_UE, 0,
                                self.profile, self._jitter_rng) + self.signalling_us
        record = MigrationRecord(
            instance_id=app.instance_id,
            from_host=source.vehicle_id,
            to_host=target.host_id,
            shutdown_at=now,
            ue_notified_at=now + state_leg + notify_leg,
            state_bytes=len(app.app_state),
        )
        self._in_flight[app.instance_id] = record
        self.engine.schedule(now + state_leg, self.vim_target,
                             MigrationStateArrival(app.instance_id))
        self.engine.schedule(record.ue_notified_at, self.vim_target,
                             MigrationComplete(app.instance_id))
        return record

    # --- event handling ---

    def handle(self, payload) -> None:
        if isinstance(payload, ResourceJoin):
            if self._vehicle_lookup is None:
                raise LookupError("no vehicle lookup wired into the VIM")
            vehicle = self._vehicle_lookup(payload.vehicle_id)
            self.add_remote(vehicle)
        elif isinstance(payload, ResourceRelease):
            self.remove_remote(payload.vehicle_id)
        elif isinstance(payload, MigrationStateArrival):
            self._migration_arrival(payload.instance_id)
        elif isinstance(payload, MigrationComplete):
            self._migration_complete(payload.instance_id)
        else:
            raise TypeError(f"VIM cannot handle {payload!r}")

    def _migration_arrival(self, instance_id: str) -> None:
        # (c) re-instantiation on the local infrastructure, zero compute time.
        app = self.apps[instance_id]
        local = self.pool.local
        if not capacity_fits(app.descriptor.required, local.available):
            raise TargetFull(f"local infrastructure cannot absorb {instance_id}")
        local.available = local.available - app.descriptor.required
        local.apps.add(instance_id)
        app.placement = local.host_id

    def _migration_complete(self, instance_id: str) -> None:
        app = self.apps[instance_id]
        record = self._in_flight.pop(instance_id)
        app.status = AppStatus.RUNNING
        self.migrations.append(record)
        if self.on_migration_complete is not None:
            self.on_migration_complete(record)

    # --- internals ---

    def _host_apps(self, host_id: str) -> set[str]:
        if host_id == self.pool.local.host_id:
            return self.pool.local.apps
        host = self.pool.find_remote(host_id)
        if host is None:
            raise UnknownHost(host_id)
        return host.apps

    def _credit(self, host_id: str, amount: ResourceCapacity) -> None:
        if host_id == self.pool.local.host_id:
            self.pool.local.available = self.pool.local.available + amount
            return
        host = self.pool.find_remote(host_id)
        if host is None:
            raise UnknownHost(host_id)
        host.available = host.available + amount
