"""System level: UE-facing app lifecycle entry point and host selection.

UE requests travel to the system level in the core network, the orchestrator
picks the first MEC host whose AoI covers the UE (the evaluation scenarios
run a single host), and the chosen VIM allocates from its pool. App
instantiation itself costs no simulated time; only message legs do. A
request that cannot be placed is rejected, terminally; there is no queueing
or retry.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .domain import (
    AppDescriptor,
    AppInstance,
    AppStatus,
    LocalInfrastructure,
    UserEquipment,
    capacity_fits,
    inside_aoi,
)
from .engine import Engine
from .errors import DuplicateRequest, NoCapacity, NoSuchApp
from .mechost import HostLevel, MigrationRecord
from .messages import AppAddress, AppRejected, InstantiateApp
from .netdelay import DelayProfile, PathKind, one_way_us

SYSTEM_TARGET = "system"


class RequestStatus(Enum):
    PENDING = "pending"
    RUNNING = "running"
    REJECTED = "rejected"


class DeliveryScheme(Enum):
    CLOUD = "cloud"
    EDGE = "edge"
    FAR_EDGE = "far_edge"


@dataclass
class AppRequest:
    request_id: str
    ue_id: str
    descriptor: AppDescriptor
    issued_at: int
    status: RequestStatus = RequestStatus.PENDING
    instance_id: str | None = None


class SystemLevel:
    """Lifecycle proxy and orchestrator for one deployment."""

    def __init__(self, engine: Engine, profile: DelayProfile,
                 hosts: list[tuple[object, HostLevel]],
                 ues: dict[str, UserEquipment],
                 scheme: DeliveryScheme = DeliveryScheme.FAR_EDGE,
                 cloud: LocalInfrastructure | None = None,
                 notify_target: Callable[[str], str] | None = None):
        self.engine = engine
        self.profile = profile
        self.hosts = hosts  # (AreaOfInterest, HostLevel) pairs, selection order
        self.ues = ues
        self.scheme = scheme
        self.cloud = cloud
        self.requests: dict[str, AppRequest] = {}
        self.cloud_apps: dict[str, AppInstance] = {}
        self._by_ue: dict[str, AppRequest] = {}
        self._request_ids = itertools.count()
        self._instance_ids = itertools.count()
        self._notify_target = notify_target or (lambda ue_id: f"ue:{ue_id}")
        self.make_instance: Callable[[str, str, AppDescriptor], AppInstance] = (
            lambda iid, ue_id, desc: AppInstance(iid, ue_id, desc))
        engine.register(SYSTEM_TARGET, self.handle)

    # --- operations ---

    def request_app(self, ue_id: str, descriptor: AppDescriptor) -> AppRequest:
        ue = self.ues[ue_id]
        if ue.app_instance_id is not None:
            raise DuplicateRequest(f"{ue_id} already runs an app")
        outstanding = self._by_ue.get(ue_id)
        if outstanding is not None and outstanding.status is not RequestStatus.REJECTED:
            raise DuplicateRequest(f"{ue_id} already has a request")
        request = AppRequest(f"req-{next(self._request_ids):06d}", ue_id,
                             descriptor, self.engine.now)
        self.requests[request.request_id] = request
        self._by_ue[ue_id] = request
        delay = one_way_us(PathKind.UE_TO_CLOUD_APP, 0, self.profile)
        self.engine.schedule_in(delay, SYSTEM_TARGET,
                                InstantiateApp(request.request_id))
        return request

    def terminate_app(self, ue_id: str) -> None:
        ue = self.ues.get(ue_id)
        if ue is None or ue.app_instance_id is None:
            raise NoSuchApp(ue_id)
        instance_id = ue.app_instance_id
        if instance_id in self.cloud_apps:
            self._stop_cloud(self.cloud_apps[instance_id])
            return
        host = self._host_of_instance(instance_id)
        app = host.apps[instance_id]
        if app.status is AppStatus.MIGRATING:
            app.pending_termination = True  # applied once the migration lands
            return
        self._stop_pooled(app, host)

    # --- event handling ---

    def handle(self, payload) -> None:
        if isinstance(payload, InstantiateApp):
            self._instantiate(self.requests[payload.request_id])
        else:
            raise TypeError(f"system level cannot handle {payload!r}")

    def on_migration_complete(self, record: MigrationRecord) -> None:
        """AMS completion hook: deliver the new address, apply queued stops."""
        host = self._host_of_instance(record.instance_id)
        app = host.apps[record.instance_id]
        if app.pending_termination:
            self._stop_pooled(app, host)
            return
        ue = self.ues.get(app.owner_ue)
        if ue is not None:
            ue.app_instance_id = app.instance_id  # re-addressed to the new host

    # --- internals ---

    def _instantiate(self, request: AppRequest) -> None:
        ue = self.ues[request.ue_id]
        selected = None
        for aoi, host in self.hosts:
            if inside_aoi(ue.position, aoi):
                selected = host
                break
        if selected is None and self.scheme is not DeliveryScheme.CLOUD:
            self._reject(request)
            return
        instance_id = f"app-{next(self._instance_ids):06d}"
        app = self.make_instance(instance_id, request.ue_id, request.descriptor)
        try:
            host_id = self._place(selected, app)
        except NoCapacity:
            self._reject(request)
            return
        app.status = AppStatus.RUNNING
        request.status = RequestStatus.RUNNING
        request.instance_id = instance_id
        delay = one_way_us(PathKind.MEC_HOST_TO_UE, 0, self.profile)
        self.engine.schedule_in(delay, self._notify_target(request.ue_id),
                                AppAddress(request.ue_id, instance_id, host_id))

    def _place(self, host: HostLevel | None, app: AppInstance) -> str:
        required = app.descriptor.required
        if self.scheme is DeliveryScheme.CLOUD:
            if self.cloud is None:
                raise NoCapacity("no cloud datacenter configured")
            if not capacity_fits(required, self.cloud.available):
                raise NoCapacity("cloud datacenter exhausted")
            self.cloud.available = self.cloud.available - required
            self.cloud.apps.add(app.instance_id)
            app.placement = self.cloud.host_id
            self.cloud_apps[app.instance_id] = app
            return self.cloud.host_id
        if self.scheme is DeliveryScheme.EDGE:
            local = host.pool.local
            if not capacity_fits(required, local.available):
                raise NoCapacity("local infrastructure exhausted")
            local.available = local.available - required
            host.attach_app(app, local.host_id)
            return local.host_id
        host_id = host.allocate(required)
        host.attach_app(app, host_id)
        return host_id

    def _reject(self, request: AppRequest) -> None:
        request.status = RequestStatus.REJECTED
        delay = one_way_us(PathKind.MEC_HOST_TO_UE, 0, self.profile)
        self.engine.schedule_in(delay, self._notify_target(request.ue_id),
                                AppRejected(request.ue_id, request.request_id))

    def _host_of_instance(self, instance_id: str) -> HostLevel:
        for _, host in self.hosts:
            if instance_id in host.apps:
                return host
        raise NoSuchApp(instance_id)

    def _stop_pooled(self, app: AppInstance, host: HostLevel) -> None:
        host.release_app(app)
        self._finish_stop(app)

    def _stop_cloud(self, app: AppInstance) -> None:
        self.cloud.available = self.cloud.available + app.descriptor.required
        self.cloud.apps.discard(app.instance_id)
        self.cloud_apps.pop(app.instance_id, None)
        app.placement = None
        self._finish_stop(app)

    def _finish_stop(self, app: AppInstance) -> None:
        app.status = AppStatus.STOPPED
        ue = self.ues.get(app.owner_ue)
        if ue is not None and ue.app_instance_id == app.instance_id:
            ue.app_instance_id = None
        request = self._by_ue.get(app.owner_ue)
        if request is not None and request.instance_id == app.instance_id:
            del self._by_ue[app.owner_ue]  # the UE may request again
        self.engine.unregister(f"app:{app.instance_id}")
