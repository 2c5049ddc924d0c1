"""Core MEC entity model: capacities, hosts, apps, UEs, areas of interest."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from enum import Enum

Position = tuple[float, float]  # meters
Velocity = tuple[float, float]  # meters/second


@dataclass(frozen=True)
class ResourceCapacity:
    """Leasable resource vector: CPU instructions/second, RAM and disk bytes."""

    cpu: int
    ram: int
    disk: int

    def __post_init__(self):
        for name in ("cpu", "ram", "disk"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def __add__(self, other: "ResourceCapacity") -> "ResourceCapacity":
        return ResourceCapacity(self.cpu + other.cpu, self.ram + other.ram,
                                self.disk + other.disk)

    def __sub__(self, other: "ResourceCapacity") -> "ResourceCapacity":
        # A valid ledger never goes negative; treat it as a hard fault.
        return ResourceCapacity(self.cpu - other.cpu, self.ram - other.ram,
                                self.disk - other.disk)

    def is_zero(self) -> bool:
        return self.cpu == 0 and self.ram == 0 and self.disk == 0


ZERO_CAPACITY = ResourceCapacity(0, 0, 0)


def capacity_fits(required: ResourceCapacity, available: ResourceCapacity) -> bool:
    """True iff required <= available component-wise (boundary inclusive)."""
    return (required.cpu <= available.cpu
            and required.ram <= available.ram
            and required.disk <= available.disk)


@dataclass(frozen=True)
class Zone:
    """One gNB coverage area, modeled as a circle."""

    zone_id: str
    center: Position
    radius_m: float

    def contains(self, position: Position) -> bool:
        # Closed boundary: a point at exactly the radius is inside.
        return math.dist(position, self.center) <= self.radius_m


@dataclass(frozen=True)
class AreaOfInterest:
    aoi_id: str
    zones: tuple[Zone, ...]

    def __post_init__(self):
        if not self.zones:
            raise ValueError("an AoI needs at least one zone")


def inside_aoi(position: Position, aoi: AreaOfInterest) -> bool:
    return any(zone.contains(position) for zone in aoi.zones)


class HostStatus(Enum):
    OUTSIDE = "outside"
    NEGOTIATING = "negotiating"
    REGISTERED = "registered"
    RELEASING = "releasing"


class AppStatus(Enum):
    STARTING = "starting"
    RUNNING = "running"
    STOPPED = "stopped"
    MIGRATING = "migrating"


@dataclass
class FarEdgeHost:
    """A vehicle acting as remote virtualization infrastructure."""

    vehicle_id: str
    leased: ResourceCapacity
    available: ResourceCapacity
    position: Position
    status: HostStatus = HostStatus.OUTSIDE
    apps: set[str] = field(default_factory=set)


@dataclass
class LocalInfrastructure:
    """The MEC host's own (never released) virtualization infrastructure."""

    host_id: str
    capacity: ResourceCapacity
    available: ResourceCapacity
    apps: set[str] = field(default_factory=set)


@dataclass(frozen=True)
class AppDescriptor:
    app_type: str
    required: ResourceCapacity
    state_size: int = 30  # bytes

    def __post_init__(self):
        if self.state_size < 0:
            raise ValueError("state_size must be >= 0")


@dataclass
class AppInstance:
    """A stateful MEC application instance bound to one owner UE."""

    instance_id: str
    owner_ue: str
    descriptor: AppDescriptor
    placement: str | None = None  # host id while not stopped
    status: AppStatus = AppStatus.STARTING
    app_state: bytes = b""
    zone: Zone | None = None  # warning zone for geofencing app types
    last_inside: bool = False
    pending_termination: bool = False

    def set_state(self, state: bytes) -> None:
        if len(state) > self.descriptor.state_size:
            raise ValueError(
                f"state of {len(state)}B exceeds limit {self.descriptor.state_size}B")
        self.app_state = state


@dataclass
class UserEquipment:
    ue_id: str
    position: Position
    velocity: Velocity = (0.0, 0.0)
    app_instance_id: str | None = None
    probe_period_us: int | None = None


@dataclass(frozen=True)
class RewardOffer:
    reward_id: str
    aoi_id: str
    value: float

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("reward value must be >= 0")


# --- warning-zone app logic ---

_ZONE_STATE = struct.Struct("<?I")  # (inside flag, crossing count), 5 bytes


def zone_state(inside: bool, crossings: int) -> bytes:
    return _ZONE_STATE.pack(inside, crossings)


def zone_crossings(state: bytes) -> int:
    if len(state) != _ZONE_STATE.size:
        return 0
    return _ZONE_STATE.unpack(state)[1]


def update_zone_presence(app: AppInstance, position: Position) -> bool:
    """Feed a UE position to the warning-zone app.

    Returns True when the position crossed the zone boundary (enter or
    leave), which is exactly when the app notifies its user. The crossing
    count and current side live in the app's serialized state.
    """
    if app.zone is None:
        return False
    inside = app.zone.contains(position)
    crossed = inside != app.last_inside
    if crossed:
        app.last_inside = inside
        app.set_state(zone_state(inside, zone_crossings(app.app_state) + 1))
    return crossed
