import pytest

from edgepool.domain import (
    AppDescriptor,
    AreaOfInterest,
    FarEdgeHost,
    LocalInfrastructure,
    ResourceCapacity,
    Zone,
)
from edgepool.engine import Engine
from edgepool.mechost import HostLevel
from edgepool.netdelay import DelayProfile

AOI = AreaOfInterest("aoi-1", (Zone("z0", (0.0, 0.0), 500.0),))

APP = AppDescriptor("warning-zone", ResourceCapacity(1_000_000, 64 << 20, 16 << 20))

VEHICLE_LEASE = ResourceCapacity(16_000_000, 1 << 30, 512 << 20)

LOCAL_CAPACITY = ResourceCapacity(4_000_000_000, 128 << 30, 1024 << 30)


def make_vehicle(i: int, position=(0.0, 0.0),
                 lease: ResourceCapacity = VEHICLE_LEASE) -> FarEdgeHost:
    return FarEdgeHost(f"veh-{i:05d}", lease, lease, position)


def make_local(host_id: str = "local-0",
               capacity: ResourceCapacity = LOCAL_CAPACITY) -> LocalInfrastructure:
    return LocalInfrastructure(host_id, capacity, capacity)


@pytest.fixture
def engine() -> Engine:
    return Engine(seed=7)


@pytest.fixture
def host(engine) -> HostLevel:
    vehicles = {}
    level = HostLevel(engine, "mec-h-test", make_local(), DelayProfile(),
                      signalling_ms=1.0,
                      vehicle_lookup=lambda vid: vehicles[vid])
    level.test_vehicles = vehicles  # type: ignore[attr-defined]
    return level
