import json

import pytest

from edgepool.domain import ResourceCapacity, RewardOffer
from edgepool.messages import (
    ProbeRequest,
    RegisterResources,
    RegistrationAck,
    ResourceJoin,
    ResourceRelease,
    RewardCatalog,
    RewardQuery,
    from_wire,
    to_wire,
)

LEASE = ResourceCapacity(16_000_000, 1 << 30, 512 << 20)


@pytest.mark.parametrize("msg", [
    RewardQuery("veh-1", (12.5, -3.0)),
    RewardCatalog("veh-1", (RewardOffer("r-0", "aoi-1", 1.0),)),
    RegisterResources("veh-1", LEASE, "r-0"),
    RegistrationAck("veh-1", "aoi-1", "r-0", 123456),
    ResourceJoin("veh-1", LEASE),
    ResourceRelease("veh-1"),
    ProbeRequest("ue-1", "app-000001", 2_000_000, (1.0, 2.0)),
])
def test_wire_round_trip(msg):
    assert from_wire(to_wire(msg)) == msg


def test_wire_is_versioned_and_type_tagged():
    body = json.loads(to_wire(ResourceRelease("veh-9")))
    assert body["v"] == 1
    assert body["t"] == "ResourceRelease"
    assert body["vehicle_id"] == "veh-9"


def test_capacity_flattens_to_component_list():
    body = json.loads(to_wire(ResourceJoin("veh-1", LEASE)))
    assert body["leased"] == [16_000_000, 1 << 30, 512 << 20]


def test_wire_is_single_line_and_deterministic():
    msg = RegisterResources("veh-1", LEASE, "r-0")
    line = to_wire(msg)
    assert "\n" not in line
    assert line == to_wire(msg)


def test_unknown_type_rejected():
    with pytest.raises(ValueError):
        from_wire('{"v": 1, "t": "Nonsense"}')


def test_wrong_version_rejected():
    with pytest.raises(ValueError):
        from_wire('{"v": 2, "t": "ResourceRelease", "vehicle_id": "x"}')


def test_non_message_objects_are_not_encodable():
    with pytest.raises(TypeError):
        to_wire({"not": "a message"})
