"""Protocol and event messages, plus the wire form used by the trace log.

Every message is a dataclass; the wire form is one JSON object per line,
version-tagged (``"v": 1``) and type-tagged (``"t": <message name>``), with
capacities flattened to ``[cpu, ram, disk]`` and positions to ``[x, y]``.
The same encoding is used for the trace log, so conformance tests can
assert on wire-visible content directly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, is_dataclass

from .domain import ResourceCapacity, RewardOffer

WIRE_VERSION = 1


# --- broker registration protocol (vehicle <-> broker <-> VIM) ---

@dataclass(frozen=True)
class RewardQuery:
    vehicle_id: str
    position: tuple[float, float]


@dataclass(frozen=True)
class RewardCatalog:
    vehicle_id: str
    offers: tuple[RewardOffer, ...]


@dataclass(frozen=True)
class RegisterResources:
    vehicle_id: str
    leased: ResourceCapacity
    reward_id: str


@dataclass(frozen=True)
class RegistrationAck:
    vehicle_id: str
    aoi_id: str
    reward_id: str
    registered_at: int


@dataclass(frozen=True)
class ReleaseResources:
    vehicle_id: str


@dataclass(frozen=True)
class ReleaseAck:
    vehicle_id: str


@dataclass(frozen=True)
class ResourceJoin:
    vehicle_id: str
    leased: ResourceCapacity


@dataclass(frozen=True)
class ResourceRelease:
    vehicle_id: str


# --- app lifecycle (UE <-> system level <-> host level) ---

@dataclass(frozen=True)
class InstantiateApp:
    request_id: str


@dataclass(frozen=True)
class AppAddress:
    ue_id: str
    instance_id: str
    host_id: str


@dataclass(frozen=True)
class AppRejected:
    ue_id: str
    request_id: str


# --- UE probes ---

@dataclass(frozen=True)
class ProbeTimer:
    ue_id: str


@dataclass(frozen=True)
class ProbeRequest:
    ue_id: str
    instance_id: str
    sent_at: int
    position: tuple[float, float]


@dataclass(frozen=True)
class ProbeReply:
    ue_id: str
    instance_id: str
    sent_at: int
    zone_alert: bool


# --- migration procedure (host level internal) ---

@dataclass(frozen=True)
class MigrationStateArrival:
    instance_id: str


@dataclass(frozen=True)
class MigrationComplete:
    instance_id: str


# --- workload arrivals (scenario driver) ---

@dataclass(frozen=True)
class VehicleArrival:
    vehicle_id: str


@dataclass(frozen=True)
class VehicleDeparture:
    vehicle_id: str


@dataclass(frozen=True)
class UeArrival:
    ue_id: str


_MESSAGE_TYPES = {
    cls.__name__: cls
    for cls in (
        RewardQuery, RewardCatalog, RegisterResources, RegistrationAck,
        ReleaseResources, ReleaseAck, ResourceJoin, ResourceRelease,
        InstantiateApp, AppAddress, AppRejected,
        ProbeTimer, ProbeRequest, ProbeReply,
        MigrationStateArrival, MigrationComplete,
        VehicleArrival, VehicleDeparture, UeArrival,
    )
}


def _encode_value(value):
    if isinstance(value, ResourceCapacity):
        return [value.cpu, value.ram, value.disk]
    if isinstance(value, RewardOffer):
        return {"reward_id": value.reward_id, "aoi_id": value.aoi_id,
                "value": value.value}
    if isinstance(value, tuple):
        return [_encode_value(v) for v in value]
    return value


def _decode_value(ann: str, value):
    if ann == "ResourceCapacity":
        return ResourceCapacity(*value)
    if ann == "tuple[RewardOffer, ...]":
        return tuple(RewardOffer(**item) for item in value)
    if ann.startswith("tuple["):
        return tuple(value)
    return value


def to_wire(msg) -> str:
    """Serialize a message to its single-line wire form."""
    if not is_dataclass(msg) or type(msg).__name__ not in _MESSAGE_TYPES:
        raise TypeError(f"not a wire message: {msg!r}")
    body = {"v": WIRE_VERSION, "t": type(msg).__name__}
    for f in fields(msg):
        body[f.name] = _encode_value(getattr(msg, f.name))
    return json.dumps(body, sort_keys=True, separators=(",", ":"))


def from_wire(line: str):
    """Parse one wire line back into its message dataclass."""
    body = json.loads(line)
    if body.get("v") != WIRE_VERSION:
        raise ValueError(f"unsupported wire version {body.get('v')!r}")
    cls = _MESSAGE_TYPES.get(body.get("t", ""))
    if cls is None:
        raise ValueError(f"unknown message type {body.get('t')!r}")
    kwargs = {}
    for f in fields(cls):
        kwargs[f.name] = _decode_value(f.type, body[f.name])
    return cls(**kwargs)
