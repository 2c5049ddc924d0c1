"""Parametric latency model for the three service-delivery paths.

Every path is a fixed list of one-way segments taken from a DelayProfile;
there is no queueing or contention, so delays are load-independent and a
round trip is exactly twice the one-way latency. Device-to-device traffic
(UE to an app running on a vehicle) is always relayed by the gNB, which is
why the far-edge path is two radio hops.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .engine import RngStream, ms_to_us


@dataclass(frozen=True)
class DelayProfile:
    """One-way per-segment latencies in milliseconds.

    The defaults are calibrated so that, round trip, the far-edge path costs
    half the cloud path and 3 ms more than the edge path. jitter_ms, when
    non-zero, adds a uniform +-jitter term per segment, but only for calls
    that supply an RNG stream; analytic callers always get the mean.
    """

    radio_ms: float = 2.0   # UE/vehicle <-> gNB
    edge_ms: float = 0.5    # gNB <-> MEC host
    core_ms: float = 5.5    # MEC host <-> cloud datacenter
    per_byte_ms: float = 0.0
    jitter_ms: float = 0.0

    def __post_init__(self):
        for name in ("radio_ms", "edge_ms", "core_ms", "per_byte_ms", "jitter_ms"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


DEFAULT_PROFILE = DelayProfile()


class PathKind(Enum):
    UE_TO_CLOUD_APP = "ue_to_cloud_app"
    UE_TO_EDGE_APP = "ue_to_edge_app"
    UE_TO_FAR_EDGE_APP = "ue_to_far_edge_app"
    VEHICLE_TO_MEC_HOST = "vehicle_to_mec_host"
    MEC_HOST_TO_UE = "mec_host_to_ue"
    MEC_HOST_TO_VEHICLE = "mec_host_to_vehicle"


_SEGMENTS: dict[PathKind, tuple[str, ...]] = {
    PathKind.UE_TO_CLOUD_APP: ("radio_ms", "edge_ms", "core_ms"),
    PathKind.UE_TO_EDGE_APP: ("radio_ms", "edge_ms"),
    PathKind.UE_TO_FAR_EDGE_APP: ("radio_ms", "radio_ms"),  # UE -> gNB -> vehicle
    PathKind.VEHICLE_TO_MEC_HOST: ("radio_ms", "edge_ms"),
    PathKind.MEC_HOST_TO_UE: ("edge_ms", "radio_ms"),
    PathKind.MEC_HOST_TO_VEHICLE: ("edge_ms", "radio_ms"),
}


def one_way(path: PathKind, size_bytes: int = 0,
            profile: DelayProfile = DEFAULT_PROFILE,
            rng: RngStream | None = None) -> float:
    """One-way latency in ms: segment sum plus size * per_byte."""
    total = 0.0
    for segment in _SEGMENTS[path]:
        total += getattr(profile, segment)
        if rng is not None and profile.jitter_ms > 0.0:
            total += rng.uniform(-profile.jitter_ms, profile.jitter_ms)
    return total + size_bytes * profile.per_byte_ms


def rtt(path: PathKind, size_bytes: int = 0,
        profile: DelayProfile = DEFAULT_PROFILE,
        rng: RngStream | None = None) -> float:
    """Round-trip latency in ms: twice the one-way latency."""
    return 2.0 * one_way(path, size_bytes, profile, rng)


def one_way_us(path: PathKind, size_bytes: int = 0,
               profile: DelayProfile = DEFAULT_PROFILE,
               rng: RngStream | None = None) -> int:
    """One-way latency rounded to engine microseconds."""
    return ms_to_us(one_way(path, size_bytes, profile, rng))
