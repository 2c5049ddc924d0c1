"""Workload generators and the distribution-fitting tool.

Vehicle parking durations follow a normal distribution truncated at zero by
resampling (defaults fitted from real parking-garage traces); vehicle and UE
arrivals follow per-hour Poisson counts with arrival instants uniform within
the hour. Fitting inverts generation: sample moments for the normal, the
per-hour sample mean for the Poisson rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .domain import AreaOfInterest, Position, UserEquipment, Zone
from .engine import RngStream, US_PER_HOUR
from .errors import InvalidDistributionParams, MissingHour, TooFewSamples

# Occupancy fit from the parking-garage dataset (minutes).
DEFAULT_OCCUPANCY_MU = 202.80
DEFAULT_OCCUPANCY_SIGMA = 135.07


@dataclass(frozen=True)
class OccupancyModel:
    """Parking duration model: normal in minutes, resampled until > 0."""

    mu_minutes: float = DEFAULT_OCCUPANCY_MU
    sigma_minutes: float = DEFAULT_OCCUPANCY_SIGMA

    def __post_init__(self):
        if self.sigma_minutes < 0:
            raise InvalidDistributionParams("sigma must be >= 0")


@dataclass(frozen=True)
class HourlyRateTable:
    """Mean arrivals per hour of day; hours absent from the map rate 0."""

    rates: dict[int, float]
    capacity_scale: float = 1.0

    def __post_init__(self):
        for hour, rate in self.rates.items():
            if not 0 <= hour <= 23:
                raise ValueError(f"hour {hour} outside 0..23")
            if rate < 0:
                raise ValueError(f"rate for hour {hour} must be >= 0")
        if self.capacity_scale <= 0:
            raise ValueError("capacity_scale must be > 0")

    def rate(self, hour: int) -> float:
        return self.rates.get(hour % 24, 0.0)


@dataclass
class ParkingLot:
    """Bounded lot: arrivals while full are dropped (and counted)."""

    capacity: int
    occupants: int = 0
    dropped: int = 0

    def try_enter(self) -> bool:
        if self.occupants >= self.capacity:
            self.dropped += 1
            return False
        self.occupants += 1
        return True

    def leave(self) -> None:
        if self.occupants <= 0:
            raise ValueError("lot is already empty")
        self.occupants -= 1


def gen_occupancy(model: OccupancyModel, stream: RngStream) -> float:
    """Draw a positive parking duration in minutes."""
    while True:
        value = stream.normal(model.mu_minutes, model.sigma_minutes)
        if value > 0:
            return value


def gen_arrivals(table: HourlyRateTable, hour: int, stream: RngStream) -> list[int]:
    """Arrival offsets (microseconds) within the given hour, sorted.

    The count is Poisson with mean rate * capacity_scale; instants are
    uniform within the hour.
    """
    count = stream.poisson(table.rate(hour) * table.capacity_scale)
    offsets = [int(stream.uniform(0, US_PER_HOUR)) for _ in range(count)]
    offsets.sort()
    return offsets


def uniform_position_in_aoi(aoi: AreaOfInterest, stream: RngStream) -> Position:
    """Uniform position inside the AoI (zones weighted by area)."""
    weights = [zone.radius_m ** 2 for zone in aoi.zones]
    total = sum(weights)
    pick = stream.uniform(0.0, total)
    zone = aoi.zones[-1]
    acc = 0.0
    for z, w in zip(aoi.zones, weights):
        acc += w
        if pick <= acc:
            zone = z
            break
    r = zone.radius_m * math.sqrt(stream.uniform(0.0, 1.0))
    theta = stream.uniform(0.0, 2.0 * math.pi)
    return (zone.center[0] + r * math.cos(theta),
            zone.center[1] + r * math.sin(theta))


def spawn_flash_crowd(n_ues: int, aoi: AreaOfInterest, stream: RngStream,
                      probe_period_us: int | None = None,
                      id_prefix: str = "ue") -> list[UserEquipment]:
    """Create n UEs at uniform positions inside the AoI.

    The caller schedules their (simultaneous) app requests; the engine's
    FIFO tie-break dispatches them in creation order.
    """
    return [
        UserEquipment(
            ue_id=f"{id_prefix}-{i:05d}",
            position=uniform_position_in_aoi(aoi, stream),
            probe_period_us=probe_period_us,
        )
        for i in range(n_ues)
    ]


def ue_trajectory_step(ue: UserEquipment, dt_us: int) -> Position:
    """Linear-motion position after dt; the caller stores it if wanted."""
    if dt_us <= 0:
        raise ValueError("dt must be > 0")
    dt_s = dt_us / 1_000_000
    return (ue.position[0] + ue.velocity[0] * dt_s,
            ue.position[1] + ue.velocity[1] * dt_s)


# --- fitting (inverse of generation) ---

def fit_normal(samples: list[float]) -> tuple[float, float]:
    """Sample mean and population (n-denominator) standard deviation."""
    if len(samples) < 2:
        raise TooFewSamples(f"need >= 2 samples, got {len(samples)}")
    n = len(samples)
    mu = sum(samples) / n
    var = sum((x - mu) ** 2 for x in samples) / n
    return mu, math.sqrt(var)


def fit_poisson(counts_by_hour: dict[int, list[int]]) -> HourlyRateTable:
    """Per-hour Poisson MLE: the mean of that hour's daily counts."""
    rates: dict[int, float] = {}
    for hour in sorted(counts_by_hour):
        counts = counts_by_hour[hour]
        if not counts:
            raise MissingHour(f"hour {hour} has no counts")
        rates[hour] = sum(counts) / len(counts)
    return HourlyRateTable(rates=rates)
