"""Discrete-event engine: event queue, simulation clock, named RNG streams.

Simulation time is an integer count of microseconds since simulation start.
Integer time keeps event ordering and repeated runs exactly reproducible;
handler code runs in zero simulated time, so the clock only moves between
events.
"""

from __future__ import annotations

import hashlib
import heapq
import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidDistributionParams, SchedulingInPast

SimTime = int  # microseconds

US_PER_MS = 1_000
US_PER_SECOND = 1_000_000
US_PER_MINUTE = 60 * US_PER_SECOND
US_PER_HOUR = 3_600 * US_PER_SECOND


def ms_to_us(ms: float) -> SimTime:
    return int(round(ms * US_PER_MS))


def us_to_ms(us: SimTime) -> float:
    return us / US_PER_MS


def minutes_to_us(minutes: float) -> SimTime:
    return int(round(minutes * US_PER_MINUTE))


def hour_of_day(t: SimTime) -> int:
    return (t // US_PER_HOUR) % 24


# --- distribution specs (parameters for RngStream.draw) ---

@dataclass(frozen=True)
class Normal:
    mu: float
    sigma: float


@dataclass(frozen=True)
class Poisson:
    rate: float


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float


class RngStream:
    """One named, independently seeded random stream.

    The same (seed, stream_id) pair always yields the same draw sequence,
    and draws on one stream never disturb another's sequence.
    """

    def __init__(self, seed: int, stream_id: str):
        self.seed = seed
        self.stream_id = stream_id
        digest = hashlib.blake2b(stream_id.encode("utf-8"), digest_size=8).digest()
        key = int.from_bytes(digest, "big")
        self._gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(entropy=(seed, key)))
        )

    def normal(self, mu: float, sigma: float) -> float:
        if sigma < 0:
            raise InvalidDistributionParams(f"sigma must be >= 0, got {sigma}")
        return float(self._gen.normal(mu, sigma))

    def poisson(self, rate: float) -> int:
        if rate < 0:
            raise InvalidDistributionParams(f"rate must be >= 0, got {rate}")
        return int(self._gen.poisson(rate))

    def uniform(self, low: float, high: float) -> float:
        if high < low:
            raise InvalidDistributionParams(f"need low <= high, got [{low}, {high}]")
        return float(self._gen.uniform(low, high))

    def draw(self, dist) -> float:
        if isinstance(dist, Normal):
            return self.normal(dist.mu, dist.sigma)
        if isinstance(dist, Poisson):
            return float(self.poisson(dist.rate))
        if isinstance(dist, Uniform):
            return self.uniform(dist.low, dist.high)
        raise InvalidDistributionParams(f"unknown distribution spec {dist!r}")


class Randomness:
    """Registry of named RNG streams under one base seed."""

    def __init__(self, seed: int):
        self.seed = seed
        self._streams: dict[str, RngStream] = {}

    def stream(self, stream_id: str) -> RngStream:
        st = self._streams.get(stream_id)
        if st is None:
            st = RngStream(self.seed, stream_id)
            self._streams[stream_id] = st
        return st


@dataclass(frozen=True)
class SimEvent:
    fire_at: SimTime
    seq: int  # insertion counter; (fire_at, seq) is the total dispatch order
    target: str
    payload: object


class Engine:
    """Single-threaded event loop with a stable FIFO tie-break.

    Handlers are registered under string targets; events carry a payload
    message for exactly one target. Handlers may schedule follow-up events,
    including at the current time.
    """

    def __init__(self, seed: int = 0):
        self.now: SimTime = 0
        self.rng = Randomness(seed)
        self._heap: list[tuple[SimTime, int, SimEvent]] = []
        self._counter = itertools.count()
        self._handlers: dict[str, Callable[[object], None]] = {}
        self.dispatch_hook: Callable[[SimEvent], None] | None = None

    def register(self, target: str, handler: Callable[[object], None]) -> None:
        self._handlers[target] = handler

    def unregister(self, target: str) -> None:
        self._handlers.pop(target, None)

    def schedule(self, fire_at: SimTime, target: str, payload: object) -> SimEvent:
        if fire_at < self.now:
            raise SchedulingInPast(f"fire_at={fire_at} < now={self.now}")
        event = SimEvent(fire_at, next(self._counter), target, payload)
        heapq.heappush(self._heap, (event.fire_at, event.seq, event))
        return event

    def schedule_in(self, delay_us: SimTime, target: str, payload: object) -> SimEvent:
        return self.schedule(self.now + delay_us, target, payload)

    def run_until(self, t_end: SimTime) -> int:
        """Dispatch every event with fire_at <= t_end; the clock ends at t_end."""
        dispatched = 0
        while self._heap and self._heap[0][0] <= t_end:
            _, _, event = heapq.heappop(self._heap)
            self.now = event.fire_at
            if self.dispatch_hook is not None:
                self.dispatch_hook(event)
            handler = self._handlers.get(event.target)
            if handler is None:
                raise LookupError(f"no handler registered for target {event.target!r}")
            handler(event.payload)
            dispatched += 1
        if t_end > self.now:
            self.now = t_end
        return dispatched

    def pending(self) -> int:
        return len(self._heap)
