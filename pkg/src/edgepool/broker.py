"""Core-network broker: AoI subscriptions, reward offers, resource registry.

The broker maps each AoI to the single MEC host that claimed it, answers
vehicle reward queries, and forwards join/release notifications to the
owning host's VIM. It sits in the core network; since the architecture has
no broker-specific delay figure, its notification legs reuse the
vehicle-to-MEC-host path as an approximation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .domain import AreaOfInterest, Position, ResourceCapacity, RewardOffer, inside_aoi
from .engine import Engine
from .errors import (
    AlreadyRegistered,
    AoiAlreadyClaimed,
    NotRegistered,
    OutsideAoi,
    UnknownReward,
)
from .messages import (
    RegisterResources,
    RegistrationAck,
    ReleaseAck,
    ReleaseResources,
    ResourceJoin,
    ResourceRelease,
    RewardCatalog,
    RewardQuery,
)
from .netdelay import DelayProfile, PathKind, one_way_us

BROKER_TARGET = "broker"


@dataclass(frozen=True)
class AoiSubscription:
    aoi_id: str
    mec_host_id: str
    created_at: int


@dataclass(frozen=True)
class RegistrationRecord:
    vehicle_id: str
    aoi_id: str
    leased: ResourceCapacity
    accepted_reward: str
    registered_at: int


class Broker:
    """Publish-subscribe registry for far-edge resource pooling.

    position_of resolves a vehicle id to its current position, so the broker
    can enforce that registrations happen inside the accepted reward's AoI.
    """

    def __init__(self, engine: Engine, profile: DelayProfile,
                 position_of: Callable[[str], Position]):
        self._engine = engine
        self._profile = profile
        self._position_of = position_of
        self._aois: dict[str, AreaOfInterest] = {}
        self._offers: dict[str, list[RewardOffer]] = {}
        self._subscriptions: dict[str, AoiSubscription] = {}
        self._vim_targets: dict[str, str] = {}
        self._registrations: dict[str, RegistrationRecord] = {}
        self._reply_hook: Callable[[str, object], None] | None = None
        engine.register(BROKER_TARGET, self.handle)

    # --- wiring ---

    def set_rewards(self, aoi: AreaOfInterest, offers: list[RewardOffer]) -> None:
        self._aois[aoi.aoi_id] = aoi
        self._offers[aoi.aoi_id] = list(offers)

    def set_reply_hook(self, hook: Callable[[str, object], None]) -> None:
        """Install the scenario's delivery of broker replies back to vehicles."""
        self._reply_hook = hook

    # --- operations ---

    def subscribe_aoi(self, mec_host_id: str, aoi: AreaOfInterest,
                      vim_target: str) -> AoiSubscription:
        existing = self._subscriptions.get(aoi.aoi_id)
        if existing is not None:
            raise AoiAlreadyClaimed(
                f"{aoi.aoi_id} already claimed by {existing.mec_host_id}")
        sub = AoiSubscription(aoi.aoi_id, mec_host_id, self._engine.now)
        self._subscriptions[aoi.aoi_id] = sub
        self._vim_targets[aoi.aoi_id] = vim_target
        self._aois.setdefault(aoi.aoi_id, aoi)
        self._offers.setdefault(aoi.aoi_id, [])
        return sub

    def query_rewards(self, vehicle_id: str, position: Position) -> list[RewardOffer]:
        del vehicle_id  # queries are anonymous; offers depend on position only
        offers = []
        for aoi_id in sorted(self._aois):
            if inside_aoi(position, self._aois[aoi_id]):
                offers.extend(self._offers.get(aoi_id, []))
        return offers

    def register_resources(self, vehicle_id: str, leased: ResourceCapacity,
                           reward_id: str) -> RegistrationRecord:
        if vehicle_id in self._registrations:
            raise AlreadyRegistered(vehicle_id)
        if leased.is_zero():
            raise ValueError("lease must be non-zero in at least one component")
        offer = self._find_offer(reward_id)
        if offer is None:
            raise UnknownReward(reward_id)
        position = self._position_of(vehicle_id)
        if not inside_aoi(position, self._aois[offer.aoi_id]):
            raise OutsideAoi(f"{vehicle_id} outside {offer.aoi_id}")
        record = RegistrationRecord(vehicle_id, offer.aoi_id, leased, reward_id,
                                    self._engine.now)
        self._registrations[vehicle_id] = record
        self._notify_vim(offer.aoi_id, ResourceJoin(vehicle_id, leased))
        return record

    def release_resources(self, vehicle_id: str) -> ReleaseAck:
        record = self._registrations.pop(vehicle_id, None)
        if record is None:
            raise NotRegistered(vehicle_id)
        self._notify_vim(record.aoi_id, ResourceRelease(vehicle_id))
        return ReleaseAck(vehicle_id)

    # --- queries ---

    def registration_of(self, vehicle_id: str) -> RegistrationRecord | None:
        return self._registrations.get(vehicle_id)

    def registered_vehicles(self) -> set[str]:
        return set(self._registrations)

    # --- event handling ---

    def handle(self, payload) -> None:
        if isinstance(payload, RewardQuery):
            offers = self.query_rewards(payload.vehicle_id, payload.position)
            self._reply(payload.vehicle_id,
                        RewardCatalog(payload.vehicle_id, tuple(offers)))
        elif isinstance(payload, RegisterResources):
            record = self.register_resources(payload.vehicle_id, payload.leased,
                                             payload.reward_id)
            self._reply(payload.vehicle_id,
                        RegistrationAck(record.vehicle_id, record.aoi_id,
                                        record.accepted_reward,
                                        record.registered_at))
        elif isinstance(payload, ReleaseResources):
            ack = self.release_resources(payload.vehicle_id)
            self._reply(payload.vehicle_id, ack)
        else:
            raise TypeError(f"broker cannot handle {payload!r}")

    def _reply(self, vehicle_id: str, result) -> None:
        if self._reply_hook is not None:
            self._reply_hook(vehicle_id, result)

    def _find_offer(self, reward_id: str) -> RewardOffer | None:
        for offers in self._offers.values():
            for offer in offers:
                if offer.reward_id == reward_id:
                    return offer
        return None

    def _notify_vim(self, aoi_id: str, message) -> None:
        target = self._vim_targets.get(aoi_id)
        if target is None:
            raise LookupError(f"no VIM subscribed for {aoi_id}")
        delay = one_way_us(PathKind.VEHICLE_TO_MEC_HOST, 0, self._profile)
        self._engine.schedule_in(delay, target, message)
