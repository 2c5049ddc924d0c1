"""Exception types shared across the simulator."""


class EdgePoolError(Exception):
    """Base class for all simulator errors."""


# --- event engine ---

class SchedulingInPast(EdgePoolError):
    """An event was scheduled before the current simulation clock."""


class InvalidDistributionParams(EdgePoolError):
    """Distribution parameters outside their valid range (e.g. sigma < 0)."""


# --- broker / registration protocol ---

class AoiAlreadyClaimed(EdgePoolError):
    """A second MEC host tried to subscribe to an already claimed AoI."""


class AlreadyRegistered(EdgePoolError):
    """Vehicle attempted a second concurrent resource registration."""


class UnknownReward(EdgePoolError):
    """Registration referenced a reward id that was never offered."""


class OutsideAoi(EdgePoolError):
    """Vehicle is not inside the AoI of the reward it accepted."""


class NotRegistered(EdgePoolError):
    """Release requested for a vehicle with no active registration."""


# --- system level (app lifecycle) ---

class DuplicateRequest(EdgePoolError):
    """UE already has an app or an outstanding request."""


class NoSuchApp(EdgePoolError):
    """Termination requested for a UE that has no running app."""


# --- host level (pool / migration) ---

class DuplicateHost(EdgePoolError):
    """Vehicle added to a pool it is already part of."""


class NoCapacity(EdgePoolError):
    """No host in the pool can fit the requested resources."""


class UnknownHost(EdgePoolError):
    """Pool operation referenced a vehicle that is not pooled."""


class TargetFull(EdgePoolError):
    """Migration target cannot absorb the app; the scenario is mis-provisioned."""


# --- workload / fitting ---

class TooFewSamples(EdgePoolError):
    """Not enough samples to fit a distribution."""


class MissingHour(EdgePoolError):
    """An hour bucket has no observations to fit a rate from."""


# --- CLI / artifacts ---

class ConfigError(EdgePoolError):
    """Scenario configuration is malformed or out of range."""


class ParseError(EdgePoolError):
    """An input CSV row could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class MissingArtifact(EdgePoolError):
    """Expected artifact file absent from the artifact directory."""
