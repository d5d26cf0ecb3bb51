from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, NamedTuple, Optional, Tuple

import numpy as np


Position = Tuple[float, float, float]  # (x, y, z) in metres

UNASSIGNED = -1  # idle data subcarrier in an AllocationMatrix


class Scheme(str, Enum):
    IMPOSED = "imposed"
    NOT_IMPOSED = "not-imposed"


class SchemeChoice(str, Enum):
    IMPOSED = "imposed"
    NOT_IMPOSED = "not-imposed"
    BOTH = "both"

    @property
    def schemes(self) -> Tuple[Scheme, ...]:
        if self is SchemeChoice.BOTH:
            return (Scheme.IMPOSED, Scheme.NOT_IMPOSED)
        return (Scheme(self.value),)


class Optimizer(str, Enum):
    SA = "sa"
    TS = "ts"


class SweepVariable(str, Enum):
    USERS = "users"
    LEDS = "leds"
    SUBCARRIERS = "subcarriers"
    POWER = "power"
    LED_ANGLE = "led-angle"
    FOV = "fov"
    HEIGHT = "height"

    @property
    def field_name(self) -> str:
        """Name of the ExperimentConfig field this sweep overrides."""
        return {
            SweepVariable.USERS: "users",
            SweepVariable.LEDS: "leds",
            SweepVariable.SUBCARRIERS: "subcarriers",
            SweepVariable.POWER: "power_dbm",
            SweepVariable.LED_ANGLE: "led_semi_angle",
            SweepVariable.FOV: "fov_semi_angle",
            SweepVariable.HEIGHT: "room_height",
        }[self]


class NomaVLCException(Exception):
    """Base class for every error raised by pynomavlc."""


class ConfigurationError(NomaVLCException):
    """Raised when an experiment or physics configuration is invalid."""


class GeometryError(NomaVLCException):
    """Raised for impossible room, LED or terminal geometry."""


class AllocationError(NomaVLCException):
    """Raised when an allocation, pair reference or power split is inconsistent."""


class PairingError(NomaVLCException):
    """Raised when users cannot be paired under the requested scheme."""


class ParityRepairError(NomaVLCException):
    """Raised when the binding repair runs out of iterations with odd LEDs left."""

    def __init__(self, binding: Binding, iterations: int) -> None:
        self.binding = binding
        self.iterations = iterations
        super().__init__(
            f"{binding.odd_leds} LED(s) still serve an odd number of users "
            f"after {iterations} iterations"
        )


class BisectionError(NomaVLCException):
    """Raised when the power-split bisection exceeds its iteration budget."""

    def __init__(self, bracket: Tuple[float, float], iterations: int) -> None:
        self.bracket = bracket
        self.iterations = iterations
        super().__init__(
            f"Bisection did not converge in {iterations} iterations; "
            f"last bracket [{bracket[0]!r}, {bracket[1]!r}]"
        )


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    """N x L line-of-sight gains; entry (j, i) is the gain from LED i to user j."""

    gains: np.ndarray

    def __post_init__(self) -> None:
        gains = np.array(self.gains, dtype=float, copy=True)
        if gains.ndim != 2:
            raise GeometryError("A channel matrix must be two dimensional")
        gains.setflags(write=False)
        object.__setattr__(self, "gains", gains)

    @property
    def n_users(self) -> int:
        return self.gains.shape[0]

    @property
    def n_leds(self) -> int:
        return self.gains.shape[1]

    def gain(self, user: int, led: int) -> float:
        return float(self.gains[user, led])


@dataclass(frozen=True)
class Binding:
    """Serving LED of every user."""

    assignment: Tuple[int, ...]
    n_leds: int
    # users with zero gain towards every LED; they can never get a nonzero rate
    unreachable: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        for led in self.assignment:
            if not 0 <= led < self.n_leds:
                raise AllocationError(f"LED index {led} out of range")

    @property
    def per_led_users(self) -> Tuple[Tuple[int, ...], ...]:
        buckets: list[list[int]] = [[] for _ in range(self.n_leds)]
        for user, led in enumerate(self.assignment):
            buckets[led].append(user)
        return tuple(tuple(users) for users in buckets)

    @property
    def counts(self) -> Tuple[int, ...]:
        return tuple(len(users) for users in self.per_led_users)

    @property
    def odd_leds(self) -> int:
        return sum(count % 2 for count in self.counts)

    def moved(self, user: int, led: int) -> Binding:
        """Returns a copy with `user` bound to `led`."""
        assignment = list(self.assignment)
        assignment[user] = led
        return Binding(tuple(assignment), self.n_leds, self.unreachable)


@dataclass(frozen=True)
class Pair:
    """A NOMA cluster of one LED. `weak` is None for a lone (not-imposed) user."""

    led: int
    index: int
    strong: int
    weak: Optional[int] = None

    @property
    def is_singleton(self) -> bool:
        return self.weak is None

    @property
    def users(self) -> Tuple[int, ...]:
        return (self.strong,) if self.weak is None else (self.strong, self.weak)


@dataclass(frozen=True)
class PairSet:
    per_led: Tuple[Tuple[Pair, ...], ...]
    scheme: Scheme
    n_users: int

    @property
    def n_leds(self) -> int:
        return len(self.per_led)

    @property
    def counts(self) -> Tuple[int, ...]:
        """Number of pairs per LED."""
        return tuple(len(pairs) for pairs in self.per_led)

    @property
    def pairs(self) -> Tuple[Pair, ...]:
        """All pairs, LED by LED."""
        return tuple(pair for pairs in self.per_led for pair in pairs)

    def __iter__(self) -> Iterator[Pair]:
        return iter(self.pairs)


@dataclass(frozen=True)
class PowerSplit:
    a_strong: float
    a_weak: float

    def __post_init__(self) -> None:
        if (
            not 0.0 <= self.a_strong <= 1.0
            or not 0.0 <= self.a_weak <= 1.0
            or self.a_strong + self.a_weak > 1.0 + 1e-12
        ):
            raise AllocationError(
                f"Invalid power split ({self.a_strong!r}, {self.a_weak!r})"
            )

    @classmethod
    def saturated(cls, a_strong: float) -> PowerSplit:
        return cls(a_strong, 1.0 - a_strong)

    @classmethod
    def singleton(cls) -> PowerSplit:
        return cls(1.0, 0.0)

    @classmethod
    def idle(cls) -> PowerSplit:
        """Split of a pair that holds no subcarrier; never used by the rate equations."""
        return cls(0.0, 0.0)


@dataclass(frozen=True, eq=False)
class AllocationMatrix:
    """L x K_d grid; each cell holds a pair index local to its LED or UNASSIGNED."""

    grid: np.ndarray

    def __post_init__(self) -> None:
        grid = np.array(self.grid, dtype=np.int64, copy=True)
        if grid.ndim != 2:
            raise AllocationError("An allocation grid must be two dimensional")
        grid.setflags(write=False)
        object.__setattr__(self, "grid", grid)

    @classmethod
    def empty(cls, n_leds: int, data_subcarriers: int) -> AllocationMatrix:
        return cls(np.full((n_leds, data_subcarriers), UNASSIGNED, dtype=np.int64))

    @property
    def n_leds(self) -> int:
        return self.grid.shape[0]

    @property
    def data_subcarriers(self) -> int:
        return self.grid.shape[1]

    @property
    def occupancy(self) -> np.ndarray:
        """S_{l_i,k}: True where LED i transmits on data subcarrier k."""
        return self.grid != UNASSIGNED

    @property
    def fingerprint(self) -> bytes:
        return self.grid.tobytes()

    def subcarriers_of(self, pair: Pair) -> np.ndarray:
        return self.grid[pair.led] == pair.index

    def with_cell(self, led: int, subcarrier: int, value: int) -> AllocationMatrix:
        grid = self.grid.copy()
        grid[led, subcarrier] = value
        return AllocationMatrix(grid)

    def validate(self, pairs: PairSet) -> None:
        if self.n_leds != pairs.n_leds:
            raise AllocationError(
                f"Allocation has {self.n_leds} LED rows, pair set has {pairs.n_leds}"
            )
        for led, count in enumerate(pairs.counts):
            row = self.grid[led]
            if np.any((row < UNASSIGNED) | (row >= count)):
                raise AllocationError(f"Row {led} references a pair outside 0..{count - 1}")


@dataclass(frozen=True)
class PenaltyParams:
    spread_limit: float = 0.2
    p1: float = 1e5
    p2: float = 10.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.spread_limit <= 1.0:
            raise ConfigurationError("spread_limit must lie in [0, 1]")
        if self.p1 < 0 or self.p2 < 0:
            raise ConfigurationError("Penalty weights must be non-negative")


@dataclass(frozen=True)
class SaParams:
    t0: float = 1.0
    alpha: float = 0.995
    m0: int = 50
    beta: float = 1.0005
    outer_iterations: int = 600
    time_limit: Optional[float] = None  # seconds

    def __post_init__(self) -> None:
        if self.t0 < 0:
            raise ConfigurationError("t0 must be non-negative")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigurationError("alpha must lie in (0, 1)")
        if self.beta < 1.0:
            raise ConfigurationError("beta must be at least 1")
        if self.m0 < 1 or self.outer_iterations < 0:
            raise ConfigurationError("m0 must be positive and outer_iterations non-negative")


@dataclass(frozen=True)
class TsParams:
    tabu_list_len: int = 10
    candidate_list_len: int = 4
    iterations: int = 8000
    time_limit: Optional[float] = None  # seconds

    def __post_init__(self) -> None:
        if self.tabu_list_len < 0 or self.candidate_list_len < 1 or self.iterations < 0:
            raise ConfigurationError("Invalid tabu search parameters")


@dataclass(frozen=True)
class RateReport:
    rates: Tuple[float, ...]  # bit/s, indexed by user
    splits: Tuple[PowerSplit, ...]  # aligned with PairSet.pairs
    f_cons: float
    f_diff: float
    objective: float  # O(X)
    penalized_objective: float  # O'(X)

    @property
    def min_rate(self) -> float:
        return min(self.rates, default=0.0)

    @property
    def max_rate(self) -> float:
        return max(self.rates, default=0.0)


class TracePoint(NamedTuple):
    evaluation: int
    objective: float
    best: float


@dataclass(frozen=True)
class SearchResult:
    allocation: AllocationMatrix
    report: RateReport
    trace: Tuple[TracePoint, ...] = field(default=(), repr=False)
    evaluations: int = 0
