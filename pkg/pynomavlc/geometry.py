from __future__ import annotations

import math
from dataclasses import dataclass
from logging import getLogger
from typing import List, Sequence, Tuple

import numpy as np

from .types import ChannelMatrix, GeometryError, Position


__all__ = [
    "Room",
    "Led",
    "UserTerminal",
    "Scenario",
    "lambertian_order",
    "place_leds_lattice",
    "sample_users",
    "channel_gain",
    "channel_matrix",
    "build_scenario",
    "distance",
]


logger = getLogger(__name__)


def lambertian_order(semi_angle_half: float) -> float:
    """Lambertian emission order m = -1 / log2(cos(phi_1/2)), angle in degrees."""
    if not 0.0 < semi_angle_half < 90.0:
        raise GeometryError(
            f"LED semi-angle must lie in (0, 90) degrees, got {semi_angle_half!r}"
        )
    return -1.0 / math.log2(math.cos(math.radians(semi_angle_half)))


@dataclass(frozen=True)
class Room:
    width: float = 5.0
    depth: float = 5.0
    height: float = 3.0  # ceiling height above the floor
    receiver_plane_height: float = 0.85

    def __post_init__(self) -> None:
        if min(self.width, self.depth, self.height, self.receiver_plane_height) <= 0:
            raise GeometryError("All room dimensions must be positive")
        if self.receiver_plane_height >= self.height:
            raise GeometryError(
                f"Receiver plane ({self.receiver_plane_height} m) must lie below "
                f"the ceiling ({self.height} m)"
            )

    def contains(self, position: Position) -> bool:
        """Whether the footprint of `position` lies inside the room."""
        x, y, _ = position
        return 0.0 <= x <= self.width and 0.0 <= y <= self.depth


@dataclass(frozen=True)
class Led:
    position: Position
    semi_angle_half: float = 60.0  # degrees

    def __post_init__(self) -> None:
        # validates the angle
        lambertian_order(self.semi_angle_half)

    @property
    def lambertian_order(self) -> float:
        return lambertian_order(self.semi_angle_half)


@dataclass(frozen=True)
class UserTerminal:
    """A photodiode receiver facing straight up."""

    position: Position
    fov_semi_angle: float = 85.0  # degrees
    pd_area: float = 1e-4  # m^2
    optical_filter_gain: float = 1.0
    refractive_index: float = 1.5

    def __post_init__(self) -> None:
        if not 0.0 < self.fov_semi_angle <= 90.0:
            raise GeometryError(
                f"FoV semi-angle must lie in (0, 90] degrees, got {self.fov_semi_angle!r}"
            )
        if self.pd_area <= 0:
            raise GeometryError("Photodiode area must be positive")
        if self.optical_filter_gain < 0 or self.refractive_index <= 0:
            raise GeometryError("Invalid optical filter gain or refractive index")


@dataclass(frozen=True)
class Scenario:
    """One realization: room, LED lattice and user placement."""

    room: Room
    leds: Tuple[Led, ...]
    users: Tuple[UserTerminal, ...]
    rng_seed: int = 0

    def __post_init__(self) -> None:
        for idx, user in enumerate(self.users):
            if not self.room.contains(user.position):
                raise GeometryError(f"User {idx} at {user.position} is outside the room")

    @property
    def led_positions(self) -> np.ndarray:
        return np.array([led.position for led in self.leds], dtype=float).reshape(-1, 3)

    @property
    def user_positions(self) -> np.ndarray:
        return np.array([user.position for user in self.users], dtype=float).reshape(-1, 3)


def place_leds_lattice(room: Room, count: int) -> List[Position]:
    """
    Puts `count` LEDs on the ceiling in a square lattice.

    The footprint is cut into sqrt(count) equal strips along each axis and an LED sits
    at the centre of every cell, so adjacent LEDs are equally spaced.
    """
    side = math.isqrt(count) if count > 0 else 0
    if count <= 0 or side * side != count:
        raise GeometryError(f"LED count must be a positive perfect square, got {count}")
    xs = [(2 * i + 1) * room.width / (2 * side) for i in range(side)]
    ys = [(2 * i + 1) * room.depth / (2 * side) for i in range(side)]
    return [(x, y, room.height) for y in ys for x in xs]


def sample_users(room: Room, count: int, rng: np.random.Generator) -> List[Position]:
    """Draws `count` positions uniformly over the room footprint, on the receiver plane."""
    if count <= 0:
        return []
    xs = rng.uniform(0.0, room.width, size=count)
    ys = rng.uniform(0.0, room.depth, size=count)
    z = room.receiver_plane_height
    return [(float(x), float(y), z) for x, y in zip(xs, ys)]


def distance(a: Position, b: Position) -> float:
    return math.dist(a, b)


def channel_gain(led: Led, user: UserTerminal) -> float:
    """Line-of-sight DC gain between an LED and a user."""
    d = distance(led.position, user.position)
    if d == 0.0:
        raise GeometryError(f"LED and user coincide at {led.position}")
    vertical = led.position[2] - user.position[2]
    if vertical <= 0.0:
        # the LED is not above the receiver plane
        return 0.0
    cos_psi = vertical / d
    psi = math.degrees(math.acos(min(1.0, cos_psi)))
    if psi > user.fov_semi_angle:
        return 0.0
    m = led.lambertian_order
    fov = math.radians(user.fov_semi_angle)
    # both axes are vertical, so the irradiance angle equals the incidence angle
    cos_phi = cos_psi
    return (
        (m + 1)
        * user.pd_area
        * user.refractive_index**2
        * user.optical_filter_gain
        / (2 * math.pi * d**2 * math.sin(fov) ** 2)
        * cos_phi**m
        * cos_psi
    )


def channel_matrix(scenario: Scenario) -> ChannelMatrix:
    gains = np.zeros((len(scenario.users), len(scenario.leds)), dtype=float)
    for j, user in enumerate(scenario.users):
        for i, led in enumerate(scenario.leds):
            gains[j, i] = channel_gain(led, user)
    return ChannelMatrix(gains)


def build_scenario(
    room: Room,
    led_count: int,
    user_count: int,
    rng: np.random.Generator,
    *,
    semi_angle_half: float = 60.0,
    terminal: UserTerminal = UserTerminal((0.0, 0.0, 0.0)),
    rng_seed: int = 0,
    led_positions: Sequence[Position] = (),
) -> Scenario:
    """
    Builds one realization.

    Args:
        room: The room
        led_count: Number of LEDs; must be a perfect square unless `led_positions` is given
        user_count: Number of users to draw
        rng: Generator used for the user placement
        semi_angle_half: LED semi-angle at half illumination, degrees
        terminal: Template receiver; only its device parameters are used
        rng_seed: Seed recorded on the scenario
        led_positions: Explicit LED positions overriding the lattice
    """
    positions = list(led_positions) or place_leds_lattice(room, led_count)
    leds = tuple(Led(pos, semi_angle_half) for pos in positions)
    users = tuple(
        UserTerminal(
            pos,
            fov_semi_angle=terminal.fov_semi_angle,
            pd_area=terminal.pd_area,
            optical_filter_gain=terminal.optical_filter_gain,
            refractive_index=terminal.refractive_index,
        )
        for pos in sample_users(room, user_count, rng)
    )
    logger.debug("Scenario with %d LEDs and %d users (seed %d)", len(leds), len(users), rng_seed)
    return Scenario(room, leds, users, rng_seed)
