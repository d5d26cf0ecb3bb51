import math

import numpy as np
import pytest

from pynomavlc.geometry import (
    Led,
    Room,
    Scenario,
    UserTerminal,
    build_scenario,
    channel_gain,
    channel_matrix,
    lambertian_order,
    place_leds_lattice,
    sample_users,
)
from pynomavlc.types import GeometryError


parameters = [
    (60.0, 1.0),  # cos 60 = 1/2
    (45.0, 2.0),  # cos^2 45 = 1/2
    (0.5, -1.0 / math.log2(math.cos(math.radians(0.5)))),
]


@pytest.mark.parametrize("case,expected", parameters)
def test_lambertian_order(case: float, expected: float):
    assert lambertian_order(case) == pytest.approx(expected)


def test_lambertian_order_narrow_beam():
    """Order grows without bound as the beam narrows."""
    assert lambertian_order(0.5) > 1000
    assert lambertian_order(89.9) < 0.2


@pytest.mark.parametrize("angle", [0.0, 90.0, -5.0, 120.0])
def test_lambertian_order_rejects_out_of_range(angle: float):
    with pytest.raises(GeometryError):
        lambertian_order(angle)


def test_gain_directly_below():
    """Hand evaluation of the LoS gain with a user right under the LED."""
    room = Room()
    led = Led((2.5, 2.5, room.height), 60.0)
    user = UserTerminal((2.5, 2.5, room.receiver_plane_height))
    d = room.height - room.receiver_plane_height
    expected = (
        2 * 1e-4 * 1.5**2 * 1.0 / (2 * math.pi * d**2 * math.sin(math.radians(85.0)) ** 2)
    )
    assert channel_gain(led, user) == pytest.approx(expected, rel=1e-12)


def test_gain_three_metres_below():
    assert channel_gain(Led((2.5, 2.5, 3.0)), UserTerminal((2.5, 2.5, 0.0))) == pytest.approx(
        8.02e-6, rel=1e-3
    )


def test_gain_inverse_square_directly_below():
    user = UserTerminal((2.5, 2.5, 0.0))
    near = channel_gain(Led((2.5, 2.5, 1.5)), user)
    far = channel_gain(Led((2.5, 2.5, 3.0)), user)
    assert far == pytest.approx(near / 4, rel=1e-12)


def test_gain_outside_fov_is_exactly_zero():
    led = Led((0.5, 0.5, 3.0))
    # incidence angle atan(3 / 2.15) is about 54 degrees
    user = UserTerminal((3.5, 0.5, 0.85), fov_semi_angle=30.0)
    assert channel_gain(led, user) == 0.0
    wide = UserTerminal((3.5, 0.5, 0.85), fov_semi_angle=85.0)
    assert channel_gain(led, wide) > 0.0


def test_gain_decreases_with_distance():
    led = Led((2.5, 2.5, 3.0))
    gains = [channel_gain(led, UserTerminal((2.5 + dx, 2.5, 0.85))) for dx in (0.0, 0.5, 1.0, 2.0)]
    assert all(a > b for a, b in zip(gains, gains[1:]))


def test_gain_coincident_points():
    with pytest.raises(GeometryError):
        channel_gain(Led((1.0, 1.0, 0.85)), UserTerminal((1.0, 1.0, 0.85)))


lattice_parameters = [
    (1, [(2.5, 2.5)]),
    (4, [(1.25, 1.25), (3.75, 1.25), (1.25, 3.75), (3.75, 3.75)]),
    (9, [(x, y) for y in (5 / 6, 2.5, 25 / 6) for x in (5 / 6, 2.5, 25 / 6)]),
]


@pytest.mark.parametrize("case,expected", lattice_parameters)
def test_led_lattice(case: int, expected: list):
    positions = place_leds_lattice(Room(), case)
    np.testing.assert_allclose([p[:2] for p in positions], expected)
    assert all(p[2] == 3.0 for p in positions)


@pytest.mark.parametrize("count", [0, 2, 3, 8])
def test_led_lattice_rejects_non_square(count: int):
    with pytest.raises(GeometryError):
        place_leds_lattice(Room(), count)


def test_sample_users_inside_room():
    room = Room()
    positions = sample_users(room, 500, np.random.default_rng(7))
    assert len(positions) == 500
    assert all(room.contains(p) and p[2] == room.receiver_plane_height for p in positions)


def test_sample_users_mean_is_room_centre():
    room = Room()
    positions = np.array(sample_users(room, 10_000, np.random.default_rng(0)))
    mean_x, mean_y, _ = positions.mean(axis=0)
    assert abs(mean_x - room.width / 2) <= 0.02 * room.width / 2
    assert abs(mean_y - room.depth / 2) <= 0.02 * room.depth / 2


def test_sample_no_users():
    assert sample_users(Room(), 0, np.random.default_rng(0)) == []


def test_room_validation():
    with pytest.raises(GeometryError):
        Room(height=0.5, receiver_plane_height=0.85)
    with pytest.raises(GeometryError):
        Room(width=-1.0)


def test_scenario_rejects_user_outside():
    room = Room()
    with pytest.raises(GeometryError):
        Scenario(room, (Led((2.5, 2.5, 3.0)),), (UserTerminal((6.0, 1.0, 0.85)),))


def test_build_scenario_is_seeded():
    room = Room()
    first = build_scenario(room, 4, 10, np.random.default_rng(3))
    second = build_scenario(room, 4, 10, np.random.default_rng(3))
    assert np.array_equal(first.user_positions, second.user_positions)
    assert first.led_positions.shape == (4, 3)


def test_channel_matrix_shape_and_binding_geometry():
    room = Room()
    leds = tuple(Led(p) for p in place_leds_lattice(room, 4))
    users = (UserTerminal((1.25, 1.25, 0.85)), UserTerminal((3.75, 3.75, 0.85)))
    H = channel_matrix(Scenario(room, leds, users))
    assert H.gains.shape == (2, 4)
    assert int(np.argmax(H.gains[0])) == 0
    assert int(np.argmax(H.gains[1])) == 3
    with pytest.raises(ValueError):
        H.gains[0, 0] = 1.0


def test_channel_matrix_rows_follow_user_order():
    scenario = build_scenario(Room(), 4, 6, np.random.default_rng(5))
    order = [3, 0, 5, 1, 4, 2]
    shuffled = Scenario(scenario.room, scenario.leds, tuple(scenario.users[i] for i in order))
    np.testing.assert_array_equal(channel_matrix(shuffled).gains, channel_matrix(scenario).gains[order])
