from __future__ import annotations

from logging import getLogger
from typing import Tuple

import numpy as np

from .geometry import Scenario
from .types import Binding, ChannelMatrix, ConfigurationError, ParityRepairError


__all__ = ["bind_max_gain", "parity_cost", "repair_parity"]


logger = getLogger(__name__)


def bind_max_gain(H: ChannelMatrix) -> Binding:
    """Binds every user to its strongest LED; ties go to the lowest LED index."""
    if H.n_leds < 1:
        raise ConfigurationError("At least one LED is required")
    magnitudes = np.abs(H.gains)
    assignment = tuple(int(led) for led in np.argmax(magnitudes, axis=1))
    unreachable = tuple(int(u) for u in np.flatnonzero(~np.any(magnitudes > 0, axis=1)))
    if unreachable:
        logger.warning("Users %s see no LED; their rate will stay at zero", unreachable)
    return Binding(assignment, H.n_leds, unreachable)


def parity_cost(binding: Binding, scenario: Scenario) -> Tuple[int, float]:
    """
    Cost of a binding under the even-occupancy requirement.

    Returns:
        (violations, distance_cost): the number of LEDs serving an odd number of users,
        and the sum over users of distance-to-serving-LED / distance-to-farthest-LED.
    """
    leds = scenario.led_positions
    users = scenario.user_positions
    if len(users) == 0:
        return binding.odd_leds, 0.0
    distances = np.linalg.norm(users[:, None, :] - leds[None, :, :], axis=2)
    assigned = distances[np.arange(len(users)), np.asarray(binding.assignment)]
    farthest = distances.max(axis=1)
    return binding.odd_leds, float(np.sum(assigned / farthest))


def repair_parity(
    binding: Binding,
    scenario: Scenario,
    rng: np.random.Generator,
    max_iters: int = 1000,
) -> Tuple[Binding, int]:
    """
    Iterative greedy repair that leaves every LED with an even number of users.

    Each iteration moves a random user of a random occupied LED to another random LED
    and keeps the move unless the cost (violations first, then distance cost) gets
    worse. Stops at zero violations or after `max_iters` iterations.

    Returns:
        The repaired binding and the number of iterations used.
    Raises:
        ConfigurationError: the total number of users is odd.
        ParityRepairError: odd LEDs remain after `max_iters` iterations.
    """
    n_users = len(binding.assignment)
    if n_users % 2:
        raise ConfigurationError(
            f"{n_users} users can never be split into even groups; "
            "the imposed scheme needs an even user count"
        )
    cost = parity_cost(binding, scenario)
    iterations = 0
    if binding.n_leds < 2:
        return binding, iterations

    while cost[0] > 0 and iterations < max_iters:
        iterations += 1
        per_led = binding.per_led_users
        occupied = [led for led, users in enumerate(per_led) if users]
        source = occupied[rng.integers(len(occupied))]
        target = int(rng.integers(binding.n_leds - 1))
        if target >= source:
            target += 1
        user = per_led[source][rng.integers(len(per_led[source]))]

        candidate = binding.moved(user, target)
        candidate_cost = parity_cost(candidate, scenario)
        if candidate_cost <= cost:
            logger.debug(
                "Repair step %d: user %d LED %d -> %d, cost %s",
                iterations,
                user,
                source,
                target,
                candidate_cost,
            )
            binding, cost = candidate, candidate_cost

    if cost[0] > 0:
        raise ParityRepairError(binding, iterations)
    logger.debug("Binding repaired in %d iterations", iterations)
    return binding, iterations
