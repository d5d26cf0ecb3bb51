import logging
import math
from collections import Counter

import numpy as np
import pytest

from pynomavlc import allocation
from pynomavlc.allocation import enumerate_solutions, evaluate, neighbor, random_solution
from pynomavlc.phy import E_OVER_2PI, LinkConfig, NoiseConfig
from pynomavlc.types import (
    UNASSIGNED,
    AllocationError,
    AllocationMatrix,
    ChannelMatrix,
    Pair,
    PairSet,
    PenaltyParams,
    Scheme,
)


LINK = LinkConfig()
SMALL_LINK = LinkConfig(noise=NoiseConfig(subcarrier_count=8))  # K_d = 3


def _pair_set(*per_led, n_users: int) -> PairSet:
    return PairSet(tuple(tuple(pairs) for pairs in per_led), Scheme.NOT_IMPOSED, n_users)


def _two_led_instance():
    """LED 0 serves two pairs, LED 1 one pair; every user sees both LEDs."""
    gains = np.array(
        [
            [1.8e-5, 3e-6],
            [1.4e-5, 2e-6],
            [7e-6, 1e-6],
            [5e-6, 2.5e-6],
            [2e-6, 1.5e-5],
            [1e-6, 6e-6],
        ]
    )
    pairs = _pair_set(
        [Pair(0, 0, 0, 2), Pair(0, 1, 1, 3)],
        [Pair(1, 0, 4, 5)],
        n_users=6,
    )
    return pairs, ChannelMatrix(gains)


def _reference_objective(X, pairs, H, link, penalty):
    """Scalar re-derivation of the rates, the power splits and the penalized objective."""
    scale = link.received_scale
    noise = link.noise_floor
    bw = link.subcarrier_bandwidth
    g = H.gains

    def interference(user, led, k):
        return sum(
            g[user, other] ** 2 * scale
            for other in range(X.n_leds)
            if other != led and X.grid[other, k] != UNASSIGNED
        )

    def rates(pair, a):
        held = [k for k in range(X.data_subcarriers) if X.grid[pair.led, k] == pair.index]
        h_s, h_w = g[pair.strong, pair.led], g[pair.weak, pair.led]
        r_s = r_w = 0.0
        for k in held:
            r_s += math.log2(1 + E_OVER_2PI * h_s**2 * scale * a / (interference(pair.strong, pair.led, k) + noise))
            r_w += math.log2(
                1
                + E_OVER_2PI * h_w**2 * scale * (1 - a)
                / (interference(pair.weak, pair.led, k) + h_s**2 * scale * a + noise)
            )
        return bw * r_s, bw * r_w

    user_rates = [0.0] * pairs.n_users
    for pair in pairs:
        lo, hi = 0.0, 1.0
        for _ in range(100):
            mid = (lo + hi) / 2
            r_s, r_w = rates(pair, mid)
            if r_s > r_w:
                hi = mid
            else:
                lo = mid
        user_rates[pair.strong], user_rates[pair.weak] = rates(pair, (lo + hi) / 2)

    f_min, f_max = min(user_rates), max(user_rates)
    f_cons = sum(r == 0 for r in user_rates) / len(user_rates)
    f_diff = (f_max - f_min) / f_max - penalty.spread_limit if f_max > 0 else 0.0
    return f_min - penalty.p1 * f_cons - penalty.p2 * max(0.0, f_diff)


def test_evaluate_matches_reference():
    pairs, H = _two_led_instance()
    penalty = PenaltyParams()
    rng = np.random.default_rng(3)
    for _ in range(10):
        X = random_solution(pairs, LINK.data_subcarriers, rng)
        report = evaluate(X, pairs, H, LINK, penalty)
        expected = _reference_objective(X, pairs, H, LINK, penalty)
        assert report.penalized_objective == pytest.approx(expected, rel=1e-6, abs=1e-3)


def test_all_users_silent():
    pairs, H = _two_led_instance()
    report = evaluate(AllocationMatrix.empty(2, 7), pairs, H, LINK)
    assert report.objective == 0.0
    assert report.f_cons == 1.0
    assert report.f_diff == 0.0
    assert report.penalized_objective == -1e5


def test_equal_rates_carry_no_penalty():
    H = ChannelMatrix(np.array([[1.5e-5], [5e-6]]))
    pairs = _pair_set([Pair(0, 0, 0, 1)], n_users=2)
    X = AllocationMatrix(np.array([[0, 0, -1, -1, -1, -1, -1]]))
    report = evaluate(X, pairs, H, LINK)
    assert report.f_cons == 0.0
    assert report.f_diff == pytest.approx(-0.2, abs=1e-5)
    assert report.penalized_objective == report.objective
    assert report.min_rate == report.objective
    assert report.max_rate == pytest.approx(report.objective, rel=1e-6)


def test_penalized_never_above_plain_objective():
    pairs, H = _two_led_instance()
    rng = np.random.default_rng(8)
    for _ in range(30):
        report = evaluate(random_solution(pairs, 7, rng), pairs, H, LINK)
        assert report.penalized_objective <= report.objective
        inactive = report.f_cons == 0 and report.f_diff <= 0
        assert (report.penalized_objective == report.objective) == inactive


def test_inverted_splits_are_logged(monkeypatch, caplog):
    pairs, H = _two_led_instance()
    X = AllocationMatrix(np.array([[0, 1, 0], [0, UNASSIGNED, UNASSIGNED]]))

    def inverted_splits(terms, params):
        return np.array([0.3, 0.7, 0.4]), np.array([0.7, 0.3, 0.6]), np.zeros(3, dtype=bool)

    monkeypatch.setattr(allocation, "solve_splits", inverted_splits)
    with caplog.at_level(logging.DEBUG, logger="pynomavlc.allocation"):
        evaluate(X, pairs, H, SMALL_LINK)
    assert "1 pair(s) give the weak user less power" in caplog.text


def test_evaluate_is_pure():
    pairs, H = _two_led_instance()
    X = random_solution(pairs, 7, np.random.default_rng(0))
    assert evaluate(X, pairs, H, LINK) == evaluate(X, pairs, H, LINK)


def test_evaluate_rejects_foreign_pair_index():
    pairs, H = _two_led_instance()
    X = AllocationMatrix(np.array([[0, 1, 2, -1, -1, -1, -1], [-1] * 7]))
    with pytest.raises(AllocationError):
        evaluate(X, pairs, H, LINK)


def test_random_solution():
    pairs = _pair_set([Pair(0, 0, 0, 1)], [], [Pair(2, 0, 2), Pair(2, 1, 3)], n_users=4)
    X = random_solution(pairs, 7, np.random.default_rng(4))
    assert X.grid.shape == (3, 7)
    assert np.all(X.grid[1] == UNASSIGNED)
    X.validate(pairs)
    same = random_solution(pairs, 7, np.random.default_rng(4))
    assert same.fingerprint == X.fingerprint


def test_random_solution_frequency():
    pairs = _pair_set([Pair(0, 0, 0, 1)], n_users=2)
    rng = np.random.default_rng(5)
    assigned = np.zeros(7)
    for _ in range(10_000):
        assigned += random_solution(pairs, 7, rng).grid[0] == 0
    assert np.all(np.abs(assigned / 10_000 - 0.5) < 0.02)


def test_neighbor_changes_exactly_one_cell():
    pairs, _ = _two_led_instance()
    rng = np.random.default_rng(6)
    X = random_solution(pairs, 7, rng)
    for _ in range(500):
        Y = neighbor(X, pairs, rng)
        assert np.count_nonzero(Y.grid != X.grid) == 1
        Y.validate(pairs)
        X = Y


def test_neighbor_single_pair_toggles():
    pairs = _pair_set([Pair(0, 0, 0, 1)], n_users=2)
    X = AllocationMatrix(np.array([[0, -1, 0]]))
    rng = np.random.default_rng(0)
    for _ in range(50):
        Y = neighbor(X, pairs, rng)
        (k,) = np.flatnonzero(Y.grid[0] != X.grid[0])
        assert Y.grid[0, k] == (UNASSIGNED if X.grid[0, k] == 0 else 0)


def test_neighbor_values_are_uniform():
    pairs = _pair_set([Pair(0, 0, 0, 1), Pair(0, 1, 2, 3), Pair(0, 2, 4, 5)], n_users=6)
    X = AllocationMatrix(np.array([[1]]))
    rng = np.random.default_rng(7)
    counts = Counter(int(neighbor(X, pairs, rng).grid[0, 0]) for _ in range(10_000))
    assert set(counts) == {UNASSIGNED, 0, 2}
    for value in counts.values():
        assert abs(value / 10_000 - 1 / 3) < 0.03


def test_neighbor_without_pairs():
    pairs = _pair_set([], [], n_users=0)
    with pytest.raises(AllocationError):
        neighbor(AllocationMatrix.empty(2, 3), pairs, np.random.default_rng(0))


def test_enumerate_solutions():
    pairs = _pair_set([Pair(0, 0, 0, 1), Pair(0, 1, 2, 3)], [], n_users=4)
    solutions = list(enumerate_solutions(pairs, SMALL_LINK.data_subcarriers))
    assert len(solutions) == 27
    assert len({X.fingerprint for X in solutions}) == 27
    assert all(np.all(X.grid[1] == UNASSIGNED) for X in solutions)
