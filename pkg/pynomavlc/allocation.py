from __future__ import annotations

import itertools
from logging import getLogger
from typing import Iterator

import numpy as np

from .phy import LinkConfig, pair_terms
from .power_split import BisectionParams, solve_splits
from .types import (
    UNASSIGNED,
    AllocationError,
    AllocationMatrix,
    ChannelMatrix,
    PairSet,
    PenaltyParams,
    PowerSplit,
    RateReport,
)


__all__ = ["evaluate", "random_solution", "neighbor", "enumerate_solutions"]


logger = getLogger(__name__)


def evaluate(
    X: AllocationMatrix,
    pairs: PairSet,
    H: ChannelMatrix,
    link: LinkConfig,
    penalty: PenaltyParams = PenaltyParams(),
    bisection: BisectionParams = BisectionParams(),
) -> RateReport:
    """
    Penalty-augmented max-min objective of an allocation.

    The power split of every pair is re-optimized for X before the rates are taken.
    O = min_j R_j and O' = O - p1 * f_cons - p2 * max(0, f_diff), where f_cons is the
    share of zero-rate users and f_diff the relative max-min spread minus the limit.
    """
    X.validate(pairs)
    members = pairs.pairs
    terms = pair_terms(members, X, H, link)
    a_strong, a_weak, degenerate = solve_splits(terms, bisection)
    if degenerate.any():
        logger.debug("%d pair(s) with a silent weak user", int(degenerate.sum()))
    inverted = (a_weak > 0) & (a_weak < a_strong)
    if inverted.any():
        logger.debug("%d pair(s) give the weak user less power", int(inverted.sum()))
    strong_rates = terms.strong_rate(a_strong)
    weak_rates = terms.weak_rate(a_strong, a_weak)

    rates = np.zeros(pairs.n_users)
    for row, pair in enumerate(members):
        rates[pair.strong] = strong_rates[row]
        if pair.weak is not None:
            rates[pair.weak] = weak_rates[row]

    n = len(rates)
    f_min = float(rates.min()) if n else 0.0
    f_max = float(rates.max()) if n else 0.0
    f_cons = float(np.count_nonzero(rates == 0.0)) / n if n else 0.0
    f_diff = (f_max - f_min) / f_max - penalty.spread_limit if f_max > 0 else 0.0
    penalized = f_min - penalty.p1 * f_cons - penalty.p2 * max(0.0, f_diff)

    splits = tuple(
        PowerSplit(float(s), float(w)) for s, w in zip(a_strong, a_weak)
    )
    return RateReport(
        rates=tuple(float(r) for r in rates),
        splits=splits,
        f_cons=f_cons,
        f_diff=f_diff,
        objective=f_min,
        penalized_objective=penalized,
    )


def random_solution(
    pairs: PairSet, data_subcarriers: int, rng: np.random.Generator
) -> AllocationMatrix:
    """Every cell drawn uniformly from UNASSIGNED and the local pair indices of its LED."""
    grid = np.full((pairs.n_leds, data_subcarriers), UNASSIGNED, dtype=np.int64)
    for led, count in enumerate(pairs.counts):
        if count:
            grid[led] = rng.integers(UNASSIGNED, count, size=data_subcarriers)
    return AllocationMatrix(grid)


def neighbor(
    X: AllocationMatrix, pairs: PairSet, rng: np.random.Generator
) -> AllocationMatrix:
    """
    Mutates one random cell of X to a different value.

    The cell is drawn uniformly among the LEDs that have at least one pair (the others
    only admit UNASSIGNED), and the new value uniformly among the other options.
    """
    eligible = [led for led, count in enumerate(pairs.counts) if count]
    if not eligible or X.data_subcarriers == 0:
        raise AllocationError("No cell of the allocation can change")
    led = eligible[rng.integers(len(eligible))]
    k = int(rng.integers(X.data_subcarriers))
    current = int(X.grid[led, k])
    # options are UNASSIGNED..count-1; skip over the current value
    value = int(rng.integers(UNASSIGNED, pairs.counts[led] - 1))
    if value >= current:
        value += 1
    return X.with_cell(led, k, value)


def enumerate_solutions(pairs: PairSet, data_subcarriers: int) -> Iterator[AllocationMatrix]:
    """Every allocation of `pairs` onto `data_subcarriers` cells per LED. Tiny instances only."""
    options = [
        range(UNASSIGNED, count) for count in pairs.counts for _ in range(data_subcarriers)
    ]
    for cells in itertools.product(*options):
        grid = np.array(cells, dtype=np.int64).reshape(pairs.n_leds, data_subcarriers)
        yield AllocationMatrix(grid)
