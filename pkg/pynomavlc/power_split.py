from __future__ import annotations

from dataclasses import dataclass
from logging import getLogger
from typing import Tuple

import numpy as np

from .phy import LinkConfig, PairTerms, pair_terms
from .types import AllocationMatrix, BisectionError, ChannelMatrix, Pair, PowerSplit


__all__ = ["BisectionParams", "solve_splits", "bisect_split"]


logger = getLogger(__name__)

# a_s is searched on [EPS, 1 - EPS]
EPS = 1e-9


@dataclass(frozen=True)
class BisectionParams:
    tol: float = 1e-6  # relative gap |R_s - R_w| / max(R_s, R_w)
    xtol: float = 1e-9  # bracket width on a_s
    max_iters: int = 200


def solve_splits(
    terms: PairTerms, params: BisectionParams = BisectionParams()
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Equal-rate power split of every pair in `terms`.

    g(a) = R_s(a) - R_w(1 - a) is strictly increasing in a, so the bracket
    [EPS, 1 - EPS] holds exactly one root whenever both gains are nonzero and the
    pair holds a subcarrier. All pairs are bisected together.

    Returns:
        (a_strong, a_weak, degenerate). Pairs without subcarriers get (0, 0);
        singletons and pairs whose weak user has no channel get (1, 0), the latter
        flagged in `degenerate`.
    """
    n = terms.mask.shape[0]
    held = terms.subcarriers > 0
    degenerate = held & ~terms.singleton & ((terms.weak_gain == 0) | (terms.strong_gain == 0))
    active = held & ~terms.singleton & ~degenerate

    a_strong = np.where(held, 1.0, 0.0)
    a_weak = np.zeros(n)
    if not active.any():
        return a_strong, a_weak, degenerate

    lo = np.full(n, EPS)
    hi = np.full(n, 1.0 - EPS)
    iterations = 0
    while np.max(hi[active] - lo[active]) > params.xtol:
        if iterations >= params.max_iters:
            worst = int(np.argmax(np.where(active, hi - lo, -1.0)))
            raise BisectionError((float(lo[worst]), float(hi[worst])), iterations)
        mid = 0.5 * (lo + hi)
        gap = terms.strong_rate(mid) - terms.weak_rate(mid, 1.0 - mid)
        hi = np.where(gap > 0, mid, hi)
        lo = np.where(gap < 0, mid, lo)
        exact = gap == 0
        lo = np.where(exact, mid, lo)
        hi = np.where(exact, mid, hi)
        iterations += 1

    root = 0.5 * (lo + hi)
    r_s = terms.strong_rate(root)
    r_w = terms.weak_rate(root, 1.0 - root)
    rel_gap = np.abs(r_s - r_w) / np.maximum(np.maximum(r_s, r_w), np.finfo(float).tiny)
    if np.any(rel_gap[active] > params.tol):
        logger.debug(
            "Rate gap %.3g above tolerance after %d bisection steps",
            float(np.max(rel_gap[active])),
            iterations,
        )
    a_strong = np.where(active, root, a_strong)
    a_weak = np.where(active, 1.0 - root, a_weak)
    return a_strong, a_weak, degenerate


def bisect_split(
    pair: Pair,
    X: AllocationMatrix,
    H: ChannelMatrix,
    link: LinkConfig,
    params: BisectionParams = BisectionParams(),
) -> PowerSplit:
    """
    Max-min power split of one pair for a fixed allocation.

    Args:
        pair: The pair to split power for
        X: Current subcarrier allocation
        H: Channel matrix
        link: Power and noise configuration
        params: Tolerances and iteration budget
    Returns:
        PowerSplit; idle (0, 0) when the pair holds no subcarrier, (1, 0) for singletons
        and for pairs whose weak user sees no channel.
    """
    terms = pair_terms([pair], X, H, link)
    a_strong, a_weak, degenerate = solve_splits(terms, params)
    if degenerate[0]:
        logger.warning(
            "Weak user %s of pair %d on LED %d has zero channel gain; "
            "serving the strong user alone",
            pair.weak,
            pair.index,
            pair.led,
        )
    split = PowerSplit(float(a_strong[0]), float(a_weak[0]))
    if not pair.is_singleton and 0.0 < split.a_weak < split.a_strong:
        logger.warning(
            "Equal-rate split gives the weak user less power (a_s=%.6f, a_w=%.6f)",
            split.a_strong,
            split.a_weak,
        )
    return split
