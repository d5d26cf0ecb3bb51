from __future__ import annotations

import math
import time
from collections import deque
from logging import getLogger
from typing import Deque, List, Optional

import numpy as np

from .allocation import evaluate, neighbor, random_solution
from .phy import LinkConfig
from .power_split import BisectionParams
from .types import (
    AllocationMatrix,
    ChannelMatrix,
    PairSet,
    PenaltyParams,
    RateReport,
    SaParams,
    SearchResult,
    TracePoint,
    TsParams,
)


__all__ = ["simulated_annealing", "tabu_search"]


logger = getLogger(__name__)


class _Objective:
    """Counts evaluations of O' for one search run."""

    def __init__(
        self,
        pairs: PairSet,
        H: ChannelMatrix,
        link: LinkConfig,
        penalty: PenaltyParams,
        bisection: BisectionParams,
    ) -> None:
        self.pairs = pairs
        self.H = H
        self.link = link
        self.penalty = penalty
        self.bisection = bisection
        self.evaluations = 0

    def __call__(self, X: AllocationMatrix) -> RateReport:
        self.evaluations += 1
        return evaluate(X, self.pairs, self.H, self.link, self.penalty, self.bisection)


def _deadline(time_limit: Optional[float]) -> Optional[float]:
    return None if time_limit is None else time.monotonic() + time_limit


def _expired(deadline: Optional[float]) -> bool:
    return deadline is not None and time.monotonic() >= deadline


def simulated_annealing(
    pairs: PairSet,
    H: ChannelMatrix,
    link: LinkConfig,
    sa: SaParams = SaParams(),
    penalty: PenaltyParams = PenaltyParams(),
    rng: Optional[np.random.Generator] = None,
    *,
    bisection: BisectionParams = BisectionParams(),
    initial: Optional[AllocationMatrix] = None,
) -> SearchResult:
    """
    Subcarrier allocation by simulated annealing.

    Every outer step runs a Metropolis chain of M moves at temperature T, then sets
    T <- alpha * T and M <- beta * M. Improving moves are always taken, worsening ones
    with probability exp(-(c_current - c_new) / T). The best allocation ever seen is
    returned together with its report and the per-evaluation objective trace.

    Args:
        pairs: User pairs of every LED
        H: Channel matrix
        link: Power and noise configuration
        sa: Cooling schedule and budget
        penalty: Penalty weights of O'
        rng: Random generator; a fresh unseeded one if None
        bisection: Tolerances of the nested power split
        initial: Starting allocation; random if None
    """
    rng = np.random.default_rng() if rng is None else rng
    objective = _Objective(pairs, H, link, penalty, bisection)
    k_d = link.data_subcarriers

    current = random_solution(pairs, k_d, rng) if initial is None else initial
    current_report = objective(current)
    best, best_report = current, current_report
    trace: List[TracePoint] = [
        TracePoint(1, current_report.penalized_objective, current_report.penalized_objective)
    ]
    if not any(pairs.counts) or k_d == 0:
        return SearchResult(best, best_report, tuple(trace), objective.evaluations)

    deadline = _deadline(sa.time_limit)
    temperature = sa.t0
    chain_length = float(sa.m0)
    for step in range(sa.outer_iterations):
        for _ in range(int(round(chain_length))):
            candidate = neighbor(current, pairs, rng)
            report = objective(candidate)
            c_new = report.penalized_objective
            c_current = current_report.penalized_objective
            if c_new > c_current:
                current, current_report = candidate, report
                if c_new > best_report.penalized_objective:
                    best, best_report = candidate, report
            elif temperature > 0 and rng.random() < math.exp(-(c_current - c_new) / temperature):
                current, current_report = candidate, report
            trace.append(
                TracePoint(objective.evaluations, c_new, best_report.penalized_objective)
            )
        logger.debug(
            "SA step %d: T=%.4g M=%d best=%.6g",
            step,
            temperature,
            int(round(chain_length)),
            best_report.penalized_objective,
        )
        temperature *= sa.alpha
        chain_length *= sa.beta
        if _expired(deadline):
            logger.info("SA time limit reached after %d outer steps", step + 1)
            break

    return SearchResult(best, best_report, tuple(trace), objective.evaluations)


def tabu_search(
    pairs: PairSet,
    H: ChannelMatrix,
    link: LinkConfig,
    ts: TsParams = TsParams(),
    penalty: PenaltyParams = PenaltyParams(),
    rng: Optional[np.random.Generator] = None,
    *,
    bisection: BisectionParams = BisectionParams(),
    initial: Optional[AllocationMatrix] = None,
) -> SearchResult:
    """
    Subcarrier allocation by tabu search, used to cross-check the annealer.

    Each step samples `candidate_list_len` neighbours of the current allocation and moves
    to the best one whose fingerprint is not among the `tabu_list_len` most recently
    visited allocations. A tabu candidate is still taken when it beats the best
    objective found so far.
    """
    rng = np.random.default_rng() if rng is None else rng
    objective = _Objective(pairs, H, link, penalty, bisection)
    k_d = link.data_subcarriers

    current = random_solution(pairs, k_d, rng) if initial is None else initial
    current_report = objective(current)
    best, best_report = current, current_report
    trace: List[TracePoint] = [
        TracePoint(1, current_report.penalized_objective, current_report.penalized_objective)
    ]
    if not any(pairs.counts) or k_d == 0:
        return SearchResult(best, best_report, tuple(trace), objective.evaluations)

    tabu: Deque[bytes] = deque(maxlen=ts.tabu_list_len)
    tabu.append(current.fingerprint)
    deadline = _deadline(ts.time_limit)
    for step in range(ts.iterations):
        candidates = [neighbor(current, pairs, rng) for _ in range(ts.candidate_list_len)]
        scored = sorted(
            ((objective(c), c) for c in candidates),
            key=lambda item: -item[0].penalized_objective,
        )
        best_value = best_report.penalized_objective
        chosen = next(
            (
                (report, c)
                for report, c in scored
                if c.fingerprint not in tabu or report.penalized_objective > best_value
            ),
            None,
        )
        if chosen is not None:
            current_report, current = chosen
            tabu.append(current.fingerprint)
            if current_report.penalized_objective > best_value:
                best, best_report = current, current_report
        trace.append(
            TracePoint(
                objective.evaluations,
                current_report.penalized_objective,
                best_report.penalized_objective,
            )
        )
        if _expired(deadline):
            logger.info("Tabu search time limit reached after %d steps", step + 1)
            break

    logger.debug("Tabu search best=%.6g", best_report.penalized_objective)
    return SearchResult(best, best_report, tuple(trace), objective.evaluations)
