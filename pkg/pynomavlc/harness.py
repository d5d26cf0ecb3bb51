from __future__ import annotations

import math
import multiprocessing
from dataclasses import dataclass
from logging import getLogger
from pathlib import Path
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np

from .association import bind_max_gain, repair_parity
from .config import ExperimentConfig
from .geometry import Scenario, channel_matrix
from .pairing import d_nlupa
from .search import simulated_annealing, tabu_search
from .types import (
    Binding,
    ChannelMatrix,
    ConfigurationError,
    NomaVLCException,
    Optimizer,
    PairSet,
    ParityRepairError,
    RateReport,
    Scheme,
    SearchResult,
)
from .utils import RESULT_HEADER, realization_seed, realization_streams, write_csv


__all__ = [
    "RealizationResult",
    "ResultRow",
    "BindingStudyRow",
    "run_realization",
    "run_sweep",
    "run_binding_study",
]


logger = getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class RealizationResult:
    seed: int
    scheme: Scheme
    scenario: Scenario
    channel: ChannelMatrix
    binding: Binding
    repair_iterations: int
    pairs: PairSet
    search: SearchResult

    @property
    def report(self) -> RateReport:
        return self.search.report

    @property
    def min_rate(self) -> float:
        return self.search.report.objective


@dataclass(frozen=True)
class ResultRow:
    sweep_var: str
    sweep_value: Union[int, float]
    scheme: Scheme
    subcarriers: int
    optimizer: Optimizer
    mean_minrate_bps: float
    std_bps: float
    realizations: int  # successful ones
    min_bps: float
    max_bps: float
    mean_evaluations: float
    mean_repair_iterations: float
    failed: int = 0

    def as_csv_row(self) -> Tuple[object, ...]:
        return (
            self.sweep_var,
            self.sweep_value,
            self.scheme.value,
            self.subcarriers,
            self.optimizer.value,
            repr(self.mean_minrate_bps),
            repr(self.std_bps),
            self.realizations,
            repr(self.min_bps),
            repr(self.max_bps),
            repr(self.mean_evaluations),
            repr(self.mean_repair_iterations),
            self.failed,
        )


class BindingStudyRow(NamedTuple):
    sweep_value: Union[int, float]
    realization: int
    iterations: int
    odd_leds_before: int
    odd_leds_after: int


class _Outcome(NamedTuple):
    min_rate: float
    evaluations: int
    repair_iterations: int
    error: Optional[str] = None


def run_realization(cfg: ExperimentConfig, seed: int) -> RealizationResult:
    """
    Runs the whole pipeline for one placement of the users.

    scenario -> channel matrix -> binding (+ parity repair when imposed) -> pairing ->
    subcarrier search with nested power splits. `cfg.scheme` must name a single scheme.
    """
    schemes = cfg.scheme.schemes
    if len(schemes) != 1:
        raise ConfigurationError("run_realization needs a single scheme")
    scheme = schemes[0]
    cfg.validate_point()

    placement, repair_rng, search_rng = realization_streams(seed)
    scenario = cfg.build_scenario(placement, seed)
    H = channel_matrix(scenario)
    binding = bind_max_gain(H)
    iterations = 0
    if scheme is Scheme.IMPOSED:
        binding, iterations = repair_parity(binding, scenario, repair_rng, cfg.repair_max_iters)
    pairs = d_nlupa(binding, H, scheme)

    link = cfg.build_link()
    if cfg.optimizer is Optimizer.SA:
        search = simulated_annealing(
            pairs,
            H,
            link,
            cfg.build_sa(),
            cfg.build_penalty(),
            search_rng,
            bisection=cfg.build_bisection(),
        )
    else:
        search = tabu_search(
            pairs,
            H,
            link,
            cfg.build_ts(),
            cfg.build_penalty(),
            search_rng,
            bisection=cfg.build_bisection(),
        )
    logger.debug(
        "Realization %d (%s, K=%d): min rate %.6g after %d evaluations",
        seed,
        scheme.value,
        cfg.subcarriers,
        search.report.objective,
        search.evaluations,
    )
    return RealizationResult(seed, scheme, scenario, H, binding, iterations, pairs, search)


def _run_task(task: Tuple[ExperimentConfig, int]) -> _Outcome:
    cfg, seed = task
    try:
        result = run_realization(cfg, seed)
    except NomaVLCException as err:
        logger.warning("Realization with seed %d failed: %s", seed, err)
        return _Outcome(math.nan, 0, 0, str(err))
    return _Outcome(result.min_rate, result.search.evaluations, result.repair_iterations)


def _map(func: Callable[[T], R], tasks: Sequence[T], workers: int) -> List[R]:
    """Ordered map; the output does not depend on the number of workers."""
    if workers <= 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]
    with multiprocessing.Pool(workers) as pool:
        return list(pool.imap(func, tasks, chunksize=1))


def _aggregate(
    cfg: ExperimentConfig, value: Union[int, float], outcomes: Sequence[_Outcome]
) -> ResultRow:
    ok = [o for o in outcomes if o.error is None]
    rates = np.array([o.min_rate for o in ok], dtype=float)
    failed = len(outcomes) - len(ok)
    if failed:
        logger.warning(
            "%d of %d realizations failed at %s=%s (%s, K=%d)",
            failed,
            len(outcomes),
            cfg.sweep.value,
            value,
            cfg.scheme.value,
            cfg.subcarriers,
        )
    if not ok:
        nan = math.nan
        return ResultRow(
            cfg.sweep.value, value, cfg.scheme.schemes[0], cfg.subcarriers, cfg.optimizer,
            nan, nan, 0, nan, nan, nan, nan, failed,
        )  # fmt: skip
    return ResultRow(
        sweep_var=cfg.sweep.value,
        sweep_value=value,
        scheme=cfg.scheme.schemes[0],
        subcarriers=cfg.subcarriers,
        optimizer=cfg.optimizer,
        mean_minrate_bps=float(rates.mean()),
        std_bps=float(rates.std()),
        realizations=len(ok),
        min_bps=float(rates.min()),
        max_bps=float(rates.max()),
        mean_evaluations=float(np.mean([o.evaluations for o in ok])),
        mean_repair_iterations=float(np.mean([o.repair_iterations for o in ok])),
        failed=failed,
    )


def run_sweep(cfg: ExperimentConfig, out: Optional[Path] = None) -> List[ResultRow]:
    """
    Monte-Carlo sweep: one row per sweep value x scheme x K, each averaged over
    `cfg.realizations` placements. Schemes and K values of a sweep point reuse the same
    placements. Writes the rows to `out` as CSV when given.
    """
    cfg.validate()
    groups: List[Tuple[ExperimentConfig, Union[int, float]]] = []
    tasks: List[Tuple[ExperimentConfig, int]] = []
    for point in cfg.sweep_points():
        value = getattr(point, cfg.sweep.field_name)
        seeds = [
            realization_seed(cfg.master_seed, cfg.sweep, value, r)
            for r in range(cfg.realizations)
        ]
        for scheme in cfg.scheme.schemes:
            for k in point.subcarrier_axis:
                run_cfg = point.override(scheme=scheme.value, subcarriers=k)
                groups.append((run_cfg, value))
                tasks.extend((run_cfg, seed) for seed in seeds)

    logger.info("Running %d realizations on %d worker(s)", len(tasks), cfg.workers)
    outcomes = _map(_run_task, tasks, cfg.workers)

    rows = []
    for n, (run_cfg, value) in enumerate(groups):
        chunk = outcomes[n * cfg.realizations : (n + 1) * cfg.realizations]
        rows.append(_aggregate(run_cfg, value, chunk))
    if out is not None:
        write_csv(out, RESULT_HEADER, (row.as_csv_row() for row in rows))
    return rows


def _binding_task(task: Tuple[ExperimentConfig, Union[int, float], int, int]) -> BindingStudyRow:
    cfg, value, realization, seed = task
    placement, repair_rng, _ = realization_streams(seed)
    scenario = cfg.build_scenario(placement, seed)
    binding = bind_max_gain(channel_matrix(scenario))
    before = binding.odd_leds
    try:
        repaired, iterations = repair_parity(binding, scenario, repair_rng, cfg.repair_max_iters)
    except ParityRepairError as err:
        logger.warning("Placement %d at %s: %s", realization, value, err)
        repaired, iterations = err.binding, err.iterations
    return BindingStudyRow(value, realization, iterations, before, repaired.odd_leds)


def run_binding_study(cfg: ExperimentConfig) -> List[BindingStudyRow]:
    """
    Repair convergence study: for every sweep value, `cfg.realizations` placements are
    bound, repaired, and the number of repair iterations recorded. Uses the same
    placements as `run_sweep`.
    """
    cfg = cfg.override(scheme="imposed")
    cfg.validate()
    tasks = []
    for point in cfg.sweep_points():
        value = getattr(point, cfg.sweep.field_name)
        for r in range(cfg.realizations):
            tasks.append((point, value, r, realization_seed(cfg.master_seed, cfg.sweep, value, r)))
    return _map(_binding_task, tasks, cfg.workers)
