from __future__ import annotations

import csv
import zlib
from pathlib import Path
from typing import Any, Iterable, List, Sequence, Tuple, Union

import numpy as np

from .geometry import Scenario
from .types import (
    AllocationMatrix,
    Binding,
    PairSet,
    RateReport,
    SweepVariable,
    TracePoint,
)


__all__ = [
    "RESULT_HEADER",
    "parse_values",
    "realization_seed",
    "realization_streams",
    "write_csv",
    "position_rows",
    "binding_rows",
    "pair_rows",
    "allocation_rows",
    "trace_rows",
    "format_table",
]


RESULT_HEADER = (
    "sweep_var",
    "sweep_value",
    "scheme",
    "K",
    "optimizer",
    "mean_minrate_bps",
    "std_bps",
    "realizations",
    "min_bps",
    "max_bps",
    "mean_evaluations",
    "mean_repair_iterations",
    "failed",
)


def parse_values(text: str) -> Tuple[float, ...]:
    """Parses a comma separated list such as "10,20,30"."""
    parts = [part.strip() for part in text.split(",") if part.strip() != ""]
    return tuple(float(part) for part in parts)


def realization_seed(
    master_seed: int, sweep: SweepVariable, value: Union[int, float], realization: int
) -> int:
    """
    64-bit seed of one realization.

    Depends on the sweep value itself rather than its position in the list, so the
    same point gets the same placements however the values are ordered.
    """
    key = zlib.crc32(f"{sweep.value}={value!r}".encode())
    sequence = np.random.SeedSequence(master_seed, spawn_key=(key, realization))
    return int(sequence.generate_state(1, np.uint64)[0])


def realization_streams(seed: int) -> Tuple[np.random.Generator, ...]:
    """Independent generators for placement, binding repair and the optimizer."""
    return tuple(np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3))


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def position_rows(scenario: Scenario) -> List[Tuple[int, float, float, float]]:
    return [(j, *user.position) for j, user in enumerate(scenario.users)]


def binding_rows(binding: Binding) -> List[Tuple[int, int]]:
    return list(enumerate(binding.assignment))


def pair_rows(pairs: PairSet) -> List[Tuple[int, int, int, int]]:
    return [
        (pair.led, pair.index, pair.strong, -1 if pair.weak is None else pair.weak)
        for pair in pairs
    ]


def allocation_rows(
    X: AllocationMatrix, pairs: PairSet, report: RateReport
) -> List[Tuple[int, int, int, float, float]]:
    """(led, subcarrier, pair|-1, a_s, a_w) for every cell; idle cells carry zero power."""
    offsets = np.concatenate(([0], np.cumsum(pairs.counts)))
    rows = []
    for led in range(X.n_leds):
        for k in range(X.data_subcarriers):
            index = int(X.grid[led, k])
            if index < 0:
                rows.append((led, k, -1, 0.0, 0.0))
            else:
                split = report.splits[offsets[led] + index]
                rows.append((led, k, index, split.a_strong, split.a_weak))
    return rows


def trace_rows(trace: Sequence[TracePoint]) -> List[Tuple[int, float, float]]:
    return [(p.evaluation, p.objective, p.best) for p in trace]


def format_table(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """Fixed-width text table for terminal output."""
    cells = [[str(h) for h in header]] + [
        [f"{v:.6g}" if isinstance(v, float) else str(v) for v in row] for row in rows
    ]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)
