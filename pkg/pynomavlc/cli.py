import logging
import math
from collections import Counter
from pathlib import Path
from typing import Any, Dict, List, NoReturn, Optional

from typer import Exit, Option, Typer, echo

from .allocation import enumerate_solutions, evaluate
from .config import ExperimentConfig, load_config
from .harness import run_binding_study, run_realization, run_sweep
from .phy import sinr_table
from .types import NomaVLCException, Optimizer, Scheme, SchemeChoice, SweepVariable
from .utils import (
    RESULT_HEADER,
    allocation_rows,
    binding_rows,
    format_table,
    pair_rows,
    parse_values,
    position_rows,
    realization_seed,
    trace_rows,
    write_csv,
)


app = Typer(
    name="pynomavlc",
    help="Max-min rate simulator for NOMA-enabled multi-carrier VLC networks",
    no_args_is_help=True,
    add_completion=False,
)

# allocations beyond this are not enumerated by `realize --exhaustive`
EXHAUSTIVE_LIMIT = 200_000


def _fail(message: str) -> NoReturn:
    echo(f"[ERROR] {message}", err=True)
    raise Exit(code=1)


def _setup_logging(debug: bool) -> None:
    if debug:
        logging.basicConfig(level=logging.DEBUG)


def _build_config(config: Optional[Path], values: Optional[str], **overrides: Any) -> ExperimentConfig:
    """Config file (or defaults) with the CLI flags layered on top."""
    changes: Dict[str, Any] = dict(overrides)
    if values is not None:
        try:
            changes["values"] = parse_values(values)
        except ValueError:
            _fail(f"Could not parse --values {values!r}; expected e.g. 10,20,30")
    try:
        cfg = ExperimentConfig() if config is None else load_config(config)
        return cfg.override(**changes)
    except NomaVLCException as err:
        _fail(str(err))


@app.command()
def sweep(
    config: Optional[Path] = Option(
        None, "--config", help="Flat JSON file of configuration keys", show_default=False
    ),
    scheme: Optional[SchemeChoice] = Option(
        None, help="NOMA scheme(s) to run", show_default=False
    ),
    sweep_var: Optional[SweepVariable] = Option(
        None, "--sweep", help="Parameter to sweep", show_default=False
    ),
    values: Optional[str] = Option(
        None, help="Comma separated sweep values, e.g. 10,20,30,40", show_default=False
    ),
    realizations: Optional[int] = Option(
        None, help="User placements averaged per point", show_default=False
    ),
    seed: Optional[int] = Option(None, help="Master seed", show_default=False),
    optimizer: Optional[Optimizer] = Option(
        None, help="Subcarrier allocation search", show_default=False
    ),
    workers: Optional[int] = Option(None, help="Worker processes", show_default=False),
    out: Optional[Path] = Option(
        None, help="CSV file to write the result rows to", show_default=False
    ),
    debug: bool = Option(False, help="Whether to log debug statements"),
) -> None:
    """Run a Monte-Carlo parameter sweep and print the averaged max-min rates."""
    _setup_logging(debug)
    cfg = _build_config(
        config,
        values,
        scheme=scheme,
        sweep=sweep_var,
        realizations=realizations,
        master_seed=seed,
        optimizer=optimizer,
        workers=workers,
    )
    try:
        rows = run_sweep(cfg, out)
    except NomaVLCException as err:
        _fail(str(err))

    echo(format_table(RESULT_HEADER, [row.as_csv_row() for row in rows]))
    failed = sum(row.failed for row in rows)
    if failed:
        echo(f"[WARNING] {failed} realization(s) failed; see the `failed` column", err=True)
    if out is not None:
        echo(f"\nResults written to {out}")


@app.command()
def realize(
    config: Optional[Path] = Option(
        None, "--config", help="Flat JSON file of configuration keys", show_default=False
    ),
    scheme: Scheme = Option(Scheme.IMPOSED, help="NOMA scheme"),
    users: Optional[int] = Option(None, "-n", "--users", help="Number of users", show_default=False),
    leds: Optional[int] = Option(None, "-l", "--leds", help="Number of LEDs", show_default=False),
    subcarriers: Optional[int] = Option(
        None, "-k", "--subcarriers", help="Total subcarriers K", show_default=False
    ),
    power: Optional[float] = Option(
        None, help="Electrical power per LED, dBm", show_default=False
    ),
    seed: Optional[int] = Option(None, help="Master seed", show_default=False),
    realization: int = Option(0, help="Realization index under the master seed"),
    optimizer: Optional[Optimizer] = Option(
        None, help="Subcarrier allocation search", show_default=False
    ),
    out_dir: Optional[Path] = Option(
        None, help="Directory for the per-realization CSV files", show_default=False
    ),
    sinr: bool = Option(False, help="Also write the per-subcarrier SINR table"),
    exhaustive: bool = Option(
        False, help="Compare against every allocation (tiny instances only)"
    ),
    debug: bool = Option(False, help="Whether to log debug statements"),
) -> None:
    """Run a single realization and dump its intermediate results."""
    _setup_logging(debug)
    cfg = _build_config(
        config,
        None,
        scheme=scheme.value,
        users=users,
        leds=leds,
        subcarriers=subcarriers,
        power_dbm=power,
        master_seed=seed,
        optimizer=optimizer,
    )
    value = getattr(cfg, cfg.sweep.field_name)
    realization_id = realization_seed(cfg.master_seed, cfg.sweep, value, realization)
    try:
        result = run_realization(cfg, realization_id)
    except NomaVLCException as err:
        _fail(str(err))

    report = result.report
    echo(f"Scheme: {result.scheme.value}, optimizer: {cfg.optimizer.value}, seed: {result.seed}")
    echo(f"Pairs per LED: {result.pairs.counts}")
    echo(f"Binding repair iterations: {result.repair_iterations}")
    echo(f"Max-min rate: {report.objective:.6g} bit/s (O' = {report.penalized_objective:.6g})")
    echo(f"Evaluations: {result.search.evaluations}")

    if exhaustive:
        k_d = cfg.build_link().data_subcarriers
        states = math.prod((count + 1) ** k_d for count in result.pairs.counts)
        if states > EXHAUSTIVE_LIMIT:
            _fail(f"{states} allocations are too many to enumerate (limit {EXHAUSTIVE_LIMIT})")
        link = cfg.build_link()
        penalty = cfg.build_penalty()
        bisection = cfg.build_bisection()
        optimum = max(
            evaluate(X, result.pairs, result.channel, link, penalty, bisection).penalized_objective
            for X in enumerate_solutions(result.pairs, k_d)
        )
        echo(f"Exhaustive optimum over {states} allocations: O' = {optimum:.6g}")

    if out_dir is None:
        return
    write_csv(out_dir / "positions.csv", ("user_id", "x", "y", "z"), position_rows(result.scenario))
    write_csv(out_dir / "binding.csv", ("user_id", "led_id"), binding_rows(result.binding))
    write_csv(
        out_dir / "pairs.csv",
        ("led_id", "pair_idx", "strong_user", "weak_user"),
        pair_rows(result.pairs),
    )
    write_csv(
        out_dir / "allocation.csv",
        ("led", "subcarrier", "pair", "a_s", "a_w"),
        allocation_rows(result.search.allocation, result.pairs, report),
    )
    write_csv(
        out_dir / "trace.csv", ("iteration", "O'", "best_O'"), trace_rows(result.search.trace)
    )
    if sinr:
        write_csv(
            out_dir / "sinr.csv",
            ("led", "subcarrier", "user", "role", "sinr"),
            sinr_table(
                result.pairs.pairs,
                report.splits,
                result.search.allocation,
                result.channel,
                cfg.build_link(),
            ),
        )
    echo(f"\nFiles written to {out_dir}")


@app.command("binding-study")
def binding_study(
    config: Optional[Path] = Option(
        None, "--config", help="Flat JSON file of configuration keys", show_default=False
    ),
    values: Optional[str] = Option(
        None, help="Comma separated user counts, e.g. 10,20,30,40", show_default=False
    ),
    realizations: Optional[int] = Option(
        None, help="Placements per user count", show_default=False
    ),
    seed: Optional[int] = Option(None, help="Master seed", show_default=False),
    workers: Optional[int] = Option(None, help="Worker processes", show_default=False),
    out: Optional[Path] = Option(
        None, help="CSV file to write the per-placement rows to", show_default=False
    ),
    debug: bool = Option(False, help="Whether to log debug statements"),
) -> None:
    """Count how many repair iterations the parity-preserving binding needs."""
    _setup_logging(debug)
    cfg = _build_config(
        config,
        values,
        sweep=SweepVariable.USERS,
        realizations=realizations,
        master_seed=seed,
        workers=workers,
    )
    try:
        rows = run_binding_study(cfg)
    except NomaVLCException as err:
        _fail(str(err))

    if out is not None:
        write_csv(
            out,
            ("users", "realization", "iterations", "odd_leds_before", "odd_leds_after"),
            rows,
        )

    summary: List[tuple] = []
    for value in dict.fromkeys(row.sweep_value for row in rows):
        group = [row for row in rows if row.sweep_value == value]
        iterations = [row.iterations for row in group]
        summary.append(
            (
                value,
                len(group),
                iterations.count(0),
                sum(iterations) / len(iterations),
                max(iterations),
                sum(row.odd_leds_after == 0 for row in group),
            )
        )
    echo(
        format_table(
            ("users", "realizations", "zero_iterations", "mean_iterations", "max_iterations", "all_even"),
            summary,
        )
    )
    for value in dict.fromkeys(row.sweep_value for row in rows):
        histogram = Counter(row.iterations for row in rows if row.sweep_value == value)
        buckets = ", ".join(f"{k}: {histogram[k]}" for k in sorted(histogram))
        echo(f"\nusers={value} iterations -> placements\n  {buckets}")
    if out is not None:
        echo(f"\nResults written to {out}")
