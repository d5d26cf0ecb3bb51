from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np

from .geometry import Room, Scenario, UserTerminal, build_scenario, lambertian_order
from .phy import LinkConfig, NoiseConfig, PowerConfig
from .power_split import BisectionParams
from .types import (
    ConfigurationError,
    NomaVLCException,
    Optimizer,
    PenaltyParams,
    SaParams,
    Scheme,
    SchemeChoice,
    SweepVariable,
    TsParams,
)


__all__ = ["ExperimentConfig", "load_config"]


_INT_FIELDS = {
    "users",
    "leds",
    "subcarriers",
    "realizations",
    "master_seed",
    "workers",
    "sa_m0",
    "sa_outer_iterations",
    "ts_tabu_list_len",
    "ts_candidate_list_len",
    "ts_iterations",
    "repair_max_iters",
    "bisection_max_iters",
}


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Every knob of an experiment. Defaults reproduce the network parameter table:
    20 users, 4 LEDs, P_e = 35 dBm, 60/85 degree LED/FoV semi-angles, 5 x 5 x 3 m room.
    """

    # network
    users: int = 20
    leds: int = 4
    subcarriers: int = 16
    subcarrier_counts: Tuple[int, ...] = (16, 32)
    power_dbm: float = 35.0
    led_semi_angle: float = 60.0
    fov_semi_angle: float = 85.0
    room_width: float = 5.0
    room_depth: float = 5.0
    room_height: float = 3.0
    receiver_plane_height: float = 0.85
    bandwidth: float = 20e6
    electrical_to_optical_ratio: float = 3.2
    oe_efficiency: float = 0.53
    noise_psd: float = 1e-19
    pd_area: float = 1e-4
    refractive_index: float = 1.5
    optical_filter_gain: float = 1.0

    # experiment
    scheme: SchemeChoice = SchemeChoice.BOTH
    optimizer: Optimizer = Optimizer.SA
    sweep: SweepVariable = SweepVariable.USERS
    values: Tuple[float, ...] = (10, 20, 30, 40)
    realizations: int = 100
    master_seed: int = 0
    workers: int = 1

    # objective
    spread_limit: float = 0.2
    penalty_p1: float = 1e5
    penalty_p2: float = 10.0

    # optimizers
    sa_t0: float = 1.0
    sa_alpha: float = 0.995
    sa_m0: int = 50
    sa_beta: float = 1.0005
    sa_outer_iterations: int = 600
    sa_time_limit: Optional[float] = None
    ts_tabu_list_len: int = 10
    ts_candidate_list_len: int = 4
    ts_iterations: int = 8000
    ts_time_limit: Optional[float] = None
    repair_max_iters: int = 1000
    bisection_tol: float = 1e-6
    bisection_xtol: float = 1e-9
    bisection_max_iters: int = 200

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> ExperimentConfig:
        """Builds a config from a flat mapping of field names to JSON values."""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigurationError(f"Unknown configuration key(s): {', '.join(unknown)}")
        return cls().override(**data)

    def override(self, **changes: Any) -> ExperimentConfig:
        """Returns a copy with `changes` applied; None values are ignored."""
        converted: Dict[str, Any] = {}
        for name, value in changes.items():
            if value is None:
                continue
            try:
                converted[name] = _convert(name, value)
            except (TypeError, ValueError) as err:
                raise ConfigurationError(f"Invalid value for {name}: {value!r}") from err
        try:
            return replace(self, **converted)
        except TypeError as err:
            raise ConfigurationError(str(err)) from err

    def to_mapping(self) -> Dict[str, Any]:
        data = asdict(self)
        for name in ("scheme", "optimizer", "sweep"):
            data[name] = data[name].value
        data["subcarrier_counts"] = list(self.subcarrier_counts)
        data["values"] = list(self.values)
        return data

    @property
    def subcarrier_axis(self) -> Tuple[int, ...]:
        """K values crossed with every sweep point; collapses when K itself is swept."""
        if self.sweep is SweepVariable.SUBCARRIERS:
            return (self.subcarriers,)
        return self.subcarrier_counts

    def point(self, value: Union[int, float]) -> ExperimentConfig:
        """The config of one sweep point."""
        return self.override(**{self.sweep.field_name: value})

    def sweep_points(self) -> Tuple[ExperimentConfig, ...]:
        return tuple(self.point(value) for value in self.values)

    def validate(self) -> None:
        """Checks every sweep point and every K before anything is computed."""
        if not self.values:
            raise ConfigurationError("The sweep value list is empty")
        if not self.subcarrier_counts:
            raise ConfigurationError("The subcarrier count list is empty")
        if self.realizations < 1 or self.workers < 1:
            raise ConfigurationError("realizations and workers must be positive")
        if self.master_seed < 0:
            raise ConfigurationError("master_seed must be non-negative")
        for point in self.sweep_points():
            for k in point.subcarrier_axis:
                point.override(subcarriers=k).validate_point()

    def validate_point(self) -> None:
        """Checks the single network point this config describes."""
        if self.users < 1:
            raise ConfigurationError("At least one user is required")
        side = math.isqrt(self.leds) if self.leds > 0 else 0
        if side * side != self.leds:
            raise ConfigurationError(f"LED count must be a perfect square, got {self.leds}")
        if Scheme.IMPOSED in self.scheme.schemes and self.users % 2:
            raise ConfigurationError(
                f"The imposed scheme needs an even number of users, got {self.users}"
            )
        try:
            lambertian_order(self.led_semi_angle)
            self.build_room()
            self.build_link()
            self.build_terminal()
            self.build_penalty()
            self.build_sa()
            self.build_ts()
        except NomaVLCException as err:
            raise ConfigurationError(str(err)) from err

    def build_room(self) -> Room:
        return Room(
            self.room_width, self.room_depth, self.room_height, self.receiver_plane_height
        )

    def build_terminal(self) -> UserTerminal:
        return UserTerminal(
            (0.0, 0.0, self.receiver_plane_height),
            fov_semi_angle=self.fov_semi_angle,
            pd_area=self.pd_area,
            optical_filter_gain=self.optical_filter_gain,
            refractive_index=self.refractive_index,
        )

    def build_link(self) -> LinkConfig:
        return LinkConfig(
            PowerConfig(self.power_dbm, self.electrical_to_optical_ratio, self.oe_efficiency),
            NoiseConfig(self.noise_psd, self.bandwidth, self.subcarriers),
        )

    def build_scenario(self, rng: np.random.Generator, seed: int = 0) -> Scenario:
        return build_scenario(
            self.build_room(),
            self.leds,
            self.users,
            rng,
            semi_angle_half=self.led_semi_angle,
            terminal=self.build_terminal(),
            rng_seed=seed,
        )

    def build_penalty(self) -> PenaltyParams:
        return PenaltyParams(self.spread_limit, self.penalty_p1, self.penalty_p2)

    def build_sa(self) -> SaParams:
        return SaParams(
            self.sa_t0,
            self.sa_alpha,
            self.sa_m0,
            self.sa_beta,
            self.sa_outer_iterations,
            self.sa_time_limit,
        )

    def build_ts(self) -> TsParams:
        return TsParams(
            self.ts_tabu_list_len,
            self.ts_candidate_list_len,
            self.ts_iterations,
            self.ts_time_limit,
        )

    def build_bisection(self) -> BisectionParams:
        return BisectionParams(
            self.bisection_tol, self.bisection_xtol, self.bisection_max_iters
        )


def _convert(name: str, value: Any) -> Any:
    if name == "scheme":
        return SchemeChoice(value)
    if name == "optimizer":
        return Optimizer(value)
    if name == "sweep":
        return SweepVariable(value)
    if name == "subcarrier_counts":
        return tuple(_as_int(v) for v in value)
    if name == "values":
        return tuple(value)
    if name in _INT_FIELDS:
        return _as_int(value)
    return float(value)


def _as_int(value: Any) -> int:
    number = float(value)
    if not number.is_integer():
        raise ValueError(f"{value!r} is not an integer")
    return int(number)


def load_config(path: Path) -> ExperimentConfig:
    """Reads a flat JSON object of ExperimentConfig field names."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigurationError(f"Could not read configuration {path}: {err}") from err
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path} must contain a JSON object")
    return ExperimentConfig.from_mapping(data)
