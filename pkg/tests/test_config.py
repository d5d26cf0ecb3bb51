import json
from pathlib import Path

import pytest

from pynomavlc.config import ExperimentConfig, load_config
from pynomavlc.types import ConfigurationError, Optimizer, Scheme, SchemeChoice, SweepVariable


def test_defaults():
    cfg = ExperimentConfig()
    assert (cfg.users, cfg.leds, cfg.subcarrier_counts) == (20, 4, (16, 32))
    assert (cfg.power_dbm, cfg.led_semi_angle, cfg.fov_semi_angle) == (35.0, 60.0, 85.0)
    assert (cfg.room_width, cfg.room_depth, cfg.room_height) == (5.0, 5.0, 3.0)
    assert cfg.realizations == 100
    assert cfg.scheme is SchemeChoice.BOTH
    link = cfg.build_link()
    assert link.power.electrical_to_optical_ratio == 3.2
    assert link.power.oe_efficiency == 0.53
    assert link.noise.psd == 1e-19
    assert link.noise.bandwidth == 20e6
    sa = cfg.build_sa()
    assert (sa.t0, sa.alpha, sa.m0, sa.beta) == (1.0, 0.995, 50, 1.0005)
    ts = cfg.build_ts()
    assert (ts.tabu_list_len, ts.candidate_list_len) == (10, 4)
    cfg.validate()


def test_override_converts_and_ignores_none():
    cfg = ExperimentConfig().override(
        users=30.0, scheme="imposed", optimizer=Optimizer.TS, sweep="led-angle", workers=None
    )
    assert cfg.users == 30 and isinstance(cfg.users, int)
    assert cfg.scheme is SchemeChoice.IMPOSED
    assert cfg.scheme.schemes == (Scheme.IMPOSED,)
    assert cfg.optimizer is Optimizer.TS
    assert cfg.sweep is SweepVariable.LED_ANGLE
    assert cfg.workers == 1


bad_overrides = [
    {"users": 20.5},
    {"scheme": "sometimes"},
    {"sweep": "temperature"},
    {"subcarrier_counts": [16, "x"]},
    {"colour": "red"},
]


@pytest.mark.parametrize("case", bad_overrides)
def test_bad_override(case: dict):
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_mapping(case)


invalid_points = [
    {"scheme": "imposed", "users": 7},
    {"scheme": "both", "users": 9},
    {"leds": 3},
    {"users": 0},
    {"subcarriers": 15},
    {"led_semi_angle": 90.0},
    {"fov_semi_angle": 0.0},
    {"room_height": 0.5},
    {"spread_limit": 1.5},
    {"sa_alpha": 1.0},
]


@pytest.mark.parametrize("case", invalid_points)
def test_validate_point_rejects(case: dict):
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_mapping(case).validate_point()


def test_odd_users_fine_without_imposed_scheme():
    ExperimentConfig(users=7).override(scheme="not-imposed").validate_point()


invalid_experiments = [
    {"values": []},
    {"subcarrier_counts": []},
    {"realizations": 0},
    {"workers": 0},
    {"master_seed": -1},
    {"sweep": "users", "values": [10, 15]},  # 15 is odd under the imposed scheme
    {"sweep": "subcarriers", "values": [16, 17]},
    {"sweep": "leds", "values": [4, 6]},
]


@pytest.mark.parametrize("case", invalid_experiments)
def test_validate_rejects(case: dict):
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_mapping(case).validate()


def test_validate_checks_every_subcarrier_count():
    cfg = ExperimentConfig.from_mapping({"subcarrier_counts": [16, 10, 14]})
    cfg.validate()
    with pytest.raises(ConfigurationError):
        cfg.override(subcarrier_counts=[16, 9]).validate()


sweep_parameters = [
    (SweepVariable.USERS, "users"),
    (SweepVariable.LEDS, "leds"),
    (SweepVariable.SUBCARRIERS, "subcarriers"),
    (SweepVariable.POWER, "power_dbm"),
    (SweepVariable.LED_ANGLE, "led_semi_angle"),
    (SweepVariable.FOV, "fov_semi_angle"),
    (SweepVariable.HEIGHT, "room_height"),
]


@pytest.mark.parametrize("case,expected", sweep_parameters)
def test_sweep_field_names(case: SweepVariable, expected: str):
    assert case.field_name == expected
    assert hasattr(ExperimentConfig(), expected)


def test_sweep_points():
    cfg = ExperimentConfig(sweep=SweepVariable.POWER, values=(30, 45, 55))
    points = cfg.sweep_points()
    assert [p.power_dbm for p in points] == [30.0, 45.0, 55.0]
    assert all(p.users == 20 for p in points)
    assert cfg.subcarrier_axis == (16, 32)

    by_k = ExperimentConfig(sweep=SweepVariable.SUBCARRIERS, values=(16, 32))
    assert [p.subcarrier_axis for p in by_k.sweep_points()] == [(16,), (32,)]


def test_height_sweep_moves_the_ceiling():
    cfg = ExperimentConfig(sweep=SweepVariable.HEIGHT, values=(3, 5, 7, 9))
    rooms = [p.build_room() for p in cfg.sweep_points()]
    assert [r.height for r in rooms] == [3.0, 5.0, 7.0, 9.0]
    assert {r.receiver_plane_height for r in rooms} == {0.85}


def test_mapping_round_trip():
    cfg = ExperimentConfig(users=30, scheme=SchemeChoice.IMPOSED, values=(10, 30))
    assert ExperimentConfig.from_mapping(json.loads(json.dumps(cfg.to_mapping()))) == cfg


def test_load_config(tmp_path: Path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"users": 10, "scheme": "not-imposed", "values": [10, 20]}))
    cfg = load_config(path)
    assert cfg.users == 10
    assert cfg.scheme is SchemeChoice.NOT_IMPOSED
    assert cfg.values == (10, 20)


@pytest.mark.parametrize("content", ["{not json", "[1, 2, 3]", '{"unknown_key": 1}'])
def test_load_config_errors(tmp_path: Path, content: str):
    path = tmp_path / "cfg.json"
    path.write_text(content)
    with pytest.raises(ConfigurationError):
        load_config(path)


def test_load_missing_config(tmp_path: Path):
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "missing.json")
