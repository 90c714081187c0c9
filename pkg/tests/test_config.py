"""Tests for layered segment configuration."""

import json

import pytest

from config import (
    ConfigError,
    SegmentConfig,
    environment_values,
    file_values,
    parse_size,
    replay_values,
    resolve_segment_config,
)
from levelset import Circle
from model import Model


def test_parse_size():
    assert parse_size("64x32") == (64, 32)
    assert parse_size("128X128") == (128, 128)
    with pytest.raises(ConfigError, match="WIDTHxHEIGHT"):
        parse_size("128")


def test_defaults_only():
    config = resolve_segment_config({}, environ={})
    assert config == SegmentConfig()
    assert config.model is Model.EMS
    assert config.reinit_drift == 2.0


def test_environment_values():
    environ = {
        "EMS_LAMBDA": "0.5",
        "EMS_MAX_ITERS": "10",
        "EMS_UNRELATED": "x",
        "HOME": "/",
    }
    assert environment_values(environ) == {"lambda": "0.5", "max_iters": "10"}


def test_precedence(tmp_path):
    summary = tmp_path / "summary.json"
    summary.write_text(
        json.dumps({"config": {"lambda": 0.25, "sigma": 2.0, "seed": 4, "model": "ms"}})
    )
    config_file = tmp_path / "run.env"
    config_file.write_text("sigma=3.0\nmax-iters=40\n")
    config = resolve_segment_config(
        {"seed": 9, "scene": "bimodal"},
        config_path=str(config_file),
        replay_path=str(summary),
        environ={"EMS_LAMBDA": "0.1", "EMS_SEED": "1", "EMS_DT_SAFETY": "0.3"},
    )
    assert config.lambda_ == 0.25
    assert config.sigma == 3.0
    assert config.max_iters == 40
    assert config.seed == 9
    assert config.dt_safety == 0.3
    assert config.model is Model.MS
    assert config.scene == "bimodal"


def test_unknown_file_key(tmp_path):
    path = tmp_path / "bad.env"
    path.write_text("lambdaa=1\n")
    with pytest.raises(ConfigError, match="unknown key 'lambdaa'"):
        file_values(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        file_values(tmp_path / "none.env")


def test_replay_requires_config_block(tmp_path):
    path = tmp_path / "summary.json"
    path.write_text(json.dumps({"status": "ok"}))
    with pytest.raises(ConfigError, match="no config block"):
        replay_values(path)


def test_replay_rejects_invalid_json(tmp_path):
    path = tmp_path / "summary.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        replay_values(path)


def test_validation_message_names_field():
    with pytest.raises(ConfigError, match="dt_safety"):
        resolve_segment_config({"dt_safety": 2.0}, environ={})


def test_record_round_trips():
    config = SegmentConfig(scene="two_cells", lambda_=0.01, init="circle:10,10,5")
    record = config.to_record()
    assert record["lambda"] == 0.01
    assert record["model"] == "ems"
    assert SegmentConfig.model_validate(record) == config


def test_evolve_params_carry_model():
    params = SegmentConfig(model="ms", lambda_=0.2, max_iters=7).evolve_params()
    assert params.model.kind is Model.MS
    assert params.model.lambda_ == 0.2
    assert params.max_iters == 7


def test_default_init_is_centered_circle():
    spec = SegmentConfig().init_spec(100, 60)
    assert spec.primitives == (Circle(cx=49.5, cy=29.5, r=24.0),)


def test_scene_and_noise_specs():
    config = SegmentConfig(scene="two_cells", size="64x48", noise="gaussian:0.1:3")
    scene = config.scene_spec()
    assert (scene.kind, scene.width, scene.height) == ("two_cells", 64, 48)
    assert config.noise_spec().seed == 3
    with pytest.raises(ConfigError, match="noise"):
        SegmentConfig(noise="gaussian").noise_spec()
