"""Layered run configuration for the ``segment`` command.

Values come from, lowest precedence first: built-in defaults, ``EMS_*``
environment variables (a ``.env`` file in the working directory is loaded
without overriding the real environment), a replayed run summary, a
``--config`` key=value file, and explicit command-line flags.
"""

from __future__ import annotations

import json
import os
from collections.abc import Mapping
from pathlib import Path
from typing import Any

from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from engine import EvolveParams
from levelset import InitSpec, parse_init_spec
from model import Model, ModelKind
from synth import NoiseSpec, SceneSpec


ENV_PREFIX = "EMS_"
DEFAULT_SIZE = "128x128"


class ConfigError(ValueError):
    """Raised for unreadable or invalid configuration sources."""


def parse_size(text: str) -> tuple[int, int]:
    """``"WxH"`` -> ``(width, height)``."""
    width, sep, height = text.lower().partition("x")
    try:
        if not sep:
            raise ValueError
        return int(width), int(height)
    except ValueError:
        raise ConfigError(f"size must look like WIDTHxHEIGHT, got {text!r}") from None


class SegmentConfig(BaseModel):
    """Every parameter of one segmentation run, defaults materialized."""

    model_config = ConfigDict(
        extra="forbid", frozen=True, populate_by_name=True, protected_namespaces=()
    )

    image: str | None = None
    scene: str | None = None
    size: str = DEFAULT_SIZE
    noise: str | None = None
    init: str | None = None
    model: Model = Model.EMS
    lambda_: float = Field(default=1e-7, ge=0, alias="lambda")
    sigma: float = Field(default=1.0, gt=0)
    edge_gain: float = Field(default=100.0, gt=0)
    dt_safety: float = Field(default=0.45, gt=0, le=1)
    band_beta: float = Field(default=6.0, ge=2)
    reinit_every: int = Field(default=25, ge=1)
    reinit_drift: float = Field(default=2.0, gt=0)
    max_iters: int = Field(default=2000, ge=0)
    stop_flip_fraction: float = Field(default=1e-4, ge=0)
    stop_window: int = Field(default=10, ge=1)
    snapshot_every: int = Field(default=0, ge=0)
    progress_every: int = Field(default=50, ge=0)
    presmooth: float = Field(default=0.0, ge=0)
    seed: int = 0
    truth: str | None = None
    truth_object: str | None = None
    out: str = "out"

    def evolve_params(self) -> EvolveParams:
        return EvolveParams(
            model=ModelKind(
                kind=self.model,
                lambda_=self.lambda_,
                sigma=self.sigma,
                edge_gain=self.edge_gain,
            ),
            dt_safety=self.dt_safety,
            band_beta=self.band_beta,
            reinit_every=self.reinit_every,
            reinit_drift=self.reinit_drift,
            max_iters=self.max_iters,
            stop_flip_fraction=self.stop_flip_fraction,
            stop_window=self.stop_window,
            snapshot_every=self.snapshot_every,
            progress_every=self.progress_every,
            presmooth=self.presmooth,
            seed=self.seed,
        )

    def scene_spec(self) -> SceneSpec | None:
        if self.scene is None:
            return None
        width, height = parse_size(self.size)
        return SceneSpec(kind=self.scene, width=width, height=height)

    def noise_spec(self) -> NoiseSpec | None:
        if self.noise is None:
            return None
        try:
            return NoiseSpec.parse(self.noise)
        except (ValueError, ValidationError) as error:
            raise ConfigError(f"noise: {error}") from None

    def init_spec(self, width: int, height: int) -> InitSpec:
        """The requested init, or a centered circle over most of the image."""
        if self.init:
            return parse_init_spec(self.init)
        radius = 0.4 * min(width, height)
        return parse_init_spec(f"circle:{(width - 1) / 2},{(height - 1) / 2},{radius}")

    def to_record(self) -> dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True)


KEYS = frozenset(
    field.alias or name for name, field in SegmentConfig.model_fields.items()
)


def normalize_key(key: str) -> str:
    key = key.strip().lower().replace("-", "_")
    return "lambda" if key == "lambda_" else key


def _known(values: Mapping[str, Any], source: str) -> dict[str, Any]:
    known = {}
    for key, value in values.items():
        name = normalize_key(key)
        if name not in KEYS:
            raise ConfigError(f"{source}: unknown key {key!r}")
        if value is not None:
            known[name] = value
    return known


def environment_values(environ: Mapping[str, str] | None = None) -> dict[str, str]:
    """``EMS_LAMBDA=0.001`` style defaults; unrelated ``EMS_*`` names are ignored."""
    if environ is None:
        load_dotenv(override=False)
        environ = os.environ
    values = {}
    for key, value in environ.items():
        if key.upper().startswith(ENV_PREFIX):
            name = normalize_key(key[len(ENV_PREFIX) :])
            if name in KEYS:
                values[name] = value
    return values


def file_values(path: str | os.PathLike) -> dict[str, Any]:
    if not Path(path).is_file():
        raise ConfigError(f"Config file not found: {path}")
    return _known(dotenv_values(path), f"config {path}")


def replay_values(path: str | os.PathLike) -> dict[str, Any]:
    """The ``config`` block of an earlier run summary."""
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as error:
        raise ConfigError(f"Cannot read summary {path}: {error.strerror or error}")
    except json.JSONDecodeError as error:
        raise ConfigError(f"Summary {path} is not valid JSON: {error.msg}")
    config = document.get("config") if isinstance(document, dict) else None
    if not isinstance(config, dict):
        raise ConfigError(f"Summary {path} has no config block")
    return _known(config, f"summary {path}")


def validation_message(error: ValidationError) -> str:
    """First problem as ``field: message``."""
    detail = error.errors()[0]
    location = ".".join(str(part) for part in detail["loc"]) or "config"
    return f"{location}: {detail['msg']}"


def resolve_segment_config(
    flags: Mapping[str, Any],
    config_path: str | None = None,
    replay_path: str | None = None,
    environ: Mapping[str, str] | None = None,
) -> SegmentConfig:
    """Merge every source and validate once."""
    merged: dict[str, Any] = {}
    merged.update(environment_values(environ))
    if replay_path:
        merged.update(replay_values(replay_path))
    if config_path:
        merged.update(file_values(config_path))
    merged.update(_known(flags, "flags"))
    try:
        return SegmentConfig.model_validate(merged)
    except ValidationError as error:
        raise ConfigError(validation_message(error)) from None
