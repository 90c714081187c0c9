"""Piecewise-constant synthetic scenes with per-object ground truth.

Pixels belong to a shape when their center lies inside it: circles are
closed disks ``(x-cx)^2 + (y-cy)^2 <= r^2`` and rectangles are inclusive
pixel ranges ``[x0, x1] x [y0, y1]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from raster import GrayImage
from raster.image import MIN_SIDE
from synth.registry import Geometry, get_registry, register_builtins


class SceneSpecError(ValueError):
    """Raised for out-of-bounds geometry or invalid intensities."""


class SceneSpec(BaseModel):
    """Declarative scene description; empty geometry/intensities use defaults."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: str = "bimodal_disk"
    width: int = Field(default=128, ge=1)
    height: int = Field(default=128, ge=1)
    geometry: dict[str, Any] = Field(default_factory=dict)
    intensities: tuple[float, ...] | None = None

    @field_validator("intensities")
    @classmethod
    def _in_unit_range(cls, value):
        if value is not None and any(not 0.0 <= level <= 1.0 for level in value):
            raise ValueError("intensities must lie in [0, 1]")
        return value

    def resolved(self) -> SceneSpec:
        """Return the spec with canonical kind and all defaults materialized."""
        register_builtins()
        entry = get_registry().get(self.kind)
        geometry = self.geometry or entry.default_geometry(self.width, self.height)
        intensities = self.intensities or entry.info.intensities
        return self.model_copy(
            update={
                "kind": entry.info.name,
                "geometry": geometry,
                "intensities": tuple(intensities),
            }
        )


@dataclass(frozen=True, slots=True, eq=False)
class GroundTruth:
    """One binary mask per nameable object."""

    masks: dict[str, np.ndarray]
    primary: str

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.masks[name]
        except KeyError:
            raise SceneSpecError(
                f"Scene has no object {name!r}; objects: {sorted(self.masks)}"
            ) from None

    @property
    def primary_mask(self) -> np.ndarray:
        return self.masks[self.primary]


def make_scene(spec: SceneSpec) -> tuple[GrayImage, GroundTruth]:
    """Render the scene image and its ground-truth masks."""
    if spec.width < MIN_SIDE or spec.height < MIN_SIDE:
        raise SceneSpecError(
            f"Scene is {spec.width}x{spec.height}; both sides must be >= {MIN_SIDE}"
        )
    spec = spec.resolved()
    entry = get_registry().get(spec.kind)
    intensities = tuple(spec.intensities)
    if len(set(intensities)) != len(intensities):
        raise SceneSpecError(f"Region intensities must be distinct, got {intensities}")

    data, masks = entry.builder(spec.width, spec.height, spec.geometry, intensities)
    for name, mask in masks.items():
        if not mask.any():
            raise SceneSpecError(f"Object {name!r} covers no pixel centers")
    primary = entry.info.primary if entry.info.primary in masks else next(iter(masks))
    for mask in masks.values():
        mask.setflags(write=False)
    return GrayImage(data), GroundTruth(masks=masks, primary=primary)


def _coords(width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    ys, xs = np.mgrid[0:height, 0:width]
    return xs.astype(np.float64), ys.astype(np.float64)


def _numbers(geometry: Geometry, key: str, count: int) -> list[float]:
    try:
        values = [float(value) for value in geometry[key]]
    except KeyError:
        raise SceneSpecError(f"geometry.{key} is required") from None
    except (TypeError, ValueError):
        raise SceneSpecError(f"geometry.{key} must be a list of numbers") from None
    if len(values) != count:
        raise SceneSpecError(f"geometry.{key} needs {count} numbers, got {len(values)}")
    return values


def _expect_levels(intensities: tuple[float, ...], count: int, names: str) -> None:
    if len(intensities) != count:
        raise SceneSpecError(
            f"Scene needs {count} intensities ({names}), got {len(intensities)}"
        )


def _disk(width: int, height: int, name: str, circle: list[float]) -> np.ndarray:
    cx, cy, r = circle
    if r <= 0:
        raise SceneSpecError(f"{name}: radius must be positive, got {r}")
    if cx - r < 0 or cy - r < 0 or cx + r > width - 1 or cy + r > height - 1:
        raise SceneSpecError(
            f"{name}: circle ({cx}, {cy}, r={r}) leaves the {width}x{height} image"
        )
    xs, ys = _coords(width, height)
    return (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r


def _box(width: int, height: int, name: str, rect: list[float]) -> np.ndarray:
    x0, y0, x1, y1 = rect
    if not (0 <= x0 <= x1 <= width - 1 and 0 <= y0 <= y1 <= height - 1):
        raise SceneSpecError(
            f"{name}: rectangle [{x0}, {y0}, {x1}, {y1}] leaves the "
            f"{width}x{height} image or has inverted corners"
        )
    xs, ys = _coords(width, height)
    return (xs >= x0) & (xs <= x1) & (ys >= y0) & (ys <= y1)


def build_bimodal_disk(width, height, geometry, intensities):
    _expect_levels(intensities, 2, "disk, background")
    disk = _disk(width, height, "disk", _numbers(geometry, "disk", 3))
    data = np.where(disk, intensities[0], intensities[1])
    return data, {"disk": disk}


def build_triple_junction(width, height, geometry, intensities):
    _expect_levels(intensities, 3, "background, black, white")
    square_rect = _numbers(geometry, "square", 4)
    square = _box(width, height, "square", square_rect)
    split = float(geometry.get("split", (square_rect[0] + square_rect[2] + 1) / 2))
    if not square_rect[0] < split <= square_rect[2]:
        raise SceneSpecError(
            f"split column {split} must fall inside the square "
            f"({square_rect[0]}, {square_rect[2]}]"
        )
    xs, _ = _coords(width, height)
    black = square & (xs < split)
    white = square & (xs >= split)
    data = np.full((height, width), intensities[0])
    data[black] = intensities[1]
    data[white] = intensities[2]
    return data, {"square": square, "black": black, "white": white}


def build_four_region(width, height, geometry, intensities):
    _expect_levels(intensities, 3, "background, black, white")
    black = _box(width, height, "black", _numbers(geometry, "black", 4))
    white = _box(width, height, "white", _numbers(geometry, "white", 4))
    if (black & white).any():
        raise SceneSpecError("black and white rectangles must not overlap")
    data = np.full((height, width), intensities[0])
    data[black] = intensities[1]
    data[white] = intensities[2]
    return data, {"black": black, "white": white}


def build_two_cells(width, height, geometry, intensities):
    _expect_levels(intensities, 3, "background, cell_a, cell_b")
    cell_a = _disk(width, height, "cell_a", _numbers(geometry, "cell_a", 3))
    cell_b = _disk(width, height, "cell_b", _numbers(geometry, "cell_b", 3))
    if (cell_a & cell_b).any():
        raise SceneSpecError("cells must not overlap")
    data = np.full((height, width), intensities[0])
    data[cell_a] = intensities[1]
    data[cell_b] = intensities[2]
    return data, {"cells": cell_a | cell_b, "cell_a": cell_a, "cell_b": cell_b}


def build_custom(width, height, geometry, intensities):
    """Objects painted in order over the background, later ones on top.

    ``geometry = {"objects": [{"name": "a", "circle": [cx, cy, r]},
    {"name": "b", "rect": [x0, y0, x1, y1]}]}``; ``intensities`` lists the
    background level followed by one level per object.
    """
    objects = geometry.get("objects")
    if not isinstance(objects, list) or not objects:
        raise SceneSpecError("custom scenes need a non-empty geometry.objects list")
    _expect_levels(intensities, len(objects) + 1, "background plus one per object")
    data = np.full((height, width), intensities[0])
    masks: dict[str, np.ndarray] = {}
    for index, item in enumerate(objects):
        name = str(item.get("name", f"object{index}"))
        if name in masks:
            raise SceneSpecError(f"duplicate object name {name!r}")
        if "circle" in item:
            mask = _disk(width, height, name, _numbers(item, "circle", 3))
        elif "rect" in item:
            mask = _box(width, height, name, _numbers(item, "rect", 4))
        else:
            raise SceneSpecError(f"object {name!r} needs a 'circle' or 'rect'")
        data[mask] = intensities[index + 1]
        masks[name] = mask
    return data, masks


def _scale(width: int, height: int) -> float:
    return min(width, height) / 128.0


def bimodal_defaults(width: int, height: int) -> Geometry:
    return {"disk": [width // 2, height // 2, 30.0 * _scale(width, height)]}


def triple_junction_defaults(width: int, height: int) -> Geometry:
    x0, x1 = width // 4, width - width // 4 - 1
    y0, y1 = height // 4, height - height // 4 - 1
    # black part 36 of 64 columns so the region means do not balance exactly
    split = x0 + round(0.5625 * (x1 - x0 + 1))
    return {"square": [x0, y0, x1, y1], "split": split}


def four_region_defaults(width: int, height: int) -> Geometry:
    y0, y1 = 5 * height // 16, 11 * height // 16 - 1
    return {
        "black": [width // 8, y0, 7 * width // 16 - 1, y1],
        "white": [9 * width // 16, y0, 7 * width // 8 - 1, y1],
    }


def two_cells_defaults(width: int, height: int) -> Geometry:
    sx, sy, s = width / 128.0, height / 128.0, _scale(width, height)
    return {
        "cell_a": [44.0 * sx, 60.0 * sy, 18.0 * s],
        "cell_b": [86.0 * sx, 70.0 * sy, 22.0 * s],
    }


def custom_defaults(width: int, height: int) -> Geometry:
    circle = bimodal_defaults(width, height)["disk"]
    return {"objects": [{"name": "object", "circle": circle}]}


BUILTIN_SCENES = (
    (
        "bimodal_disk",
        build_bimodal_disk,
        dict(
            objects=("disk",),
            primary="disk",
            intensities=(1.0, 0.0),
            default_geometry=bimodal_defaults,
            aliases=("bimodal",),
        ),
    ),
    (
        "triple_junction",
        build_triple_junction,
        dict(
            objects=("square", "black", "white"),
            primary="square",
            intensities=(0.5, 0.0, 1.0),
            default_geometry=triple_junction_defaults,
            aliases=("trimodal",),
        ),
    ),
    (
        "four_region",
        build_four_region,
        dict(
            objects=("black", "white"),
            primary="black",
            intensities=(0.5, 0.0, 1.0),
            default_geometry=four_region_defaults,
        ),
    ),
    (
        "two_cells",
        build_two_cells,
        dict(
            objects=("cells", "cell_a", "cell_b"),
            primary="cells",
            intensities=(0.1, 0.75, 0.9),
            default_geometry=two_cells_defaults,
            aliases=("cells",),
        ),
    ),
    (
        "custom",
        build_custom,
        dict(
            objects=("object",),
            primary="object",
            intensities=(0.0, 1.0),
            default_geometry=custom_defaults,
        ),
    ),
)
