"""Initial contours: primitive shapes, their text form, and exact SDFs.

Text form, primitives joined by commas::

    circle:cx,cy,r
    rect:x0,y0,x1,y1
    grid:rows,cols,r,spacing      (grid centered on the image)
    mask:PATH                     (non-zero pixels are inside)

A token containing ``:`` starts a new primitive, so
``circle:20,20,8,rect:40,40,60,60`` is a union of two shapes.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from scipy import ndimage

from levelset.errors import InitSpecError
from levelset.field import LevelSetField


class _Primitive(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class Circle(_Primitive):
    shape: Literal["circle"] = "circle"
    cx: float
    cy: float
    r: float = Field(gt=0)


class Rect(_Primitive):
    shape: Literal["rect"] = "rect"
    x0: float
    y0: float
    x1: float
    y1: float

    @model_validator(mode="after")
    def _ordered(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("rect needs x1 > x0 and y1 > y0")
        return self


class Grid(_Primitive):
    shape: Literal["grid"] = "grid"
    rows: int = Field(ge=1)
    cols: int = Field(ge=1)
    r: float = Field(gt=0)
    spacing: float = Field(gt=0)

    def circles(self, width: int, height: int) -> list[Circle]:
        mid_x, mid_y = (width - 1) / 2.0, (height - 1) / 2.0
        return [
            Circle(
                cx=mid_x + (col - (self.cols - 1) / 2.0) * self.spacing,
                cy=mid_y + (row - (self.rows - 1) / 2.0) * self.spacing,
                r=self.r,
            )
            for row in range(self.rows)
            for col in range(self.cols)
        ]


class MaskFile(_Primitive):
    shape: Literal["mask"] = "mask"
    path: str


Primitive = Annotated[
    Union[Circle, Rect, Grid, MaskFile], Field(discriminator="shape")
]


class InitSpec(BaseModel):
    """Union of primitives describing the initial contour."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    primitives: tuple[Primitive, ...] = Field(min_length=1)

    @classmethod
    def parse(cls, text: str) -> InitSpec:
        return parse_init_spec(text)

    def to_text(self) -> str:
        return ",".join(_primitive_text(primitive) for primitive in self.primitives)

    def __str__(self) -> str:
        return self.to_text()


_ARITY = {"circle": 3, "rect": 4, "grid": 4}


def _number_text(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def _primitive_text(primitive) -> str:
    if isinstance(primitive, MaskFile):
        return f"mask:{primitive.path}"
    fields = [name for name in type(primitive).model_fields if name != "shape"]
    values = ",".join(_number_text(getattr(primitive, name)) for name in fields)
    return f"{primitive.shape}:{values}"


def parse_init_spec(text: str) -> InitSpec:
    """Parse the comma-joined primitive list into an :class:`InitSpec`."""
    groups: list[tuple[str, list[str]]] = []
    for token in (part.strip() for part in text.split(",")):
        if not token:
            continue
        if ":" in token:
            name, _, first = token.partition(":")
            groups.append((name.strip().lower(), [first.strip()] if first else []))
        elif groups:
            groups[-1][1].append(token)
        else:
            raise InitSpecError(f"Init spec must start with SHAPE:..., got {token!r}")
    if not groups:
        raise InitSpecError("Init spec is empty")

    primitives = []
    for name, args in groups:
        if name == "mask":
            if len(args) != 1 or not args[0]:
                raise InitSpecError("mask needs exactly one path: mask:PATH")
            primitives.append(MaskFile(path=args[0]))
            continue
        if name not in _ARITY:
            raise InitSpecError(
                f"Unknown init shape {name!r}; expected circle, rect, grid or mask"
            )
        if len(args) != _ARITY[name]:
            raise InitSpecError(
                f"{name} takes {_ARITY[name]} numbers, got {len(args)}: {args}"
            )
        try:
            values = [float(arg) for arg in args]
        except ValueError:
            raise InitSpecError(f"{name} arguments must be numbers, got {args}")
        try:
            if name == "circle":
                primitives.append(Circle(cx=values[0], cy=values[1], r=values[2]))
            elif name == "rect":
                x0, y0, x1, y1 = values
                primitives.append(Rect(x0=x0, y0=y0, x1=x1, y1=y1))
            else:
                if not all(value.is_integer() for value in values[:2]):
                    raise InitSpecError("grid rows and cols must be integers")
                rows, cols, r, spacing = values
                primitives.append(
                    Grid(rows=int(rows), cols=int(cols), r=r, spacing=spacing)
                )
        except ValidationError as error:
            detail = error.errors()[0]
            raise InitSpecError(f"{name}: {detail['msg']}") from None
    return InitSpec(primitives=tuple(primitives))


def _coords(width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    ys, xs = np.mgrid[0:height, 0:width]
    return xs.astype(np.float64), ys.astype(np.float64)


# pixel centers exactly on a contour count as inside (closed shapes)
BOUNDARY_NUDGE = 1e-9


def _closed(sdf: np.ndarray) -> np.ndarray:
    return np.where(sdf == 0.0, -BOUNDARY_NUDGE, sdf)


def circle_sdf(width: int, height: int, cx: float, cy: float, r: float) -> np.ndarray:
    xs, ys = _coords(width, height)
    return _closed(np.hypot(xs - cx, ys - cy) - r)


def rect_sdf(
    width: int, height: int, x0: float, y0: float, x1: float, y1: float
) -> np.ndarray:
    """Exact signed distance to an axis-aligned box."""
    xs, ys = _coords(width, height)
    qx = np.abs(xs - (x0 + x1) / 2.0) - (x1 - x0) / 2.0
    qy = np.abs(ys - (y0 + y1) / 2.0) - (y1 - y0) / 2.0
    outside = np.hypot(np.maximum(qx, 0.0), np.maximum(qy, 0.0))
    inside = np.minimum(np.maximum(qx, qy), 0.0)
    return _closed(outside + inside)


def mask_sdf(inside: np.ndarray) -> np.ndarray:
    """Signed distance of a binary mask, offset half a pixel to each side."""
    inside = np.asarray(inside, dtype=bool)
    return (
        ndimage.distance_transform_edt(~inside)
        - ndimage.distance_transform_edt(inside)
        + np.where(inside, 0.5, -0.5)
    )


def _circle_meets_domain(circle: Circle, width: int, height: int) -> bool:
    nearest_x = min(max(circle.cx, 0.0), width - 1.0)
    nearest_y = min(max(circle.cy, 0.0), height - 1.0)
    return math.hypot(circle.cx - nearest_x, circle.cy - nearest_y) < circle.r


def _rect_meets_domain(rect: Rect, width: int, height: int) -> bool:
    return rect.x0 < width - 1 and rect.x1 > 0 and rect.y0 < height - 1 and rect.y1 > 0


def _load_mask(path: str, width: int, height: int) -> np.ndarray:
    from raster import ImageFormatError, load_image

    if not Path(path).exists():
        raise InitSpecError(f"Init mask not found: {path}")
    try:
        image = load_image(path)
    except ImageFormatError as error:
        raise InitSpecError(f"Init mask {path}: {error}") from None
    if image.shape != (height, width):
        raise InitSpecError(
            f"Init mask {path} is {image.width}x{image.height}, "
            f"image is {width}x{height}"
        )
    return image.data > 0


def _outside(primitive) -> InitSpecError:
    return InitSpecError(f"{_primitive_text(primitive)} lies outside the image")


def init_from_spec(spec: InitSpec, width: int, height: int) -> LevelSetField:
    """Union of the primitives' exact signed distances (pointwise minimum)."""
    if not spec.primitives:
        raise InitSpecError("Init spec has no primitives")
    phi = np.full((height, width), np.inf)
    for primitive in spec.primitives:
        if isinstance(primitive, Circle):
            if not _circle_meets_domain(primitive, width, height):
                raise _outside(primitive)
            sdf = circle_sdf(width, height, primitive.cx, primitive.cy, primitive.r)
        elif isinstance(primitive, Rect):
            if not _rect_meets_domain(primitive, width, height):
                raise _outside(primitive)
            sdf = rect_sdf(
                width, height, primitive.x0, primitive.y0, primitive.x1, primitive.y1
            )
        elif isinstance(primitive, Grid):
            circles = [
                circle
                for circle in primitive.circles(width, height)
                if _circle_meets_domain(circle, width, height)
            ]
            if not circles:
                raise _outside(primitive)
            sdf = np.min(
                [circle_sdf(width, height, c.cx, c.cy, c.r) for c in circles], axis=0
            )
        else:
            inside = _load_mask(primitive.path, width, height)
            if not inside.any():
                raise InitSpecError(f"Init mask {primitive.path} has no inside pixels")
            sdf = mask_sdf(inside)
        phi = np.minimum(phi, sdf)
    return LevelSetField(phi)
