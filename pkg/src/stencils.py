"""Finite-difference kernels on the unit grid.

Point kernels take ``(x, y)`` = (column, row) and need a one-pixel margin.
Field kernels first extend the grid by mirroring about the border pixels,
so every pixel has a full stencil and the normal derivative across the
border is zero.

Sums are grouped so that mirroring or rotating the input by 90 degrees
permutes operands of commutative operations only; the results transform
exactly, not just to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from levelset import LevelSetField
from raster import ScalarField


class BorderPixelError(IndexError):
    """Raised when a point stencil is evaluated without a one-pixel margin."""


@dataclass(frozen=True, slots=True)
class StencilContext:
    epsilon: float = 1e-8
    h: float = 1.0

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.h != 1.0:
            raise ValueError("grid spacing is fixed at one pixel")


DEFAULT_CONTEXT = StencilContext()


def _values(phi: LevelSetField | ScalarField | np.ndarray) -> np.ndarray:
    if isinstance(phi, LevelSetField):
        return phi.phi
    if isinstance(phi, ScalarField):
        return phi.data
    return np.asarray(phi, dtype=np.float64)


def _interior(phi, x: int, y: int) -> np.ndarray:
    values = _values(phi)
    height, width = values.shape
    if not (1 <= x <= width - 2 and 1 <= y <= height - 2):
        raise BorderPixelError(
            f"pixel ({x}, {y}) has no one-pixel margin in a {width}x{height} grid; "
            "mirror-extend the field first"
        )
    return values


def _curvature(vx, vy, vxx, vyy, vxy, epsilon: float):
    vx2 = vx * vx
    vy2 = vy * vy
    numerator = (vxx * vy2 + vyy * vx2) - 2.0 * vxy * (vx * vy)
    return numerator / (vx2 + vy2 + epsilon * epsilon) ** 1.5


def vx(phi, x: int, y: int) -> float:
    v = _interior(phi, x, y)
    return float((v[y, x + 1] - v[y, x - 1]) / 2.0)


def vy(phi, x: int, y: int) -> float:
    v = _interior(phi, x, y)
    return float((v[y + 1, x] - v[y - 1, x]) / 2.0)


def vxx(phi, x: int, y: int) -> float:
    v = _interior(phi, x, y)
    return float((v[y, x + 1] + v[y, x - 1]) - 2.0 * v[y, x])


def vyy(phi, x: int, y: int) -> float:
    v = _interior(phi, x, y)
    return float((v[y + 1, x] + v[y - 1, x]) - 2.0 * v[y, x])


def vxy(phi, x: int, y: int) -> float:
    """Four-corner mixed difference."""
    v = _interior(phi, x, y)
    diagonal = v[y + 1, x + 1] + v[y - 1, x - 1]
    anti_diagonal = v[y - 1, x + 1] + v[y + 1, x - 1]
    return float((diagonal - anti_diagonal) / 4.0)


def curvature(phi, x: int, y: int, ctx: StencilContext = DEFAULT_CONTEXT) -> float:
    """Curvature of the level line through ``(x, y)``; positive for convex interiors."""
    return float(
        _curvature(
            vx(phi, x, y),
            vy(phi, x, y),
            vxx(phi, x, y),
            vyy(phi, x, y),
            vxy(phi, x, y),
            ctx.epsilon,
        )
    )


@dataclass(frozen=True, slots=True, eq=False)
class Derivatives:
    """First and second central differences of a whole field."""

    vx: np.ndarray
    vy: np.ndarray
    vxx: np.ndarray
    vyy: np.ndarray
    vxy: np.ndarray

    @property
    def grad_norm(self) -> np.ndarray:
        return np.sqrt(self.vx * self.vx + self.vy * self.vy)

    def curvature(self, ctx: StencilContext = DEFAULT_CONTEXT) -> np.ndarray:
        return _curvature(self.vx, self.vy, self.vxx, self.vyy, self.vxy, ctx.epsilon)


def derivatives(phi: LevelSetField | ScalarField | np.ndarray) -> Derivatives:
    padded = np.pad(_values(phi), 1, mode="reflect")
    center = padded[1:-1, 1:-1]
    east, west = padded[1:-1, 2:], padded[1:-1, :-2]
    south, north = padded[2:, 1:-1], padded[:-2, 1:-1]
    diagonal = padded[2:, 2:] + padded[:-2, :-2]
    anti_diagonal = padded[:-2, 2:] + padded[2:, :-2]
    return Derivatives(
        vx=(east - west) / 2.0,
        vy=(south - north) / 2.0,
        vxx=(east + west) - 2.0 * center,
        vyy=(south + north) - 2.0 * center,
        vxy=(diagonal - anti_diagonal) / 4.0,
    )


def gradient_norm(phi: LevelSetField | ScalarField | np.ndarray) -> ScalarField:
    """``|grad phi|`` by central differences on the mirror-extended grid."""
    return ScalarField(derivatives(phi).grad_norm)


def curvature_field(
    phi: LevelSetField | ScalarField | np.ndarray,
    ctx: StencilContext = DEFAULT_CONTEXT,
) -> ScalarField:
    return ScalarField(derivatives(phi).curvature(ctx))
