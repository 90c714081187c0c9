"""The embedding function and the pixel sets derived from its sign."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from raster.image import ScalarField


@dataclass(frozen=True, slots=True, eq=False)
class LevelSetField:
    """Signed distance in pixels: negative inside the contour, positive outside."""

    phi: np.ndarray

    def __post_init__(self) -> None:
        phi = np.array(self.phi, dtype=np.float64, copy=True)
        if phi.ndim != 2:
            raise ValueError(f"Level set must be 2-D, got shape {phi.shape}")
        if not np.all(np.isfinite(phi)):
            raise ValueError("Level set contains NaN or infinite values")
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)

    @property
    def height(self) -> int:
        return int(self.phi.shape[0])

    @property
    def width(self) -> int:
        return int(self.phi.shape[1])

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    def as_field(self) -> ScalarField:
        return ScalarField(self.phi)

    def mirrored(self) -> LevelSetField:
        """Horizontal mirror (column order reversed)."""
        return LevelSetField(self.phi[:, ::-1])


def interior_mask(phi: LevelSetField) -> np.ndarray:
    """Pixels strictly inside the contour (``phi < 0``)."""
    return phi.phi < 0


def front_pixels(phi: LevelSetField) -> np.ndarray:
    """Pixels with a 4-neighbour on the other side of the contour."""
    inside = interior_mask(phi)
    front = np.zeros_like(inside)
    horizontal = inside[:, 1:] != inside[:, :-1]
    vertical = inside[1:, :] != inside[:-1, :]
    front[:, 1:] |= horizontal
    front[:, :-1] |= horizontal
    front[1:, :] |= vertical
    front[:-1, :] |= vertical
    return front


def dissolve_isolated(
    phi: LevelSetField, speed: np.ndarray | None = None
) -> tuple[LevelSetField, int]:
    """Absorb single pixels whose four neighbours all lie on the other side.

    Such a region is below grid resolution: central differences see no
    gradient and no curvature there, so it would never move. Borders use
    the mirrored neighbour. With ``speed`` given, a pixel whose own speed
    holds it on its side (``F < 0`` inside, ``F > 0`` outside) is kept, so
    data-supported specks survive. Returns the new field and the count.
    """
    inside = interior_mask(phi)
    padded = np.pad(inside, 1, mode="reflect")
    neighbours = (
        padded[:-2, 1:-1].astype(np.int8)
        + padded[2:, 1:-1]
        + padded[1:-1, :-2]
        + padded[1:-1, 2:]
    )
    lonely_in = inside & (neighbours == 0)
    lonely_out = ~inside & (neighbours == 4)
    if speed is not None:
        lonely_in &= ~(speed < 0)
        lonely_out &= ~(speed > 0)
    count = int(lonely_in.sum() + lonely_out.sum())
    if count == 0:
        return phi, 0
    values = np.where(lonely_in, 0.5, np.where(lonely_out, -0.5, phi.phi))
    return LevelSetField(values), count
