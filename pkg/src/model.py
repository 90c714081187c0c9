"""Region statistics, edge function, energies and the evolution speed.

Mean separation (MS) compares the mean intensity inside the contour with
the mean outside. Edge-mean separation (EMS) weights that comparison by
an edge function ``g`` that drops towards 0 on strong edges. Both add a
length penalty ``lambda * Len(C)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from levelset import (
    FrontVanishedError,
    LevelSetField,
    NarrowBand,
    front_pixels,
    interior_mask,
)
from raster import GrayImage, ScalarField, gaussian_convolve, gradient_magnitude
from stencils import DEFAULT_CONTEXT, StencilContext, derivatives


DELTA_WIDTH = 1.5


class Model(str, Enum):
    MS = "ms"
    EMS = "ems"


class ModelKind(BaseModel):
    """Which energy to descend and its weights."""

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    kind: Model = Model.EMS
    lambda_: float = Field(default=1e-7, ge=0, alias="lambda")
    sigma: float = Field(default=1.0, gt=0)
    edge_gain: float = Field(default=100.0, gt=0)

    @property
    def edge_weighted(self) -> bool:
        return self.kind is Model.EMS


@dataclass(frozen=True, slots=True)
class RegionStats:
    mu1: float
    mu2: float
    area_in: int
    area_out: int

    @property
    def separation(self) -> float:
        return self.mu1 - self.mu2


@dataclass(frozen=True, slots=True, eq=False)
class EdgeMap:
    """Edge function ``g`` in ``(0, 1]``, fixed for the whole run."""

    g: ScalarField

    def __post_init__(self) -> None:
        values = self.g.data
        if values.min() <= 0.0 or values.max() > 1.0:
            raise ValueError("edge function must lie in (0, 1]")

    @classmethod
    def uniform(cls, shape: tuple[int, int]) -> EdgeMap:
        return cls(ScalarField(np.ones(shape)))


def edge_map(image: GrayImage, sigma: float, gain: float = 1.0) -> EdgeMap:
    """``g = 1 / (1 + gain * |grad(G_sigma * I)|)``."""
    magnitude = gradient_magnitude(gaussian_convolve(image, sigma))
    return EdgeMap(ScalarField(1.0 / (1.0 + gain * magnitude.data)))


def edge_map_for(image: GrayImage, kind: ModelKind) -> EdgeMap:
    if kind.edge_weighted:
        return edge_map(image, kind.sigma, kind.edge_gain)
    return EdgeMap.uniform(image.shape)


def _ordered_sum(values: np.ndarray) -> float:
    # sorting first makes the sum independent of pixel visiting order
    return float(np.sort(values).sum())


def region_stats(image: GrayImage, phi: LevelSetField) -> RegionStats:
    """Mean intensity inside (``phi < 0``) and outside, with pixel areas."""
    inside = interior_mask(phi)
    area_in = int(inside.sum())
    area_out = inside.size - area_in
    if area_in == 0 or area_out == 0:
        raise FrontVanishedError(
            f"Partition is degenerate: {area_in} pixels inside, {area_out} outside"
        )
    return RegionStats(
        mu1=_ordered_sum(image.data[inside]) / area_in,
        mu2=_ordered_sum(image.data[~inside]) / area_out,
        area_in=area_in,
        area_out=area_out,
    )


def smoothed_delta(phi: np.ndarray, width: float = DELTA_WIDTH) -> np.ndarray:
    """Cosine bump ``(1 + cos(pi t / w)) / (2 w)`` on ``|t| <= w``, else 0."""
    bump = (1.0 + np.cos(np.pi * phi / width)) / (2.0 * width)
    return np.where(np.abs(phi) <= width, bump, 0.0)


def curve_length(phi: LevelSetField, width: float = DELTA_WIDTH) -> float:
    """Contour length as ``sum(delta(phi) * |grad phi|)``."""
    norm = derivatives(phi).grad_norm
    return float((smoothed_delta(phi.phi, width) * norm).sum())


def mean_front_edge(phi: LevelSetField, edge: EdgeMap) -> float:
    front = front_pixels(phi)
    if not front.any():
        raise FrontVanishedError("Level set has no front pixels")
    return float(edge.g.data[front].mean())


def scalar_energy(
    image: GrayImage,
    phi: LevelSetField,
    edge: EdgeMap,
    kind: ModelKind,
    stats: RegionStats | None = None,
) -> float:
    """Monitored energy ``-g_bar/2 (mu1 - mu2)^2 + lambda Len``.

    ``g_bar`` is the mean edge function over front pixels (1 for MS). The
    velocity itself uses ``g`` pointwise; this scalar is for monitoring.
    """
    stats = stats or region_stats(image, phi)
    g_bar = mean_front_edge(phi, edge) if kind.edge_weighted else 1.0
    separation = -0.5 * g_bar * stats.separation**2
    if kind.lambda_ == 0:
        return separation
    return separation + kind.lambda_ * curve_length(phi)


@dataclass(frozen=True, slots=True, eq=False)
class Velocity:
    """Band speeds for one step; every field is zero off the band.

    ``bound`` is the speed magnitude with ``g`` taken as 1. The engine sizes
    its time step on it, so edge damping slows the front instead of being
    rescaled away.
    """

    speed: ScalarField
    bound: ScalarField
    grad_norm: ScalarField


def velocity(
    image: GrayImage,
    phi: LevelSetField,
    edge: EdgeMap,
    stats: RegionStats,
    kind: ModelKind,
    band: NarrowBand,
    ctx: StencilContext = DEFAULT_CONTEXT,
) -> Velocity:
    parts = derivatives(phi)
    intensity = image.data
    inner = (intensity - stats.mu1) / stats.area_in
    outer = (intensity - stats.mu2) / stats.area_out
    region = (stats.mu2 - stats.mu1) * (inner + outer)
    length = kind.lambda_ * parts.curvature(ctx)
    g = edge.g.data if kind.edge_weighted else 1.0
    speed = np.zeros(phi.shape)
    speed.flat[band.indices] = (g * region + length).flat[band.indices]
    bound = np.zeros(phi.shape)
    bound.flat[band.indices] = (np.abs(region) + np.abs(length)).flat[band.indices]
    return Velocity(ScalarField(speed), ScalarField(bound), ScalarField(parts.grad_norm))


def velocity_field(
    image: GrayImage,
    phi: LevelSetField,
    edge: EdgeMap,
    stats: RegionStats,
    kind: ModelKind,
    band: NarrowBand,
    ctx: StencilContext = DEFAULT_CONTEXT,
) -> tuple[ScalarField, ScalarField]:
    """Normal speed ``F`` on the band (zero elsewhere) and ``|grad phi|``.

    ``F = g (mu2 - mu1) ((I - mu1)/|in| + (I - mu2)/|out|) + lambda kappa``;
    ``phi`` moves by ``F |grad phi|`` per unit time, so ``F > 0`` pushes the
    contour inwards.
    """
    result = velocity(image, phi, edge, stats, kind, band, ctx)
    return result.speed, result.grad_norm
