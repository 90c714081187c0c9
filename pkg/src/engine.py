"""Explicit narrow-band evolution of the level set towards a steady partition."""

from __future__ import annotations

import csv
import io
import os
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from emitter import Emitter, HumanEmitter
from levelset import (
    FrontVanishedError,
    InitSpec,
    LevelSetField,
    band_taper,
    dissolve_isolated,
    init_from_spec,
    interior_mask,
    narrow_band,
    redistance,
)
from model import ModelKind, edge_map_for, region_stats, scalar_energy, velocity
from raster import GrayImage, ScalarField, gaussian_convolve, write_atomic
from stencils import StencilContext, gradient_norm


SPEED_FLOOR = 1e-12
TRACE_COLUMNS = ("iter", "energy", "mu1", "mu2", "area_in")


class Termination(str, Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    FRONT_VANISHED = "front_vanished"


class EvolveParams(BaseModel):
    """Time stepping, band and stopping controls for one run."""

    model_config = ConfigDict(extra="forbid", frozen=True, protected_namespaces=())

    model: ModelKind = Field(default_factory=ModelKind)
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
    epsilon: float = Field(default=1e-8, gt=0)

    @property
    def clamp(self) -> float:
        # band edge stays one pixel inside the redistanced region
        return self.band_beta + 1.0


@dataclass(frozen=True, slots=True)
class TraceRow:
    """State at the start of an iteration."""

    iteration: int
    energy: float
    mu1: float
    mu2: float
    area_in: int
    after_redistance: bool = False


@dataclass(frozen=True, slots=True, eq=False)
class SegmentationResult:
    final_phi: LevelSetField
    iterations: int
    termination: Termination
    energy_trace: tuple[TraceRow, ...] = ()
    snapshots: tuple[tuple[int, np.ndarray], ...] = ()
    redistances: int = 0
    dissolved_pixels: int = 0
    max_redistance_flips: int = 0
    params: EvolveParams = field(default_factory=EvolveParams)

    @property
    def final_mask(self) -> np.ndarray:
        return interior_mask(self.final_phi)


def step(
    phi: LevelSetField,
    speed: ScalarField,
    dt: float,
    grad_norm: ScalarField | None = None,
) -> LevelSetField:
    """Forward Euler ``phi + dt * F * |grad phi|``.

    Pixels with ``F = 0`` keep ``phi`` exactly.
    """
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    norm = grad_norm if grad_norm is not None else gradient_norm(phi)
    moved = speed.data != 0.0
    return LevelSetField(
        np.where(moved, phi.phi + dt * speed.data * norm.data, phi.phi)
    )


def _initial_field(image: GrayImage, init: InitSpec | LevelSetField) -> LevelSetField:
    if isinstance(init, LevelSetField):
        if init.shape != image.shape:
            raise ValueError(
                f"Initial level set shape {init.shape} does not match image "
                f"shape {image.shape}"
            )
        return init
    return init_from_spec(init, image.width, image.height)


def evolve(
    image: GrayImage,
    init: InitSpec | LevelSetField,
    params: EvolveParams | None = None,
    emitter: Emitter | None = None,
) -> SegmentationResult:
    """Descend the model energy from ``init`` until the mask stops changing.

    Runs until the pixels changing side over the last ``stop_window``
    iterations average below ``stop_flip_fraction * N`` per iteration,
    ``max_iters`` is reached, or the interior or exterior becomes empty.
    The edge function is computed once.

    The time step is sized on the pixels moving towards the contour, using
    the speed with ``g = 1``; a pixel moving away can never cross it and is
    only capped at the clamp value.
    """
    params = params or EvolveParams()
    emitter = emitter or HumanEmitter(quiet=True)
    kind = params.model
    phi = _initial_field(image, init)
    if params.max_iters == 0:
        return SegmentationResult(phi, 0, Termination.MAX_ITERS, params=params)

    if params.presmooth > 0:
        image = gaussian_convolve(image, params.presmooth)
    edge = edge_map_for(image, kind)
    ctx = StencilContext(epsilon=params.epsilon)
    try:
        phi = redistance(phi, clamp=params.clamp)
    except FrontVanishedError:
        return SegmentationResult(phi, 0, Termination.FRONT_VANISHED, params=params)

    band = narrow_band(phi, params.band_beta)
    inside = interior_mask(phi)
    flip_limit = params.stop_flip_fraction * inside.size
    trace: list[TraceRow] = []
    snapshots: list[tuple[int, np.ndarray]] = []
    termination = Termination.MAX_ITERS
    recent_flips: deque[int] = deque(maxlen=params.stop_window)
    drift = 0.0
    since_redistance = 0
    redistances = 0
    dissolved_total = 0
    worst_redistance = 0
    fresh = True
    iteration = 0

    while iteration < params.max_iters:
        try:
            stats = region_stats(image, phi)
            energy = scalar_energy(image, phi, edge, kind, stats)
        except FrontVanishedError:
            termination = Termination.FRONT_VANISHED
            break
        trace.append(
            TraceRow(iteration, energy, stats.mu1, stats.mu2, stats.area_in, fresh)
        )
        fresh = False

        moving = velocity(image, phi, edge, stats, kind, band, ctx)
        taper = band_taper(phi, params.band_beta)
        speed = ScalarField(moving.speed.data * taper)
        toward = (phi.phi * speed.data <= 0) & (speed.data != 0)
        reach = moving.bound.data * taper * moving.grad_norm.data
        motion = float(np.where(toward, reach, 0.0).max())
        dt = params.dt_safety / (motion + SPEED_FLOOR)
        stepped = step(phi, speed, dt, moving.grad_norm)
        phi = LevelSetField(np.clip(stepped.phi, -params.clamp, params.clamp))
        drift += dt * motion
        since_redistance += 1
        iteration += 1

        if since_redistance >= params.reinit_every or drift >= params.reinit_drift:
            phi, dissolved = dissolve_isolated(phi, moving.speed.data)
            before = interior_mask(phi)
            if dissolved:
                dissolved_total += dissolved
                emitter.warning(
                    "UNRESOLVABLE_REGION_DISSOLVED",
                    f"Absorbed {dissolved} single-pixel region(s) at iteration "
                    f"{iteration}",
                    iteration=iteration,
                )
            try:
                phi = redistance(phi, clamp=params.clamp)
            except FrontVanishedError:
                termination = Termination.FRONT_VANISHED
                break
            worst_redistance = max(
                worst_redistance, int((interior_mask(phi) != before).sum())
            )
            band = narrow_band(phi, params.band_beta)
            redistances += 1
            since_redistance = 0
            drift = 0.0
            fresh = True

        current = interior_mask(phi)
        flips = int((current != inside).sum())
        inside = current

        if params.snapshot_every and iteration % params.snapshot_every == 0:
            snapshots.append((iteration, current.copy()))
        if params.progress_every and iteration % params.progress_every == 0:
            emitter.progress(
                {
                    "iteration": iteration,
                    "energy": energy,
                    "mu1": stats.mu1,
                    "mu2": stats.mu2,
                    "area_in": int(current.sum()),
                    "flips": flips,
                    "dt": dt,
                }
            )

        recent_flips.append(flips)
        window_full = len(recent_flips) == params.stop_window
        if window_full and sum(recent_flips) < flip_limit * params.stop_window:
            termination = Termination.CONVERGED
            break

    return SegmentationResult(
        final_phi=phi,
        iterations=iteration,
        termination=termination,
        energy_trace=tuple(trace),
        snapshots=tuple(snapshots),
        redistances=redistances,
        dissolved_pixels=dissolved_total,
        max_redistance_flips=worst_redistance,
        params=params,
    )


def trace_csv(trace: tuple[TraceRow, ...] | list[TraceRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for row in trace:
        writer.writerow(
            [
                row.iteration,
                repr(float(row.energy)),
                repr(float(row.mu1)),
                repr(float(row.mu2)),
                row.area_in,
            ]
        )
    return buffer.getvalue()


def write_trace_csv(
    trace: tuple[TraceRow, ...] | list[TraceRow], path: str | os.PathLike
) -> None:
    write_atomic(path, trace_csv(trace).encode("utf-8"))
