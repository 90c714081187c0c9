"""Overlap scores between binary masks and summaries of energy traces."""

from __future__ import annotations

from collections.abc import Sequence
from typing import TYPE_CHECKING

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

if TYPE_CHECKING:
    from engine import TraceRow


class MaskScore(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    dice: float = Field(ge=0, le=1)
    jaccard: float = Field(ge=0, le=1)
    flipped_pixels: int = Field(ge=0)


class TraceSummary(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    iterations: int
    initial_energy: float | None = None
    final_energy: float | None = None
    min_energy: float | None = None
    final_mu1: float | None = None
    final_mu2: float | None = None
    final_area_in: int | None = None


def _pair(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ValueError(f"Mask shapes differ: {a.shape} vs {b.shape}")
    return a, b


def dice(a: np.ndarray, b: np.ndarray) -> float:
    """``2|a & b| / (|a| + |b|)``; two empty masks agree perfectly."""
    a, b = _pair(a, b)
    total = int(a.sum()) + int(b.sum())
    if total == 0:
        return 1.0
    return 2.0 * int((a & b).sum()) / total


def jaccard(a: np.ndarray, b: np.ndarray) -> float:
    """``|a & b| / |a | b|``; two empty masks agree perfectly."""
    a, b = _pair(a, b)
    union = int((a | b).sum())
    if union == 0:
        return 1.0
    return int((a & b).sum()) / union


def score_masks(predicted: np.ndarray, truth: np.ndarray) -> MaskScore:
    predicted, truth = _pair(predicted, truth)
    return MaskScore(
        dice=dice(predicted, truth),
        jaccard=jaccard(predicted, truth),
        flipped_pixels=int((predicted != truth).sum()),
    )


def summarize_trace(
    trace: Sequence[TraceRow], iterations: int | None = None
) -> TraceSummary:
    if not trace:
        return TraceSummary(iterations=iterations or 0)
    energies = [row.energy for row in trace]
    last = trace[-1]
    return TraceSummary(
        iterations=len(trace) if iterations is None else iterations,
        initial_energy=energies[0],
        final_energy=energies[-1],
        min_energy=min(energies),
        final_mu1=last.mu1,
        final_mu2=last.mu2,
        final_area_in=last.area_in,
    )
