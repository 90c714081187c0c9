"""Narrow band: the pixels where the evolution is computed."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from levelset.field import LevelSetField, front_pixels


MIN_BETA = 2.0


@dataclass(frozen=True, slots=True, eq=False)
class NarrowBand:
    """Flat pixel indices with ``|phi| <= beta``, plus every front pixel."""

    indices: np.ndarray
    beta: float
    shape: tuple[int, int]

    def __len__(self) -> int:
        return int(self.indices.size)

    @property
    def mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask.flat[self.indices] = True
        return mask


def narrow_band(phi: LevelSetField, beta: float) -> NarrowBand:
    if beta < MIN_BETA:
        raise ValueError(f"band half-width must be >= {MIN_BETA}, got {beta}")
    # front pixels always qualify, even if phi drifted past beta there
    selected = (np.abs(phi.phi) <= beta) | front_pixels(phi)
    indices = np.flatnonzero(selected)
    indices.setflags(write=False)
    return NarrowBand(indices=indices, beta=float(beta), shape=phi.shape)


def band_taper(phi: LevelSetField, beta: float) -> np.ndarray:
    """Speed cutoff: 1 up to ``beta / 2``, a cubic down to 0 at ``beta``.

    Band-edge pixels then barely move while their outside neighbours stay
    fixed, so no kink builds up there between redistances. Front pixels
    always get 1.
    """
    inner = beta / 2.0
    size = np.abs(phi.phi)
    ramp = (size - beta) ** 2 * (2.0 * size + beta - 3.0 * inner) / (beta - inner) ** 3
    taper = np.where(size <= inner, 1.0, np.where(size < beta, ramp, 0.0))
    return np.where(front_pixels(phi), 1.0, taper)
