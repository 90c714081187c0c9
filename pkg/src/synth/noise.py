"""Seeded noise models.

Every generator is ``numpy.random.Generator(PCG64(seed))`` so a
(seed, parameters) pair reproduces the same image on any platform
numpy supports.
"""

from __future__ import annotations

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from raster import GrayImage


RNG_ALGORITHM = "numpy.PCG64"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def add_gaussian_noise(image: GrayImage, stddev: float, seed: int) -> GrayImage:
    """Add zero-mean Gaussian noise and clamp to ``[0, 1]``."""
    if stddev < 0:
        raise ValueError(f"stddev must be >= 0, got {stddev}")
    if stddev == 0:
        return image
    noise = make_rng(seed).normal(0.0, stddev, size=image.shape)
    return GrayImage(np.clip(image.data + noise, 0.0, 1.0))


def add_salt_pepper(image: GrayImage, fraction: float, seed: int) -> GrayImage:
    """Set exactly ``round(fraction * N)`` distinct pixels to 0 or 1.

    Each chosen pixel draws 0 or 1 with equal probability; a pixel that
    already holds the drawn extreme takes the other one, so every chosen
    pixel changes.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must lie in [0, 1], got {fraction}")
    total = image.width * image.height
    count = int(round(fraction * total))
    if count == 0:
        return image
    rng = make_rng(seed)
    chosen = rng.choice(total, size=count, replace=False)
    drawn = rng.integers(0, 2, size=count).astype(np.float64)
    flat = image.data.ravel().copy()
    flat[chosen] = np.where(flat[chosen] == drawn, 1.0 - drawn, drawn)
    return GrayImage(flat.reshape(image.shape))


class NoiseSpec(BaseModel):
    """Noise request parsed from ``TYPE:PARAM:SEED``."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["gaussian", "saltpepper"]
    amount: float = Field(ge=0.0)
    seed: int = 0

    @classmethod
    def parse(cls, text: str) -> NoiseSpec:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise ValueError(f"noise must look like TYPE:PARAM[:SEED], got {text!r}")
        kind = parts[0].strip().lower().replace("_", "").replace("-", "")
        kind = "saltpepper" if kind in ("sp", "saltpepper", "saltandpepper") else kind
        try:
            amount = float(parts[1])
            seed = int(parts[2]) if len(parts) == 3 else 0
        except ValueError:
            raise ValueError(f"noise parameter and seed must be numbers in {text!r}")
        return cls(kind=kind, amount=amount, seed=seed)

    def apply(self, image: GrayImage) -> GrayImage:
        if self.kind == "gaussian":
            return add_gaussian_noise(image, self.amount, self.seed)
        return add_salt_pepper(image, self.amount, self.seed)
