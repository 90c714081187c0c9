"""Pixel containers shared by every stage of the pipeline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


MIN_SIDE = 3


def _frozen(array: np.ndarray) -> np.ndarray:
    data = np.array(array, dtype=np.float64, copy=True)
    data.setflags(write=False)
    return data


@dataclass(frozen=True, slots=True, eq=False)
class ScalarField:
    """Real value per pixel, stored ``[row, col]``.

    Carrier for gradients, curvature, speeds and edge maps. Values may take
    any sign or magnitude but must be finite.
    """

    data: np.ndarray

    def __post_init__(self) -> None:
        data = _frozen(self.data)
        if data.ndim != 2:
            raise ValueError(f"Field must be 2-D, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("Field contains NaN or infinite values")
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width


@dataclass(frozen=True, slots=True, eq=False)
class GrayImage:
    """Grayscale intensities normalized to ``[0, 1]``.

    Width and height are at least three pixels so every stencil has a
    one-pixel margin. The array is read-only once constructed.
    """

    data: np.ndarray

    def __post_init__(self) -> None:
        data = _frozen(self.data)
        if data.ndim != 2:
            raise ValueError(f"Image must be 2-D, got shape {data.shape}")
        height, width = data.shape
        if width < MIN_SIDE or height < MIN_SIDE:
            raise ValueError(
                f"Image is {width}x{height}; both sides must be >= {MIN_SIDE}"
            )
        if not np.all(np.isfinite(data)):
            raise ValueError("Image contains NaN or infinite values")
        if data.min() < 0.0 or data.max() > 1.0:
            raise ValueError(
                f"Intensities must lie in [0, 1], got [{data.min()}, {data.max()}]"
            )
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    @classmethod
    def constant(cls, width: int, height: int, value: float) -> GrayImage:
        return cls(np.full((height, width), value, dtype=np.float64))

    def as_field(self) -> ScalarField:
        return ScalarField(self.data)
