"""Gaussian smoothing and finite-difference gradients with unit grid spacing."""

from __future__ import annotations

import math

import numpy as np

from raster.image import GrayImage, ScalarField


def _values(field: GrayImage | ScalarField | np.ndarray) -> np.ndarray:
    if isinstance(field, (GrayImage, ScalarField)):
        return field.data
    return np.asarray(field, dtype=np.float64)


def kernel_radius(sigma: float) -> int:
    return int(math.ceil(3.0 * math.sqrt(2.0 * sigma)))


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Square window of ``exp(-|x|^2 / (4 sigma))`` normalized to unit sum.

    ``sigma`` plays the role of a variance-like scale: the kernel's variance
    is ``2 * sigma`` per axis.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    radius = kernel_radius(sigma)
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    squared = offsets[:, None] ** 2 + offsets[None, :] ** 2
    weights = np.exp(-squared / (4.0 * sigma))
    return weights / weights.sum()


def gaussian_taps(sigma: float) -> np.ndarray:
    """One side of the separable 1-D kernel, center first, normalized."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    offsets = np.arange(kernel_radius(sigma) + 1, dtype=np.float64)
    weights = np.exp(-(offsets**2) / (4.0 * sigma))
    return weights / (weights[0] + 2.0 * weights[1:].sum())


def _smooth_axis(data: np.ndarray, taps: np.ndarray, axis: int) -> np.ndarray:
    radius = len(taps) - 1
    width = [(0, 0), (0, 0)]
    width[axis] = (radius, radius)
    # "reflect" mirrors about the border pixel: ... c b | a b c ...
    padded = np.pad(data, width, mode="reflect")
    size = data.shape[axis]

    def shifted(offset: int) -> np.ndarray:
        start = radius + offset
        return np.take(padded, np.arange(start, start + size), axis=axis)

    out = taps[0] * data
    for offset in range(1, radius + 1):
        # paired taps keep the result exactly mirror-symmetric
        out = out + taps[offset] * (shifted(offset) + shifted(-offset))
    return out


def gaussian_convolve(image: GrayImage, sigma: float) -> GrayImage:
    """Smooth with the normalized kernel, mirroring the image at its borders.

    The kernel factors into two 1-D passes (columns, then rows).
    """
    taps = gaussian_taps(sigma)
    data = image.data
    smoothed = _smooth_axis(_smooth_axis(data, taps, axis=1), taps, axis=0)
    # a convex combination cannot leave the input range; clip rounding excursions
    return GrayImage(np.clip(smoothed, data.min(), data.max()))


def gradient(
    field: GrayImage | ScalarField | np.ndarray,
) -> tuple[ScalarField, ScalarField]:
    """Return ``(f_x, f_y)``: central differences inside, one-sided at borders."""
    d_rows, d_cols = np.gradient(_values(field))
    return ScalarField(d_cols), ScalarField(d_rows)


def gradient_magnitude(field: GrayImage | ScalarField | np.ndarray) -> ScalarField:
    f_x, f_y = gradient(field)
    return ScalarField(np.hypot(f_x.data, f_y.data))
