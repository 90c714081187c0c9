"""Grayscale images, scalar fields, file I/O, and smoothing filters."""

from .errors import ImageFormatError
from .filters import gaussian_convolve, gaussian_kernel, gradient, gradient_magnitude
from .image import GrayImage, ScalarField
from .io import load_image, save_image, save_mask, save_overlay, write_atomic

__all__ = [
    "GrayImage",
    "ImageFormatError",
    "ScalarField",
    "gaussian_convolve",
    "gaussian_kernel",
    "gradient",
    "gradient_magnitude",
    "load_image",
    "save_image",
    "save_mask",
    "save_overlay",
    "write_atomic",
]
