"""Signed-distance level sets: initialization, redistancing, narrow bands."""

from .band import NarrowBand, band_taper, narrow_band
from .errors import FrontVanishedError, InitSpecError
from .field import LevelSetField, dissolve_isolated, front_pixels, interior_mask
from .redistance import FrontSegments, front_segments, redistance
from .shapes import (
    Circle,
    Grid,
    InitSpec,
    MaskFile,
    Rect,
    circle_sdf,
    init_from_spec,
    mask_sdf,
    parse_init_spec,
    rect_sdf,
)

__all__ = [
    "Circle",
    "FrontSegments",
    "FrontVanishedError",
    "Grid",
    "InitSpec",
    "InitSpecError",
    "LevelSetField",
    "MaskFile",
    "NarrowBand",
    "Rect",
    "band_taper",
    "circle_sdf",
    "dissolve_isolated",
    "front_pixels",
    "front_segments",
    "init_from_spec",
    "interior_mask",
    "mask_sdf",
    "narrow_band",
    "parse_init_spec",
    "rect_sdf",
    "redistance",
]
