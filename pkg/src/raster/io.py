"""Image file I/O for PGM and 8-bit grayscale PNG."""

from __future__ import annotations

import io
import os
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from raster.errors import ImageFormatError
from raster.image import MIN_SIDE, GrayImage
from raster.pnm import decode_pgm, encode_pgm


PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
WRITE_MAXVAL = 255


def load_image(path: str | os.PathLike) -> GrayImage:
    """Read a PGM (P2/P5) or 8-bit grayscale PNG, normalized to ``[0, 1]``."""
    try:
        data = Path(path).read_bytes()
    except OSError as error:
        raise ImageFormatError(f"Cannot read image {path}: {error.strerror or error}")

    if data.startswith(PNG_SIGNATURE):
        samples, maxval = _decode_png(data, path)
    elif data[:2] in (b"P2", b"P5"):
        samples, maxval = decode_pgm(data)
    else:
        raise ImageFormatError(f"Unsupported image format: {path}")

    height, width = samples.shape
    if width < MIN_SIDE or height < MIN_SIDE:
        raise ImageFormatError(
            f"Image {path} is {width}x{height}; both sides must be >= {MIN_SIDE}"
        )
    return GrayImage(samples.astype(np.float64) / maxval)


def _decode_png(data: bytes, path) -> tuple[np.ndarray, int]:
    try:
        with Image.open(io.BytesIO(data)) as image:
            if image.mode != "L":
                raise ImageFormatError(
                    f"Unsupported PNG mode {image.mode!r} in {path}; "
                    "expected 8-bit grayscale"
                )
            samples = np.asarray(image, dtype=np.int64)
    except (UnidentifiedImageError, OSError) as error:
        raise ImageFormatError(f"Malformed PNG {path}: {error}")
    return samples, 255


def _quantize(values: np.ndarray) -> np.ndarray:
    return np.rint(np.clip(values, 0.0, 1.0) * WRITE_MAXVAL).astype(np.uint8)


def write_atomic(path: str | os.PathLike, content: bytes) -> None:
    """Write via a temporary sibling and rename; readers never see partial files."""
    target = Path(path)
    temp_path = target.with_name(f"{target.name}.tmp.{os.getpid()}")
    try:
        with open(temp_path, "wb") as file:
            file.write(content)
            file.flush()
            os.fsync(file.fileno())
        os.replace(temp_path, target)
    finally:
        if temp_path.exists():
            temp_path.unlink()


def _write_samples(samples: np.ndarray, path: str | os.PathLike) -> None:
    """The suffix selects PNG or PGM."""
    if Path(path).suffix.lower() == ".png":
        buffer = io.BytesIO()
        Image.fromarray(samples).save(buffer, format="PNG")
        content = buffer.getvalue()
    else:
        content = encode_pgm(samples, WRITE_MAXVAL)
    write_atomic(path, content)


def save_image(image: GrayImage, path: str | os.PathLike) -> None:
    _write_samples(_quantize(image.data), path)


def save_mask(mask: np.ndarray, path: str | os.PathLike) -> None:
    """Write a binary mask: inside pixels at maxval, outside at 0."""
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise ValueError(f"Mask must be 2-D, got shape {mask.shape}")
    _write_samples(np.where(mask, WRITE_MAXVAL, 0).astype(np.uint8), path)


def save_overlay(image: GrayImage, front: np.ndarray, path: str | os.PathLike) -> None:
    """Draw front pixels over the image in the contrasting extreme intensity."""
    front = np.asarray(front, dtype=bool)
    if front.shape != image.shape:
        raise ValueError(
            f"Front shape {front.shape} does not match image shape {image.shape}"
        )
    samples = _quantize(image.data)
    contrast = np.where(image.data < 0.5, WRITE_MAXVAL, 0).astype(np.uint8)
    _write_samples(np.where(front, contrast, samples), path)
