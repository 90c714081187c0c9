"""Raster exceptions."""


class ImageFormatError(ValueError):
    """Raised when an image file is unreadable, unsupported, or malformed."""
