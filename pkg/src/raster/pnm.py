"""Netpbm graymap codec (P2 plain and P5 raw).

Header tokens may be separated by any whitespace and interleaved with
``#`` comments. Raw samples are one byte when maxval < 256, otherwise two
bytes big-endian.
"""

from __future__ import annotations

import numpy as np

from raster.errors import ImageFormatError


MAX_MAXVAL = 65535
_WHITESPACE = b" \t\r\n\v\f"


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Read ``count`` header tokens, returning them and the offset after."""
    tokens: list[bytes] = []
    pos = 0
    size = len(data)
    while len(tokens) < count:
        while pos < size and data[pos] in _WHITESPACE:
            pos += 1
        if pos >= size:
            raise ImageFormatError("Malformed header: file ends inside the header")
        if data[pos] == ord("#"):
            while pos < size and data[pos] not in b"\r\n":
                pos += 1
            continue
        start = pos
        while pos < size and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos


def _parse_int(token: bytes, name: str) -> int:
    try:
        value = int(token.decode("ascii"))
    except (UnicodeDecodeError, ValueError):
        raise ImageFormatError(f"Malformed header: {name} {token!r} is not an integer")
    if value <= 0:
        raise ImageFormatError(
            f"Malformed header: {name} must be positive, got {value}"
        )
    return value


def decode_pgm(data: bytes) -> tuple[np.ndarray, int]:
    """Decode a P2 or P5 graymap into raw integer samples and maxval."""
    if len(data) < 2 or data[:2] not in (b"P2", b"P5"):
        raise ImageFormatError("Unsupported format: expected a P2 or P5 graymap")
    magic = data[:2]
    tokens, pos = _header_tokens(data[2:], 3)
    pos += 2
    width = _parse_int(tokens[0], "width")
    height = _parse_int(tokens[1], "height")
    maxval = _parse_int(tokens[2], "maxval")
    if maxval > MAX_MAXVAL:
        raise ImageFormatError(
            f"Malformed header: maxval {maxval} exceeds {MAX_MAXVAL}"
        )
    expected = width * height

    if magic == b"P2":
        body = data[pos:].split()
        if len(body) != expected:
            raise ImageFormatError(
                f"Malformed header: declared {width}x{height} "
                f"({expected} samples) but found {len(body)}"
            )
        try:
            samples = np.array([int(token) for token in body], dtype=np.int64)
        except ValueError:
            raise ImageFormatError("Malformed body: non-integer sample in P2 data")
    else:
        # exactly one whitespace byte separates maxval from the raster
        pos += 1
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        raster = data[pos:]
        needed = expected * dtype.itemsize
        if len(raster) < needed:
            raise ImageFormatError(
                f"Malformed header: declared {width}x{height} needs {needed} bytes, "
                f"found {len(raster)}"
            )
        samples = np.frombuffer(raster[:needed], dtype=dtype).astype(np.int64)

    if samples.size and samples.max() > maxval:
        raise ImageFormatError(f"Sample value {samples.max()} exceeds maxval {maxval}")
    return samples.reshape(height, width), maxval


def encode_pgm(samples: np.ndarray, maxval: int = 255) -> bytes:
    """Encode integer samples as a raw P5 graymap."""
    height, width = samples.shape
    header = f"P5\n{width} {height}\n{maxval}\n".encode("ascii")
    dtype = ">u2" if maxval > 255 else "u1"
    return header + np.ascontiguousarray(samples, dtype=dtype).tobytes()
