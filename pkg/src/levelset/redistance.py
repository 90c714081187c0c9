"""Exact redistancing against the piecewise-linear zero contour.

The contour is rebuilt cell by cell (marching squares): on every grid
edge whose endpoints straddle the contour, the crossing is placed by
linear interpolation, and the crossings of one cell are joined by
segments. Each pixel then gets its Euclidean distance to the nearest
segment, signed by the input.

Endpoints are kept as an integer grid position plus a fractional offset
so the distance arithmetic is exactly antisymmetric under mirroring.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from levelset.errors import FrontVanishedError
from levelset.field import LevelSetField, interior_mask


# half the diagonal of a unit cell, rounded up: no segment is longer than sqrt(2)
SEGMENT_HALF_LENGTH = 0.71
CANDIDATES = 12
_CHUNK = 512


@dataclass(frozen=True, slots=True, eq=False)
class FrontSegments:
    """Segments ``(n, 2 endpoints, [x, y])`` split into grid base and offset."""

    base: np.ndarray
    offset: np.ndarray

    def __len__(self) -> int:
        return int(self.base.shape[0])

    @property
    def points(self) -> np.ndarray:
        return self.base + self.offset

    @property
    def midpoints(self) -> np.ndarray:
        points = self.points
        return (points[:, 0] + points[:, 1]) / 2.0

    @property
    def length(self) -> float:
        points = self.points
        delta = points[:, 1] - points[:, 0]
        return float(np.hypot(delta[:, 0], delta[:, 1]).sum())


def _edge_crossings(phi: np.ndarray, inside: np.ndarray, axis: int):
    """Crossing base/offset along one axis, shaped like the edge array."""
    if axis == 1:
        first, second = phi[:, :-1], phi[:, 1:]
        first_in = inside[:, :-1]
        cross = first_in != inside[:, 1:]
    else:
        first, second = phi[:-1, :], phi[1:, :]
        first_in = inside[:-1, :]
        cross = first_in != inside[1:, :]
    value_in = np.where(first_in, first, second)
    value_out = np.where(first_in, second, first)
    t = np.divide(
        value_in,
        value_in - value_out,
        out=np.zeros_like(value_in),
        where=cross,
    )
    rows, cols = np.indices(cross.shape)
    step = np.where(first_in, 1.0, -1.0)
    along = (rows if axis == 0 else cols) + (~first_in)
    across = cols if axis == 0 else rows
    # columns of the result are [x, y]
    if axis == 1:
        base = np.stack([along, across], axis=-1).astype(np.float64)
        offset = np.stack([step * t, np.zeros_like(t)], axis=-1)
    else:
        base = np.stack([across, along], axis=-1).astype(np.float64)
        offset = np.stack([np.zeros_like(t), step * t], axis=-1)
    return cross, base, offset


def front_segments(phi: LevelSetField) -> FrontSegments:
    """Marching-squares segments of the zero contour."""
    values = phi.phi
    inside = interior_mask(phi)
    h_cross, h_base, h_off = _edge_crossings(values, inside, axis=1)
    v_cross, v_base, v_off = _edge_crossings(values, inside, axis=0)

    # per cell (i, j): top, right, bottom, left edges
    edges = {
        "top": (h_cross[:-1, :], h_base[:-1, :], h_off[:-1, :]),
        "right": (v_cross[:, 1:], v_base[:, 1:], v_off[:, 1:]),
        "bottom": (h_cross[1:, :], h_base[1:, :], h_off[1:, :]),
        "left": (v_cross[:, :-1], v_base[:, :-1], v_off[:, :-1]),
    }
    count = sum(edges[name][0].astype(np.int8) for name in edges)

    a = values[:-1, :-1]
    b = values[:-1, 1:]
    c = values[1:, 1:]
    d = values[1:, :-1]
    saddle = count == 4
    center_in = ((a + c) + (b + d)) < 0
    cut_bd = saddle & (center_in == (a < 0))
    cut_ac = saddle & ~cut_bd

    selections = []
    order = ("top", "right", "bottom", "left")
    for i, first in enumerate(order):
        for second in order[i + 1 :]:
            pair = (count == 2) & edges[first][0] & edges[second][0]
            selections.append((first, second, pair))
    selections += [
        ("top", "right", cut_bd),
        ("bottom", "left", cut_bd),
        ("top", "left", cut_ac),
        ("right", "bottom", cut_ac),
    ]

    bases, offsets = [], []
    for first, second, selected in selections:
        if not selected.any():
            continue
        bases.append(
            np.stack([edges[first][1][selected], edges[second][1][selected]], axis=1)
        )
        offsets.append(
            np.stack([edges[first][2][selected], edges[second][2][selected]], axis=1)
        )
    if not bases:
        empty = np.zeros((0, 2, 2))
        return FrontSegments(base=empty, offset=empty.copy())
    return FrontSegments(base=np.concatenate(bases), offset=np.concatenate(offsets))


def _one_way(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    length2 = ab[..., 0] * ab[..., 0] + ab[..., 1] * ab[..., 1]
    projection = -(a[..., 0] * ab[..., 0] + a[..., 1] * ab[..., 1])
    u = np.divide(projection, length2, out=np.zeros_like(length2), where=length2 > 0)
    u = np.clip(u, 0.0, 1.0)
    return np.hypot(a[..., 0] + u * ab[..., 0], a[..., 1] + u * ab[..., 1])


def segment_distances(
    pixels: np.ndarray, segments: FrontSegments, index: np.ndarray
) -> np.ndarray:
    """Distance from each pixel ``(m, 2)`` to segments ``index`` ``(m, k)``."""
    pixel = pixels[:, None, :]
    a = (segments.base[index, 0] - pixel) + segments.offset[index, 0]
    b = (segments.base[index, 1] - pixel) + segments.offset[index, 1]
    return np.minimum(_one_way(a, b), _one_way(b, a))


def redistance(phi: LevelSetField, clamp: float | None = None) -> LevelSetField:
    """Replace ``phi`` by the signed distance to its own zero contour.

    Signs are taken from the input, so no pixel changes side. With
    ``clamp`` the magnitudes are capped at that value.
    """
    inside = interior_mask(phi)
    if inside.all() or not inside.any():
        raise FrontVanishedError("Level set has no sign change")
    segments = front_segments(phi)
    total = len(segments)
    limit = np.inf if clamp is None else float(clamp)

    rows, cols = np.indices(phi.shape)
    pixels = np.stack([cols.ravel(), rows.ravel()], axis=1).astype(np.float64)
    k = min(CANDIDATES, total)
    tree = cKDTree(segments.midpoints)
    mid_dist, index = tree.query(
        pixels, k=k, distance_upper_bound=limit + SEGMENT_HALF_LENGTH
    )
    mid_dist = np.asarray(mid_dist).reshape(len(pixels), k)
    index = np.asarray(index).reshape(len(pixels), k)

    found = index < total
    exact = segment_distances(pixels, segments, np.where(found, index, 0))
    best = np.where(found, exact, np.inf).min(axis=1)

    # an unexamined segment is at least (k-th midpoint distance - half length) away
    bound = mid_dist[:, -1] - SEGMENT_HALF_LENGTH
    unsure = (k < total) & (bound < best) & (bound < limit)
    pending = np.flatnonzero(unsure)
    for start in range(0, len(pending), _CHUNK):
        chosen = pending[start : start + _CHUNK]
        every = np.broadcast_to(np.arange(total), (len(chosen), total))
        best[chosen] = segment_distances(pixels[chosen], segments, every).min(axis=1)

    distance = np.minimum(best, limit).reshape(phi.shape)
    return LevelSetField(np.where(inside, -distance, distance))
