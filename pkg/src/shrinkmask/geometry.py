"""Planar polygon measures and signed offsetting (shrink / expand).

Coordinates are pixels with x to the right and y downwards. Polygons are
simple (non self-intersecting) and stored counter-clockwise in the shoelace
sense (positive signed area for the stored vertex order).
"""

from __future__ import annotations

import math

import numpy as np
import shapely
from shapely.geometry import Polygon as _ShapelyPolygon

# joins sharper than this are bevelled during mitred offsetting
_MITRE_LIMIT = 10.0
# offset fragments below this area are rasterization noise and dropped
_MIN_PIECE_AREA = 1.0
# arc tessellation: max sagitta in pixels for round joins
_MAX_SAGITTA = 0.25
_MIN_QUAD_SEGS = 8


class Polygon:
    """Validated simple polygon.

    The constructor rejects degenerate input (fewer than 3 vertices, repeated
    consecutive vertices, zero area, self-intersection) and normalizes vertex
    order to counter-clockwise.
    """

    __slots__ = ("points",)

    def __init__(self, points, _trusted_simple: bool = False):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"expected (N, 2) vertex array, got shape {pts.shape}")
        if not np.isfinite(pts).all():
            raise ValueError("polygon vertices must be finite")
        # drop an explicit closing vertex, then reject repeated vertices
        if pts.shape[0] >= 2 and np.array_equal(pts[0], pts[-1]):
            pts = pts[:-1]
        if pts.shape[0] < 3:
            raise ValueError(f"polygon needs at least 3 vertices, got {pts.shape[0]}")
        nxt = np.concatenate([pts[1:], pts[:1]])
        if (pts == nxt).all(axis=1).any():
            raise ValueError("polygon has repeated consecutive vertices")
        area2 = _signed_area2(pts)
        if area2 == 0.0:
            raise ValueError("polygon has zero area")
        # rings produced by robust offsetting are simple by construction and
        # skip the O(n log n) re-check on the latency-critical path
        if not _trusted_simple and not _ShapelyPolygon(pts).is_valid:
            raise ValueError("polygon is self-intersecting")
        if area2 < 0.0:
            pts = pts[::-1]
        pts = np.ascontiguousarray(pts)
        pts.setflags(write=False)
        self.points = pts

    def __len__(self):
        return self.points.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Polygon):
            return NotImplemented
        return np.array_equal(self.points, other.points)

    def __repr__(self):
        return f"Polygon({self.points.tolist()!r})"


def _signed_area2(pts: np.ndarray) -> float:
    """Twice the shoelace area, signed."""
    x, y = pts[:, 0], pts[:, 1]
    xn, yn = np.concatenate([x[1:], x[:1]]), np.concatenate([y[1:], y[:1]])
    return float(np.dot(x, yn) - np.dot(xn, y))


def polygon_area(p: Polygon) -> float:
    """Absolute enclosed area in pixels^2."""
    return abs(_signed_area2(p.points)) / 2.0


def polygon_perimeter(p: Polygon) -> float:
    """Total boundary length including the closing edge, in pixels."""
    pts = p.points
    d = np.concatenate([pts[1:], pts[:1]]) - pts
    return float(np.hypot(d[:, 0], d[:, 1]).sum())


def offset_distance(p: Polygon, ratio: float = 0.4) -> float:
    """Shrink/extension distance d = area * (1 - ratio^2) / perimeter.

    ``ratio`` is the shrink ratio in (0, 1]; d is 0 when ratio is 1.
    """
    if not 0.0 < ratio <= 1.0:
        raise ValueError(f"shrink ratio must be in (0, 1], got {ratio}")
    return polygon_area(p) * (1.0 - ratio * ratio) / polygon_perimeter(p)


def _to_shapely(p: Polygon) -> _ShapelyPolygon:
    return _ShapelyPolygon(p.points)


def _from_ring(coords, trusted: bool = False) -> Polygon | None:
    """Build a Polygon from a shapely exterior ring, cleaning duplicates.

    ``trusted`` skips the simplicity re-check for rings GEOS guarantees
    valid (buffer output).
    """
    pts = np.asarray(coords, dtype=np.float64)
    if pts.shape[0] >= 2 and np.array_equal(pts[0], pts[-1]):
        pts = pts[:-1]
    prev = np.concatenate([pts[-1:], pts[:-1]])
    pts = pts[~(pts == prev).all(axis=1)]
    if pts.shape[0] < 3:
        return None
    return Polygon(pts, _trusted_simple=trusted)


def _round_quad_segs(d: float, floor: int = _MIN_QUAD_SEGS) -> int:
    """Segments per quarter arc so the sagitta stays below _MAX_SAGITTA."""
    if d <= _MAX_SAGITTA:
        return floor
    theta = 2.0 * math.acos(1.0 - _MAX_SAGITTA / d)
    return max(floor, math.ceil((math.pi / 2.0) / theta))


def shrink_polygon(p: Polygon, d: float) -> list[Polygon]:
    """Offset ``p`` inward by ``d`` pixels (mitred joins).

    Returns zero or more pieces: the polygon may vanish entirely or split at
    narrow waists. Pieces with area below 1 px^2 are discarded.
    """
    if d < 0.0:
        raise ValueError(f"shrink distance must be >= 0, got {d}")
    if d == 0.0:
        return [p]
    shrunk = _to_shapely(p).buffer(-d, join_style="mitre", mitre_limit=_MITRE_LIMIT)
    if shrunk.is_empty:
        return []
    geoms = shrunk.geoms if shrunk.geom_type == "MultiPolygon" else [shrunk]
    pieces = []
    for g in geoms:
        if g.area < _MIN_PIECE_AREA:
            continue
        piece = _from_ring(g.exterior.coords, trusted=True)
        if piece is not None:
            pieces.append(piece)
    return pieces


def expand_polygon(p: Polygon, d: float, join: str = "round") -> Polygon:
    """Offset ``p`` outward by ``d`` pixels.

    ``join`` selects the corner treatment: "round" (arc tessellation, the
    default used by detection post-processing) or "miter".
    """
    if d < 0.0:
        raise ValueError(f"expand distance must be >= 0, got {d}")
    if d == 0.0:
        return p
    grown = _expand_shapely(_to_shapely(p), d, join)
    out = _from_ring(grown.exterior.coords, trusted=True)
    if out is None:
        raise ValueError("expansion produced a degenerate polygon")
    return out


def _expand_shapely(sp: _ShapelyPolygon, d: float, join: str = "round",
                    quad_floor: int = _MIN_QUAD_SEGS) -> _ShapelyPolygon:
    """Outward offset on a raw shapely polygon; shared with post-processing."""
    if join == "round":
        grown = sp.buffer(d, join_style="round", quad_segs=_round_quad_segs(d, quad_floor))
    elif join == "miter":
        grown = sp.buffer(d, join_style="mitre", mitre_limit=_MITRE_LIMIT)
    else:
        raise ValueError(f"unknown join style {join!r}")
    if grown.geom_type == "MultiPolygon":  # outward offset keeps one piece
        grown = max(grown.geoms, key=lambda g: g.area)
    return grown
