"""Tri-state raster masks and polygon rasterization.

Masks are 2D uint8 arrays over three cell states: NEG (0), POS (1) and the
ignore state IGN (255). A binary mask is the IGN-free restriction. Cell (i, j)
covers the half-open pixel square [j, j+1) x [i, i+1); its sampling point is
the pixel center (j + 0.5, i + 0.5).
"""

from __future__ import annotations

import numpy as np

from .geometry import Polygon

NEG = 0
POS = 1
IGN = 255


def _as_mask(a, name: str = "mask", binary: bool = False) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.size == 0:
        raise ValueError(f"{name} must be a non-empty 2D array")
    if a.dtype != np.uint8:
        a = a.astype(np.uint8)
    if binary:
        if a.max() > POS:
            raise ValueError(f"{name} must be binary (0/1 cells only)")
    elif bool(((a > POS) & (a != IGN)).any()):
        raise ValueError(f"{name} contains cell values outside {{0, 1, 255}}")
    return a


def rasterize(p: Polygon, height: int, width: int) -> np.ndarray:
    """Rasterize a polygon into a binary mask of the given dimensions.

    A cell is set iff its pixel center lies inside the polygon under the
    non-zero winding rule; geometry outside the grid is clipped.
    """
    if height <= 0 or width <= 0:
        raise ValueError(f"mask dimensions must be positive, got {height}x{width}")
    out = np.zeros((height, width), np.uint8)
    pts = p.points
    xs, ys = pts[:, 0], pts[:, 1]
    # rows/cols whose centers can fall inside the polygon's bounding box
    r0 = max(0, int(np.ceil(ys.min() - 0.5)))
    r1 = min(height - 1, int(np.floor(ys.max() - 0.5)))
    c0 = max(0, int(np.ceil(xs.min() - 0.5)))
    c1 = min(width - 1, int(np.floor(xs.max() - 0.5)))
    if r0 > r1 or c0 > c1:
        return out
    x1, y1 = xs, ys
    x2, y2 = np.roll(xs, -1), np.roll(ys, -1)
    yc = np.arange(r0, r1 + 1, dtype=np.float64)[:, None] + 0.5
    up = (y1 <= yc) & (y2 > yc)
    dn = (y2 <= yc) & (y1 > yc)
    cross = up | dn
    rows_idx, edge_idx = np.nonzero(cross)
    if rows_idx.size == 0:
        return out
    ya, yb = y1[edge_idx], y2[edge_idx]
    xa, xb = x1[edge_idx], x2[edge_idx]
    t = (yc[rows_idx, 0] - ya) / (yb - ya)
    xc = xa + t * (xb - xa)
    sign = np.where(up[rows_idx, edge_idx], 1, -1).astype(np.int32)
    # a crossing at xc affects every cell whose center x >= xc
    ncols = c1 - c0 + 1
    j = np.ceil(xc - 0.5).astype(np.int64) - c0
    j = np.clip(j, 0, ncols)  # ncols = sentinel column, dropped below
    delta = np.zeros((r1 - r0 + 1, ncols + 1), np.int32)
    np.add.at(delta, (rows_idx, j), sign)
    winding = np.cumsum(delta[:, :ncols], axis=1)
    out[r0:r1 + 1, c0:c1 + 1] = winding != 0
    return out


def ors(a, b) -> np.ndarray:
    """Combine two tri-state masks: ignore absorbs, else positive dominates."""
    a = _as_mask(a, "a")
    b = _as_mask(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"mask shapes differ: {a.shape} vs {b.shape}")
    out = np.where((a == POS) | (b == POS), POS, NEG).astype(np.uint8)
    out[(a == IGN) | (b == IGN)] = IGN
    return out


def reverse(a) -> np.ndarray:
    """Per-cell complement of a binary mask."""
    a = _as_mask(a, "mask", binary=True)
    return (a ^ 1).astype(np.uint8)


def ignore_positive(a) -> np.ndarray:
    """Turn the positive region of a binary mask into ignore cells."""
    a = _as_mask(a, "mask", binary=True)
    return np.where(a == POS, IGN, NEG).astype(np.uint8)
