"""Shared test helpers: random geometry, scene construction, and the
brute-force margin-label oracle."""

import numpy as np
import shapely
from shapely.geometry import Polygon as ShapelyPolygon

from shrinkmask.formats import Annotation, SceneSample
from shrinkmask.geometry import Polygon, offset_distance, shrink_polygon
from shrinkmask.labels import scaled_dims
from shrinkmask.masks import IGN, NEG, POS


def random_convex_polygon(rng, scale=120.0, min_vertices=16):
    """Convex hull of jittered points on an anisotropic ellipse.

    Smooth (>= min_vertices vertices, no sharp ends) so inward-then-outward
    offsetting loses little corner area.
    """
    while True:
        k = rng.integers(max(20, min_vertices + 6), 48)
        ang = np.sort(rng.uniform(0.0, 2.0 * np.pi, k))
        radius = scale * rng.uniform(0.92, 1.0, k)
        stretch = rng.uniform(0.7, 1.0)
        pts = np.stack([radius * np.cos(ang), stretch * radius * np.sin(ang)], axis=1)
        hull = _convex_hull(pts)
        if len(hull) >= min_vertices:
            return Polygon(hull + rng.uniform(50.0, 250.0, 2))


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _convex_hull(pts):
    """Andrew's monotone chain."""
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(list(pts))
    upper = half(list(pts[::-1]))
    return np.array(lower[:-1] + upper[:-1])


def cyclic_equal(a, b, tol=1e-9):
    """Same polygon up to a cyclic shift of the vertex list."""
    pa, pb = a.points, b.points
    if pa.shape != pb.shape:
        return False
    for shift in range(len(pa)):
        if np.allclose(np.roll(pa, shift, axis=0), pb, atol=tol):
            return True
    return False


def square(x0, y0, side):
    return Polygon([(x0, y0), (x0 + side, y0), (x0 + side, y0 + side), (x0, y0 + side)])


def scene_with(polys, width=256, height=256, dontcare_flags=None):
    flags = dontcare_flags or [False] * len(polys)
    anns = [Annotation(p, dontcare=f) for p, f in zip(polys, flags)]
    return SceneSample(width, height, anns)


def random_scene(rng, size=256, n_instances=4):
    """Non-overlapping random convex instances on a 2x2 slot grid."""
    polys = []
    grid = 2
    slot = size / grid
    for k in range(min(n_instances, grid * grid)):
        r, c = divmod(k, grid)
        center = np.array([(c + 0.5) * slot, (r + 0.5) * slot])
        p = random_convex_polygon(rng, scale=rng.uniform(20, slot * 0.42))
        pts = p.points - p.points.mean(axis=0) + center
        polys.append(Polygon(pts))
    return scene_with(polys, width=size, height=size)


def _label_contours(sample, ratio=0.4):
    """Quarter-scale text, S1 and S2 shapely polygons for oracle checks."""
    text_polys, s1_polys, s2_polys = [], [], []
    for ann in sample.annotations:
        if ann.dontcare:
            continue
        text_polys.append(ShapelyPolygon(ann.polygon.points * 0.25))
        d1 = offset_distance(ann.polygon, ratio)
        for piece in shrink_polygon(ann.polygon, d1):
            s1_polys.append(ShapelyPolygon(piece.points * 0.25))
            d2 = offset_distance(piece, ratio)
            for sub in shrink_polygon(piece, d2):
                s2_polys.append(ShapelyPolygon(sub.points * 0.25))
    return text_polys, s1_polys, s2_polys


def margin_oracle(sample, ratio=0.4):
    """Brute-force per-cell set-identity oracle for the margin label.

    POS iff the cell center is in S1 minus S2, NEG iff in text minus S1,
    IGN otherwise; membership per independent point-in-polygon tests.
    """
    h, w = scaled_dims(sample.height, sample.width, 0.25)
    text_polys, s1_polys, s2_polys = _label_contours(sample, ratio)
    jj, ii = np.meshgrid(np.arange(w) + 0.5, np.arange(h) + 0.5)
    xs, ys = jj.ravel(), ii.ravel()

    def member(polys):
        hit = np.zeros(xs.shape, bool)
        for sp in polys:
            hit |= shapely.contains_xy(sp, xs, ys)
        return hit.reshape(h, w)

    in_text, in_s1, in_s2 = member(text_polys), member(s1_polys), member(s2_polys)
    out = np.full((h, w), IGN, np.uint8)
    out[in_text & ~in_s1] = NEG
    out[in_s1 & ~in_s2] = POS
    return out


def boundary_distance_map(sample, ratio=0.4):
    """Distance (in quarter-res cells) from each cell center to the nearest
    text/S1/S2 contour; used to classify boundary cells."""
    h, w = scaled_dims(sample.height, sample.width, 0.25)
    rings = [sp.exterior for group in _label_contours(sample, ratio) for sp in group]
    jj, ii = np.meshgrid(np.arange(w) + 0.5, np.arange(h) + 0.5)
    pts = shapely.points(jj.ravel(), ii.ravel())
    dist = np.full(pts.shape, np.inf)
    for ring in rings:
        dist = np.minimum(dist, shapely.distance(pts, ring))
    return dist.reshape(h, w)
