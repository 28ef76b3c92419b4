import math

import numpy as np
import pytest
from shapely.geometry import Polygon as ShapelyPolygon

from conftest import cyclic_equal, random_convex_polygon, square
from shrinkmask.geometry import (
    Polygon,
    expand_polygon,
    offset_distance,
    polygon_area,
    polygon_perimeter,
    shrink_polygon,
)

TRIANGLE = Polygon([(0, 0), (4, 0), (0, 3)])


class TestPolygon:
    def test_normalizes_to_ccw(self):
        cw = Polygon([(0, 0), (0, 100), (100, 100), (100, 0)])
        x, y = cw.points[:, 0], cw.points[:, 1]
        assert np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y) > 0

    def test_drops_explicit_closing_vertex(self):
        p = Polygon([(0, 0), (4, 0), (0, 3), (0, 0)])
        assert len(p) == 3

    def test_rejects_too_few_vertices(self):
        with pytest.raises(ValueError):
            Polygon([(0, 0), (1, 1)])

    def test_rejects_repeated_vertex(self):
        with pytest.raises(ValueError):
            Polygon([(0, 0), (4, 0), (4, 0), (0, 3)])

    def test_rejects_zero_area(self):
        with pytest.raises(ValueError):
            Polygon([(0, 0), (1, 1), (2, 2)])

    def test_rejects_self_intersection(self):
        with pytest.raises(ValueError):
            Polygon([(0, 0), (2, 2), (2, 0), (0, 2)])

    def test_points_are_immutable(self):
        p = square(0, 0, 10)
        with pytest.raises(ValueError):
            p.points[0, 0] = 5.0


class TestMeasures:
    def test_area_square(self):
        assert polygon_area(square(0, 0, 100)) == 10000.0

    def test_area_triangle(self):
        assert polygon_area(TRIANGLE) == 6.0

    def test_perimeter_square(self):
        assert polygon_perimeter(square(0, 0, 100)) == 400.0

    def test_perimeter_triangle(self):
        assert polygon_perimeter(TRIANGLE) == 12.0

    def test_perimeter_unit_square(self):
        assert polygon_perimeter(square(0, 0, 1)) == 4.0


class TestOffsetDistance:
    def test_square(self):
        assert offset_distance(square(0, 0, 100), 0.4) == pytest.approx(21.0)

    def test_triangle(self):
        assert offset_distance(TRIANGLE, 0.4) == pytest.approx(0.42)

    def test_ratio_one_gives_zero(self):
        assert offset_distance(square(0, 0, 100), 1.0) == 0.0

    @pytest.mark.parametrize("ratio", [0.0, -0.5, 1.5])
    def test_rejects_bad_ratio(self, ratio):
        with pytest.raises(ValueError):
            offset_distance(square(0, 0, 100), ratio)

    def test_scale_covariance(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            p = random_convex_polygon(rng)
            s = rng.uniform(0.5, 4.0)
            scaled = Polygon(p.points * s)
            assert offset_distance(scaled, 0.4) == pytest.approx(
                s * offset_distance(p, 0.4), rel=1e-12)


class TestShrink:
    def test_square_exact(self):
        pieces = shrink_polygon(square(0, 0, 100), 21.0)
        assert len(pieces) == 1
        assert cyclic_equal(pieces[0], square(21, 21, 58))

    def test_zero_distance_is_identity(self):
        p = square(0, 0, 100)
        assert shrink_polygon(p, 0.0) == [p]

    def test_vanishing(self):
        assert shrink_polygon(square(0, 0, 10), 6.0) == []

    def test_rejects_negative_distance(self):
        with pytest.raises(ValueError):
            shrink_polygon(square(0, 0, 10), -1.0)

    def test_narrow_waist_splits(self):
        # two 40x40 blobs joined by a 4-wide bridge
        waist = Polygon([
            (0, 0), (40, 0), (40, 18), (60, 18), (60, 0), (100, 0),
            (100, 40), (60, 40), (60, 22), (40, 22), (40, 40), (0, 40),
        ])
        pieces = shrink_polygon(waist, 5.0)
        assert len(pieces) == 2

    def test_pieces_strictly_smaller(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            p = random_convex_polygon(rng)
            d = offset_distance(p, 0.4)
            for piece in shrink_polygon(p, d):
                assert polygon_area(piece) < polygon_area(p)

    def test_outputs_are_ccw(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            p = random_convex_polygon(rng)
            for piece in shrink_polygon(p, offset_distance(p, 0.4)):
                pts = piece.points
                x, y = pts[:, 0], pts[:, 1]
                assert np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y) > 0


class TestExpand:
    def test_miter_square_exact(self):
        out = expand_polygon(square(21, 21, 58), 21.0, join="miter")
        assert cyclic_equal(out, square(0, 0, 100))

    def test_zero_distance_is_identity(self):
        p = square(0, 0, 10)
        assert expand_polygon(p, 0.0) == p

    def test_round_join_minkowski_area(self):
        # Minkowski sum of the unit square and a radius-1 disk:
        # area + perimeter * d + pi * d^2 = 1 + 4 + pi
        out = expand_polygon(square(0, 0, 1), 1.0, join="round")
        expected = 1.0 + 4.0 + math.pi
        assert polygon_area(out) == pytest.approx(expected, rel=0.01)

    def test_rejects_negative_distance(self):
        with pytest.raises(ValueError):
            expand_polygon(square(0, 0, 10), -0.1)

    def test_rejects_unknown_join(self):
        with pytest.raises(ValueError):
            expand_polygon(square(0, 0, 10), 1.0, join="bevel")

    def test_contains_input_and_hausdorff_bound(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            p = random_convex_polygon(rng)
            d = offset_distance(p, 0.4)
            out = expand_polygon(p, d)
            sp, so = ShapelyPolygon(p.points), ShapelyPolygon(out.points)
            assert so.buffer(1e-9).contains(sp)
            assert sp.boundary.hausdorff_distance(so.boundary) <= d * 1.05


class TestRoundTrip:
    def test_expand_shrink_iou(self):
        rng = np.random.default_rng(23)
        count = 0
        while count < 100:
            p = random_convex_polygon(rng)
            d = offset_distance(p, 0.4)
            if not shrink_polygon(p, 2.0 * d):  # require inradius > 2d
                continue
            count += 1
            pieces = shrink_polygon(p, d)
            assert len(pieces) == 1
            back = expand_polygon(pieces[0], d)
            sa = ShapelyPolygon(p.points)
            sb = ShapelyPolygon(back.points)
            iou = sa.intersection(sb).area / sa.union(sb).area
            assert iou >= 0.98
