import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stablefield import lattice as lat
from stablefield.errors import DimensionMismatchError, DomainError, RegionOverlapError


def brute_count(region):
    return len({p for p in region.points()})


class TestValidate:
    def test_single_rect_ok(self):
        lat.explicit([((0, 0), (3, 3))])

    def test_shared_point_overlap(self):
        with pytest.raises(RegionOverlapError) as exc:
            lat.explicit([((0, 0), (1, 1)), ((1, 1), (2, 2))])
        assert exc.value.index_a == 0 and exc.value.index_b == 1

    def test_point_regions_allowed(self):
        r = lat.explicit([((0, 0), (0, 0)), ((2, 2), (2, 2))])
        assert r.count == 2
        assert lat.cardinality(r) == 2

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            lat.RegionUnion((lat.Rect((0,), (1,)), lat.Rect((0, 0), (1, 1))))

    def test_empty_rect_rejected(self):
        with pytest.raises(DomainError):
            lat.Rect((2, 0), (1, 3))


class TestCardinality:
    def test_cube(self):
        assert lat.cardinality(lat.cube(4, 2)) == 25

    def test_two_unit_squares(self):
        r = lat.explicit([((0, 0), (1, 1)), ((3, 3), (4, 4))])
        assert lat.cardinality(r) == 8

    def test_mixed_box_brute_force(self):
        r = lat.explicit([((-2, 0, 1), (2, 0, 3))])
        assert lat.cardinality(r) == 15
        assert lat.cardinality(r) == brute_count(r)

    @given(st.integers(1, 3), st.data())
    @settings(max_examples=40, deadline=None)
    def test_random_unions_match_enumeration(self, d, data):
        rects = []
        for _ in range(data.draw(st.integers(1, 4))):
            lo = [data.draw(st.integers(-8, 6)) for _ in range(d)]
            hi = [l + data.draw(st.integers(0, 2)) for l in lo]
            cand = lat.Rect(tuple(lo), tuple(hi))
            if all(not cand.intersects(r) for r in rects):
                rects.append(cand)
        region = lat.RegionUnion(tuple(rects))
        assert lat.cardinality(region) == brute_count(region)


class TestGenerators:
    def test_cube_corners(self):
        box = lat.cube(5, 3).bounding_box()
        assert box.lower == (0, 0, 0) and box.upper == (5, 5, 5)

    def test_symmetric_box(self):
        r = lat.symmetric_box(10, [1.0, 0.5])
        box = r.bounding_box()
        assert box.lower == (-10, -5) and box.upper == (10, 5)

    def test_anisotropic_box(self):
        r = lat.anisotropic_box(16, [1.0, 2.0])
        box = r.bounding_box()
        assert box.upper == (16, 4)  # n, n^(1/2)

    def test_scattered_disjoint(self):
        rng = np.random.default_rng(5)
        r = lat.scattered(20, 2, 50, 4, rng)
        assert r.count == 20
        for a, b in itertools.combinations(r.rects, 2):
            assert not a.intersects(b)

    def test_contains(self):
        r = lat.explicit([((0, 0), (2, 2)), ((5, 5), (6, 6))])
        assert r.contains((1, 2))
        assert r.contains((6, 5))
        assert not r.contains((3, 3))
