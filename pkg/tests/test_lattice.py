import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from logcy.lattice import (
    PlanePolygon,
    UnimodularMap,
    Vec2,
    enumerate_lattice_points,
    pick_data,
    primitive,
    vec,
    wedge,
)

ints = st.integers(-30, 30)


def test_wedge_examples():
    assert wedge(vec(1, 0), vec(0, 1)) == 1
    assert wedge(vec(1, 0), vec(2, 0)) == 0
    assert wedge(vec(1, -1), vec(-1, -1)) == -2


@given(ints, ints, ints, ints, ints, ints)
def test_wedge_bilinear_antisymmetric(a, b, c, d, e, f):
    u, v, w = vec(a, b), vec(c, d), vec(e, f)
    assert wedge(u, v) == -wedge(v, u)
    assert wedge(u + w, v) == wedge(u, v) + wedge(w, v)
    assert wedge(3 * u, v) == 3 * wedge(u, v)


@given(ints, ints, ints, ints)
def test_wedge_sl2_invariant(a, b, c, d):
    u, v = vec(a, b), vec(c, d)
    for m in [UnimodularMap(1, 1, 0, 1), UnimodularMap(0, -1, 1, 0), UnimodularMap(2, 1, 1, 1)]:
        assert wedge(m(u), m(v)) == wedge(u, v)


def test_unimodular_rejects_wrong_det():
    with pytest.raises(ValueError):
        UnimodularMap(1, 0, 0, -1)
    m = UnimodularMap(2, 1, 1, 1)
    assert (m @ m.inverse()).is_identity()


def test_primitive():
    assert primitive(vec(2, 4)) == vec(1, 2)
    assert primitive(vec(0, -3)) == vec(0, -1)
    assert primitive(vec(Fraction(3, 2), Fraction(9, 4))) == vec(2, 3)
    with pytest.raises(ValueError):
        primitive(vec(0, 0))


def test_lattice_point_counts():
    square = PlanePolygon([(0, 0), (1, 0), (1, 1), (0, 1)])
    assert len(enumerate_lattice_points(square)) == 4
    tri = PlanePolygon([(0, 0), (2, 0), (0, 1)])
    assert len(enumerate_lattice_points(tri)) == 4
    big = PlanePolygon([(1, -1), (1, 2), (-2, -1)])
    assert len(enumerate_lattice_points(big)) == 10


def test_lattice_points_sorted_and_bruteforce():
    rng = random.Random(7)
    for _ in range(30):
        while True:
            pts = [vec(rng.randint(-8, 8), rng.randint(-8, 8)) for _ in range(3)]
            try:
                if wedge(pts[1] - pts[0], pts[2] - pts[1]) < 0:
                    pts.reverse()
                p = PlanePolygon(pts)
                break
            except ValueError:
                continue
        got = enumerate_lattice_points(p)
        assert got == sorted(got, key=lambda v: (v.x, v.y))
        x0, y0, x1, y1 = p.bounding_box()
        brute = [
            vec(x, y)
            for x in range(int(x0) - 1, int(x1) + 2)
            for y in range(int(y0) - 1, int(y1) + 2)
            if p.contains(vec(x, y))
        ]
        assert set(v.key() for v in got) == set(v.key() for v in brute)


def test_pick_data():
    square = PlanePolygon([(0, 0), (1, 0), (1, 1), (0, 1)])
    assert pick_data(square) == (1, 4, 0)
    big = PlanePolygon([(1, -1), (1, 2), (-2, -1)])
    assert pick_data(big) == (Fraction(9, 2), 9, 1)
    with pytest.raises(ValueError):
        PlanePolygon([(0, 0), (1, 0)])
    with pytest.raises(ValueError):
        PlanePolygon([(0, 0), (1, 0), (2, 0)])


def test_pick_identity_random():
    rng = random.Random(11)
    checked = 0
    while checked < 25:
        pts = [vec(rng.randint(-9, 9), rng.randint(-9, 9)) for _ in range(3)]
        try:
            if wedge(pts[1] - pts[0], pts[2] - pts[1]) < 0:
                pts.reverse()
            p = PlanePolygon(pts)
        except ValueError:
            continue
        area, b, i = pick_data(p)
        assert area == i + Fraction(b, 2) - 1
        checked += 1
