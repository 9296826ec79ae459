import random

import pytest

from logcy.affine_geometry import (
    ChartPoint,
    build_atlas,
    developing_map,
    line_distance,
    parallel_transport,
    trace_line,
)
from logcy.lattice import vec, wedge
from logcy.pair_model import ToricModel, build_pair, is_positive

P2 = build_pair(None, ToricModel([(1, 0), (0, 1), (-1, -1)], [0, 0, 0]))


def test_monodromy_identity_iff_toric():
    assert build_atlas(P2).monodromy().is_identity()
    sq = build_pair(None, ToricModel([(1, 0), (0, 1), (-1, 0), (0, -1)], [0, 0, 0, 0]))
    assert build_atlas(sq).monodromy().is_identity()
    assert not build_atlas(build_pair([-1, -1, -1])).monodromy().is_identity()
    assert not build_atlas(build_pair([1])).monodromy().is_identity()


def test_monodromy_shear_for_all_minus_two():
    for n in (2, 3, 5):
        m = build_atlas(build_pair([-2] * n)).monodromy()
        # a shear fixes a line: trace 2, not the identity
        assert m.a + m.d == 2
        assert not m.is_identity()


def test_developing_map_dp1_blowup_figure():
    atlas = build_atlas(build_pair([-3, -1]))
    imgs = developing_map(atlas, 7, base=((0, -1), (1, 0)))
    assert [(int(v.x), int(v.y)) for v in imgs] == [
        (0, -1),
        (1, 0),
        (1, 1),
        (2, 3),
        (1, 2),
        (1, 3),
        (0, 1),
    ]


def test_developing_map_p2_periodic():
    atlas = build_atlas(P2)
    imgs = developing_map(atlas, 8)
    # toric pair: images repeat with period n and wrap exactly once
    assert imgs[3] == imgs[0] and imgs[4] == imgs[1]


def test_developing_map_halfplane_for_minus_two():
    atlas = build_atlas(build_pair([-2] * 4))
    imgs = developing_map(atlas, 12)
    # cusp case: all images in a half plane (here x >= 0 up to the base choice)
    assert all(v.y >= 0 for v in imgs) or all(v.x >= 0 for v in imgs)


def test_parallel_transport():
    atlas = build_atlas(P2)
    v = vec(1, 0)
    w, cone = parallel_transport(atlas, v, 0, [])
    assert w == v and cone == 0
    w, cone = parallel_transport(atlas, v, 0, [1, 1, 1])
    assert cone == 0 and w == v  # toric loop is the identity
    w, cone = parallel_transport(atlas, v, 0, [1])
    back, cone2 = parallel_transport(atlas, w, cone, [-1])
    assert back == v and cone2 == 0


def test_trace_line_p2():
    atlas = build_atlas(P2)
    line = trace_line(atlas, atlas.point(0, 1, 1), vec(1, 0))
    assert len(line.segments) <= 2
    assert line.distance() == 1


def test_trace_line_distance_chart_independent():
    atlas = build_atlas(build_pair([-1, -1, -1]))
    line = trace_line(atlas, atlas.point(0, 2, 1), vec(1, 1))
    for cone, p, d in line.segments:
        assert abs(wedge(p, d)) == line.distance()
    # scaling the start point off the line changes nothing about this line
    line2 = trace_line(atlas, atlas.point(0, 3, 2), vec(1, 1))
    assert line2.distance() == abs(wedge(vec(3, 2), vec(1, 1)))


def test_trace_line_dp1_parallel_to_ray():
    atlas = build_atlas(build_pair([-3, -1]))
    # line parallel to rho_0 at distance 1, with 0 on the left
    line = trace_line(atlas, atlas.point(1, 1, 3), vec(0, 1))
    sc, sd = line.start_escape
    ec, ed = line.end_escape
    # both ends run off to infinity parallel to rho_0
    assert (ec, (ed.x, ed.y)) == (1, (0, 1))  # +v_0 in cone 1 coordinates
    assert (sc, (sd.x, sd.y)) == (0, (-1, 0))  # -v_0 in cone 0 coordinates
    assert line.distance() == 1
    assert line.crossings() == 5


def test_trace_line_requires_positive_pair():
    atlas = build_atlas(build_pair([-2, -2, -2]))
    with pytest.raises(ValueError):
        trace_line(atlas, atlas.point(0, 1, 1), vec(1, 0))


def test_trace_line_random_positive_pairs_escape():
    rng = random.Random(17)
    done = 0
    while done < 25:
        n = rng.randint(1, 5)
        d = [rng.randint(-4, 3) for _ in range(n)]
        if is_positive(d) is None:
            continue
        pair = build_pair(d)
        atlas = build_atlas(pair)
        b, c = rng.randint(1, 5), rng.randint(1, 5)
        dx, dy = rng.randint(-3, 3), rng.randint(-3, 3)
        if dx == 0 and dy == 0:
            continue
        if wedge(vec(b, c), vec(dx, dy)) == 0:
            continue
        line = trace_line(atlas, atlas.point(rng.randrange(n), b, c), vec(dx, dy))
        assert line.segments
        done += 1
