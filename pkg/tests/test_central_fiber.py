import random

import pytest

from logcy.affine_geometry import build_atlas
from logcy.central_fiber import (
    RestrictedBundle,
    _component_chi,
    boundary_period_weight,
    build_central_fiber,
    curve_self_intersection,
    euler_characteristic,
    numerically_trivial,
    restrict,
    toric_period_point,
)
from logcy.pair_model import (
    SearchBoundExhausted,
    ToricModel,
    build_pair,
    is_positive,
    weight,
)
from logcy.polygon_engine import (
    boundary_parallel_line,
    find_parallel_configuration,
    half_space,
    intersect,
    parallel_polygon,
)

P2 = build_pair(None, ToricModel([(1, 0), (0, 1), (-1, -1)], [0, 0, 0]))


def fiber_for(pair, w=None):
    w = find_parallel_configuration(pair) if w is None else w
    return build_central_fiber(pair, parallel_polygon(pair, w))


def random_fibers(seed, count, n_max=6):
    rng = random.Random(seed)
    done = 0
    while done < count:
        n = rng.randint(2, n_max)
        d = [rng.randint(-4, 4) for _ in range(n)]
        try:
            if is_positive(d) is None:
                continue
        except SearchBoundExhausted:
            continue
        pair = build_pair(d)
        w = find_parallel_configuration(pair)
        if w == "none":
            continue
        yield pair, fiber_for(pair, w)
        done += 1


def test_p2_components():
    fib = fiber_for(P2, [1, 1, 1])
    assert len(fib.components) == 3
    assert all(c.is_smooth() for c in fib.components)
    # one 2-cell per cone, and every boundary 1-cell of the polygon appears
    assert len(fib.boundary_curves) == sum(
        len(p.chain) - 1 for p in fib.polygon.pieces
    )
    for i in range(3):
        assert euler_characteristic(fib, fib.boundary_divisor(i)) == 3


def test_boundary_divisor_follows_line_tags():
    pair = build_pair([0, -1, -2, 3])
    fib = fiber_for(pair)
    for j in range(4):
        div = fib.boundary_divisor(j)
        assert div == {z: 1 for z in fib.boundary_curves if j in fib.curve_lines[z]}
    assert fib.full_boundary() == {z: 1 for z in fib.boundary_curves}


def test_section_and_fiber_self_intersections():
    # the edge parallel to rho_j meets the cone before rho_j in a section of
    # self-intersection D_j^2 and the cone before that in a fiber
    for pair, fib in random_fibers(3, 10):
        n = pair.n
        for j in range(n):
            assert curve_self_intersection(fib, ((j - 1) % n, 0)) == pair.self_ints[j]
            assert curve_self_intersection(fib, ((j - 2) % n, 1)) == 0


def test_chi_of_boundary_components_randomized():
    for pair, fib in random_fibers(11, 30):
        for i in range(pair.n):
            chi = euler_characteristic(fib, fib.boundary_divisor(i))
            assert chi == pair.self_ints[i] + 2


def test_chi_n1_parallel_case():
    for d in (2, 3, 4, 5, 6, 8):
        for a in (1, 2):
            pair = build_pair([d])
            fib = fiber_for(pair, [a])
            assert fib.source_pair is pair
            assert fib.pair.self_ints == [d - 2, -1]
            assert euler_characteristic(fib, fib.full_boundary()) == d + 1


def test_n1_blowup_cells_match_case_split():
    # square times plane for D^2 = 3, two planes for D^2 = 2
    fib = fiber_for(build_pair([3]), [1])
    shapes = sorted(c.edge_count for c in fib.components)
    assert shapes == [3, 4]
    fib = fiber_for(build_pair([2]), [1])
    assert [c.edge_count for c in fib.components] == [3, 3]
    # ruled component: section self-intersection D^2 - 3, fiber 0
    for d in (3, 4, 7):
        fib = fiber_for(build_pair([d]), [1])
        assert curve_self_intersection(fib, (1, 0)) == d - 3
        assert curve_self_intersection(fib, (1, 1)) == 0


def test_dp1_weighted_planes():
    fib = fiber_for(build_pair([1]), [2])
    assert len(fib.components) == 2
    assert all(not c.is_smooth() for c in fib.components)
    assert all(c.edge_count == 3 for c in fib.components)
    full = fib.full_boundary()
    with pytest.raises(ValueError, match="not Cartier"):
        euler_characteristic(fib, full)
    assert euler_characteristic(fib, full, 2) == 4
    double = restrict(fib, {z: 2 for z in fib.boundary_curves})
    assert sorted(double.degree(j) for j in fib.gluing_curves) == [1, 2]
    # componentwise values 4 and 4, overlap 4, so 4 + 4 - 4 = 4
    comp_chis = [
        _component_chi(c, double.component_coeffs[i])
        for i, c in enumerate(fib.components)
    ]
    assert comp_chis == [4, 4]
    overlap = sum(double.degree(j) + 1 for j in fib.gluing_curves) - 1
    assert overlap == 4
    assert sum(comp_chis) - overlap == 4


def test_not_cartier_error_names_component():
    fib = fiber_for(build_pair([1]), [1])
    with pytest.raises(ValueError, match="cone-[01]"):
        euler_characteristic(fib, fib.full_boundary())


def test_gluing_degrees_agree_from_both_sides():
    for pair, fib in random_fibers(23, 10):
        for i in range(pair.n):
            bundle = restrict(fib, fib.boundary_divisor(i))
            for j in fib.gluing_curves:
                a, b = bundle.side_degrees(j)
                assert a == b == bundle.degree(j)


def test_restrict_validation_and_scaling():
    fib = fiber_for(P2, [1, 1, 1])
    with pytest.raises(ValueError):
        RestrictedBundle(fib, {(9, 9): 1})
    # a coefficient assignment must glue: a single boundary curve does not
    with pytest.raises(AssertionError, match="gluing degrees disagree"):
        RestrictedBundle(fib, {fib.boundary_curves[0]: 1})
    div = fib.boundary_divisor(0)
    extra = next(z for z in fib.boundary_curves if z not in div)
    bundle = restrict(fib, {**div, extra: 0})
    assert sorted(bundle.coeffs) == sorted(div)
    double = bundle.scaled(2)
    curves = fib.boundary_curves + fib.gluing_curves
    assert all(double.degree(z) == 2 * bundle.degree(z) for z in curves)


def test_needs_bounded_convex_polygon():
    atlas = build_atlas(P2)
    strip = intersect([half_space(boundary_parallel_line(atlas, 0, 1))])
    with pytest.raises(ValueError, match="bounded convex"):
        build_central_fiber(P2, strip)


def test_n1_needs_parallel_polygon():
    pair = build_pair([3])
    atlas = build_atlas(pair)
    z = intersect([half_space(boundary_parallel_line(atlas, 0, 1))])
    with pytest.raises(ValueError, match="parallel polygon"):
        build_central_fiber(pair, z)


def test_boundary_restriction_degree_profile():
    # O(D_i) has degree D_i^2 on its section, 0 on its fiber, 1 on the
    # neighboring section and fiber, and 0 on every other boundary curve
    for pair, fib in random_fibers(37, 10, n_max=6):
        n = pair.n
        if n < 3:
            continue
        for i in range(n):
            bundle = restrict(fib, fib.boundary_divisor(i))
            expected = {((i - 1) % n, 0): pair.self_ints[i]}
            expected[((i - 2) % n, 0)] = expected.get(((i - 2) % n, 0), 0) + 1
            expected[((i - 1) % n, 1)] = expected.get(((i - 1) % n, 1), 0) + 1
            for z in fib.boundary_curves:
                assert bundle.degree(z) == expected.get(z, 0)


def test_period_point_of_boundary_class_is_trivial():
    # placing one point on each neighboring curve and D_i^2 points on the
    # section leaves a numerically trivial class, so the period value is 1
    for pair, fib in random_fibers(41, 8):
        n = pair.n
        if n < 3:
            continue
        for i in range(n):
            bundle = restrict(fib, fib.boundary_divisor(i))
            point = toric_period_point(fiber := fib, degrees=bundle)
            assert numerically_trivial(point) == (
                all(bundle.degree(z) == 0 for z in fib.boundary_curves)
            )
            adjusted = {z: bundle.degree(z) for z in fib.boundary_curves}
            adjusted[((i - 1) % n, 0)] -= pair.self_ints[i]
            adjusted[((i - 2) % n, 0)] -= 1
            adjusted[((i - 1) % n, 1)] -= 1
            assert toric_period_point(fib, adjusted) == {}
            assert numerically_trivial(toric_period_point(fib, adjusted))


def test_toric_period_point_drops_zeros():
    fib = fiber_for(P2, [1, 1, 1])
    z0, z1 = fib.boundary_curves[:2]
    assert toric_period_point(fib, {z0: 2, z1: 0}) == {z0: 2}
    assert not numerically_trivial(toric_period_point(fib, {z0: 2}))


def test_boundary_period_weight_formula():
    pair = build_pair([0, -1, -2, 3])
    for i in range(4):
        ent = [0, 0, 0, 0]
        ent[(i - 1) % 4] += 1
        ent[i] += pair.self_ints[i]
        ent[(i + 1) % 4] += 1
        w = boundary_period_weight(pair, i)
        assert list(w.entries) == ent
        assert w == weight(pair, pair.boundary_class(i))
    for d in (2, 3, 5):
        pair = build_pair([d])
        assert list(boundary_period_weight(pair, 0).entries) == [d]
    pair = build_pair([2, -1])
    for i in range(2):
        assert boundary_period_weight(pair, i) == weight(pair, pair.boundary_class(i))
