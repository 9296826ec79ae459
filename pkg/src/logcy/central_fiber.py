"""The central fiber cut out by a polygon on B: a cyclic union of toric
surfaces glued along the rays, restriction degrees of boundary divisors,
Euler characteristics, and toric period points.

For a bounded convex polygon F the overlay of the fan with F has one 2-cell
per cone; each is the moment polytope of an irreducible component.  The ray
segments are the interior 1-cells (gluing curves), the 1-cells of the
polygon boundary are the boundary curves, and the origin is the single
interior 0-cell.  A line bundle on the fiber is recorded by integer
coefficients on the boundary curves; all degrees come from the corner
solutions of the support data, exactly and rationally.
"""

from fractions import Fraction
from math import gcd

from .affine_geometry import build_atlas, trace_line
from .lattice import PlanePolygon, Vec2, enumerate_lattice_points, primitive, vec, wedge
from .pair_model import WeightVector, build_pair, weight
from .polygon_engine import boundary_parallel_line, half_space, intersect, polygon_checks


def _dot(u, v):
    return u.x * v.x + u.y * v.y


class ToricComponent:
    """The toric surface of one 2-cell: the cone clipped by the polygon.

    Vertices run counterclockwise starting at the origin; edge k joins
    vertex k to vertex k+1, so edge 0 lies on rho_{cone}, the last edge lies
    on rho_{cone+1}, and the edges in between are boundary 1-cells."""

    def __init__(self, cone, chain):
        self.cone = cone
        self.vertices = [Vec2(Fraction(0), Fraction(0))] + list(chain)
        m = len(self.vertices)
        self.directions = []
        self.normals = []
        for k in range(m):
            d = primitive(self.vertices[(k + 1) % m] - self.vertices[k])
            self.directions.append(d)
            self.normals.append(Vec2(-d.y, d.x))
        self.edge_count = m

    def boundary_edge_indices(self):
        return range(1, self.edge_count - 1)

    def corner_is_smooth(self, k):
        """Whether the corner at vertex k (between edges k-1 and k) is
        unimodular."""
        return abs(wedge(self.normals[k - 1], self.normals[k])) == 1

    def is_smooth(self):
        return all(self.corner_is_smooth(k) for k in range(self.edge_count))

    def corner_solution(self, coeffs, k):
        """The linear function m with <n_e, m> = -a_e on both edges at
        vertex k; the Cartier data of the divisor sum a_e C_e there."""
        n1, n2 = self.normals[k - 1], self.normals[k]
        a1, a2 = coeffs[(k - 1) % self.edge_count], coeffs[k]
        det = wedge(n1, n2)
        return Vec2((-a1 * n2.y + a2 * n1.y) / det, (a1 * n2.x - a2 * n1.x) / det)

    def edge_degree(self, coeffs, k):
        """Degree of the divisor sum a_e C_e on the curve of edge k: the
        signed lattice length between its two corner solutions."""
        m0 = self.corner_solution(coeffs, k)
        m1 = self.corner_solution(coeffs, (k + 1) % self.edge_count)
        d = self.directions[k]
        diff = m1 - m0
        return diff.x / d.x if d.x != 0 else diff.y / d.y


class CentralFiber:
    """Union of toric surfaces with its gluing and boundary curves.

    Gluing curve j is the segment of rho_j, shared by the components of
    cones j-1 and j; boundary curve (i, k) is the k-th boundary edge of the
    cone-i component, and carries the set of polygon lines supporting it."""

    def __init__(self, pair, polygon):
        if polygon.atlas.pair is not pair:
            raise ValueError("polygon does not live on the given pair")
        checks = polygon_checks(polygon)
        if not checks["bounded"] or not checks["convex"]:
            raise ValueError("central fiber needs a bounded convex polygon")
        self.pair = pair
        self.source_pair = pair
        self.polygon = polygon
        self.n = pair.n
        self.components = [
            ToricComponent(i, polygon.pieces[i].chain) for i in range(self.n)
        ]
        self.gluing_curves = list(range(self.n))
        self.boundary_curves = []
        self.curve_lines = {}
        for i in range(self.n):
            tags = polygon.pieces[i].edge_tags
            for k in self.components[i].boundary_edge_indices():
                self.boundary_curves.append((i, k - 1))
                self.curve_lines[(i, k - 1)] = tags[k - 1]

    def component_of(self, curve):
        """(component, edge index) carrying a boundary curve."""
        i, k = curve
        return self.components[i], k + 1

    def gluing_sides(self, j):
        """The two (component, edge index) sides of gluing curve rho_j."""
        left = self.components[(j - 1) % self.n]
        right = self.components[j % self.n]
        return (left, left.edge_count - 1), (right, 0)

    def boundary_divisor(self, line_index):
        """Coefficient 1 on every boundary curve supported by the given
        polygon line: the 1-cells of the edge F_{line_index}."""
        out = {
            z: 1 for z in self.boundary_curves if line_index in self.curve_lines[z]
        }
        if not out:
            raise ValueError("line supports no boundary edge of the polygon")
        return out

    def full_boundary(self):
        """Coefficient 1 on every boundary curve: the whole boundary D_0."""
        return {z: 1 for z in self.boundary_curves}


def _node_blowup_polygon(pair, polygon):
    """Redraw an n = 1 parallel polygon P(aD) on the toric blowup at the
    node of the boundary, where the fan-polygon overlay is an honest
    polyhedral decomposition.

    On the blowup [D^2 - 2, -1] the polygon is cut out by the line parallel
    to the strict transform at distance a together with one more supporting
    line, chosen so that the component over the cone at the exceptional ray
    is a ruled surface with a section of self-intersection D^2 - 3 and a
    fiber (degenerating to the projective plane for D^2 = 2 and to a weighted
    plane for D^2 = 1, where the extra line is a wall of the first one)."""
    w = getattr(polygon, "weil", None)
    if w is None:
        raise ValueError("n = 1 central fibers need a parallel polygon P(W)")
    d = pair.self_ints[0]
    a = Fraction(w[0])
    pair2 = build_pair([d - 2, -1])
    atlas2 = build_atlas(pair2)
    if d == 1:
        # the two lines parallel to the strict transform at distance a are
        # distinct here; the one cutting out the pair of weighted planes runs
        # through (a, 0) and (0, a/2) in the chart of the cone at the strict
        # transform ray
        strict = trace_line(atlas2, atlas2.point(0, a / 2, a / 4), vec(-2, 1))
    else:
        strict = boundary_parallel_line(atlas2, 0, a)
    halves = [half_space(strict)]
    if d >= 2:
        # the fiber edge runs from (a, a(d-2)) toward (0, a) in the chart of
        # the cone at the exceptional ray; trace its line from a point in the
        # cone's interior
        u = 3 * a / 4
        start = atlas2.point(1, a - u, a * (d - 2) - u * (d - 3))
        halves.append(half_space(trace_line(atlas2, start, vec(-1, -(d - 3)))))
    return pair2, intersect(halves)


def build_central_fiber(pair, polygon):
    if pair.n == 1:
        pair2, polygon2 = _node_blowup_polygon(pair, polygon)
        fiber = CentralFiber(pair2, polygon2)
        fiber.source_pair = pair
        return fiber
    return CentralFiber(pair, polygon)


class RestrictedBundle:
    """A line bundle on the central fiber given by boundary coefficients.

    Stores the induced divisor on every component (zero on ray edges) and
    the exact degree on every curve; degrees on gluing curves are computed
    from both adjacent components and must agree."""

    def __init__(self, fiber, coeffs):
        self.fiber = fiber
        self.coeffs = {z: int(c) for z, c in coeffs.items() if c != 0}
        unknown = [z for z in self.coeffs if z not in set(fiber.boundary_curves)]
        if unknown:
            raise ValueError(f"unknown boundary curves: {unknown}")
        self.component_coeffs = []
        for i, comp in enumerate(fiber.components):
            cs = [0] * comp.edge_count
            for k in comp.boundary_edge_indices():
                cs[k] = self.coeffs.get((i, k - 1), 0)
            self.component_coeffs.append(cs)
        self.degrees = {}
        for z in fiber.boundary_curves:
            comp, k = fiber.component_of(z)
            self.degrees[z] = comp.edge_degree(self.component_coeffs[comp.cone], k)
        for j in fiber.gluing_curves:
            a, b = self.side_degrees(j)
            if a != b:
                raise AssertionError(
                    f"gluing degrees disagree on rho_{j}: {a} != {b}"
                )
            self.degrees[j] = a

    def side_degrees(self, j):
        """Degrees on gluing curve rho_j seen from its two sides."""
        (left, kl), (right, kr) = self.fiber.gluing_sides(j)
        return (
            left.edge_degree(self.component_coeffs[left.cone], kl),
            right.edge_degree(self.component_coeffs[right.cone], kr),
        )

    def component_divisor(self, i):
        return list(self.component_coeffs[i])

    def degree(self, curve):
        return self.degrees[curve]

    def scaled(self, c):
        return RestrictedBundle(self.fiber, {z: c * a for z, a in self.coeffs.items()})


def restrict(fiber, coeffs):
    """The restricted bundle of a boundary coefficient dictionary."""
    return coeffs if isinstance(coeffs, RestrictedBundle) else RestrictedBundle(fiber, coeffs)


def curve_self_intersection(fiber, curve):
    """Self-intersection of a boundary curve inside its component."""
    comp, k = fiber.component_of(curve)
    coeffs = [0] * comp.edge_count
    coeffs[k] = 1
    return comp.edge_degree(coeffs, k)


def _collinear_count(points):
    d = None
    base = points[0]
    for q in points[1:]:
        if q != base:
            d = primitive(q - base)
            break
    if d is None:
        return 1
    ts = []
    for q in points:
        diff = q - base
        if wedge(diff, d) != 0:
            return None
        ts.append(diff.x / d.x if d.x != 0 else diff.y / d.y)
    lo, hi = min(ts), max(ts)
    span = (hi - lo) * Vec2(abs(d.x), abs(d.y))
    return gcd(int(span.x), int(span.y)) + 1


def _corner_lattice_count(corners):
    """Lattice points of the convex hull of the corner solutions, which for
    a nef bundle traverse the polytope boundary counterclockwise."""
    count = _collinear_count(corners)
    if count is not None:
        return count
    pts = []
    for q in corners:
        if not pts or q != pts[-1]:
            pts.append(q)
    while len(pts) > 1 and pts[0] == pts[-1]:
        pts.pop()
    changed = True
    while changed and len(pts) >= 3:
        changed = False
        for k in range(len(pts)):
            a, b, c = pts[k - 1], pts[k], pts[(k + 1) % len(pts)]
            if wedge(b - a, c - b) == 0:
                pts.pop(k)
                changed = True
                break
    return len(enumerate_lattice_points(PlanePolygon(pts)))


def _component_chi(comp, coeffs):
    """chi of the divisor sum a_e C_e on one component: lattice-point count
    of the support polytope when nef, surface Riemann-Roch when smooth, and
    both cross-checked when both apply."""
    m = comp.edge_count
    corners = []
    for k in range(m):
        q = comp.corner_solution(coeffs, k)
        if not q.is_integral():
            raise ValueError(
                f"divisor is not Cartier at a corner of the cone-{comp.cone} component"
            )
        corners.append(q)
    nef = all(
        _dot(comp.normals[k], q) >= -coeffs[k] for k in range(m) for q in corners
    )
    chi_count = _corner_lattice_count(corners) if nef else None
    if comp.is_smooth():
        degs = [comp.edge_degree(coeffs, k) for k in range(m)]
        ll = sum(a * d for a, d in zip(coeffs, degs))
        two_chi = 2 + ll + sum(degs)
        assert two_chi % 2 == 0
        chi_rr = two_chi // 2
        assert chi_count is None or chi_count == chi_rr
        return chi_rr
    if chi_count is None:
        raise ValueError(
            f"cone-{comp.cone} component is singular and the restriction is not nef"
        )
    return chi_count


def euler_characteristic(fiber, divisor, c=1):
    """chi of O(c * D_E) on the central fiber.

    Componentwise chi values are assembled by inclusion-exclusion over the
    dual complex: sum over components, minus chi(P^1, O(deg)) = deg + 1 over
    the gluing curves, plus one for the origin 0-cell."""
    bundle = restrict(fiber, divisor)
    if c != 1:
        bundle = bundle.scaled(c)
    total = 0
    for i, comp in enumerate(fiber.components):
        total += _component_chi(comp, bundle.component_coeffs[i])
    for j in fiber.gluing_curves:
        d = bundle.degrees[j]
        assert d.denominator == 1 if isinstance(d, Fraction) else True
        total -= int(d) + 1
    return total + 1


def toric_period_point(fiber, degrees):
    """The bundle O(sum_Z (L.Z)(-1_Z)) on the cycle of boundary curves.

    `degrees` is a RestrictedBundle or a per-boundary-curve degree mapping;
    the result is the multidegree with zero entries dropped.  An empty
    result means the class is numerically trivial on the cycle, and since
    all support sits at the -1 points of the gluing coordinates its value
    there is 1."""
    if isinstance(degrees, RestrictedBundle):
        degrees = {z: degrees.degrees[z] for z in fiber.boundary_curves}
    out = {}
    for z in fiber.boundary_curves:
        d = degrees.get(z, 0)
        if d != 0:
            out[z] = d
    return out


def numerically_trivial(point_sum):
    return not point_sum


def boundary_period_weight(pair, i):
    """Torus weight of the boundary period function of D_i: for n >= 2 it is
    e_{i-1} + D_i^2 e_i + e_{i+1}, for n = 1 it is D^2 e; always equal to
    the weight vector of the boundary class itself."""
    n = pair.n
    i %= n
    ent = [0] * n
    if n == 1:
        ent[0] = pair.self_ints[0]
    else:
        ent[(i - 1) % n] += 1
        ent[i] += pair.self_ints[i]
        ent[(i + 1) % n] += 1
    w = WeightVector(ent)
    assert w == weight(pair, pair.boundary_class(i))
    return w
