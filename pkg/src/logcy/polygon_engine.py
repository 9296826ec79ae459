"""Convex polygons on B: generalized half spaces, their intersections,
parallel polygons of boundary divisors, and height bookkeeping.

The half space Z(L) of an immersed line L (oriented with 0 on its left) is
the set of points that every straight segment from L reaches without leaving
to the right.  Chartwise, the piece of Z(L) in a cone is the cone clipped by
one linear constraint per pass of L through it, so pieces, intersections,
memberships and scales are exact rational computations.
"""

from fractions import Fraction
from math import ceil, lcm

from .affine_geometry import ChartPoint, _Walker, build_atlas, trace_line
from .lattice import PlanePolygon, Vec2, enumerate_lattice_points, primitive, vec, wedge


class GeneralizedHalfSpace:
    """Z(L) for an immersed line L on the B of a positive pair."""

    def __init__(self, line):
        self.line = line
        self.atlas = line.atlas
        self.distance = line.distance()
        if self.distance <= 0:
            raise ValueError("the defining line must not pass through the origin")
        self._per_cone = {}
        for cone, p, d in line.segments:
            self._per_cone.setdefault(cone, []).append((p, d))

    def constraints(self, cone):
        """(point, direction) pairs, one per pass of L through the cone; the
        piece of Z(L) there is {x : wedge(d, x - p) >= 0 for each pass}."""
        return self._per_cone.get(cone % self.atlas.n, [])

    def contains(self, point):
        q = point.vec()
        return all(wedge(d, q - p) >= 0 for p, d in self.constraints(point.cone))


def half_space(line):
    """The generalized half space of an immersed line."""
    return GeneralizedHalfSpace(line)


def boundary_parallel_line(atlas, i, a):
    """The immersed line at lattice distance a from rho_i, going to infinity
    parallel to rho_i, with the origin on its left."""
    if a <= 0:
        raise ValueError("lattice distance must be positive")
    start = atlas.point((i - 1) % atlas.n, a, 1)
    return trace_line(atlas, start, vec(0, 1))


class ChartPiece:
    """The part of a polygon inside one cone: the cone clipped by the linear
    constraints cut out by the passes of the defining lines through it."""

    def __init__(self, atlas, cone, constraints):
        self.atlas = atlas
        self.cone = cone
        self.constraints = constraints  # (line_index, point, direction)
        self.b0 = self._ray_bound(vec(1, 0))
        self.b1 = self._ray_bound(vec(0, 1))
        self.bounded = (
            self.b0 is not None and self.b1 is not None and not self._has_recession()
        )
        self.chain = self._build_chain() if self.bounded else None
        self.edge_tags = self._tag_edges() if self.bounded else None

    def _ray_bound(self, w):
        """Radius at which the boundary crosses the ray through w, or None."""
        best = None
        for _, p, d in self.constraints:
            c = wedge(d, w)
            if c < 0:
                lam = wedge(d, p) / c
                if best is None or lam < best:
                    best = lam
        return best

    def _has_recession(self):
        # an unbounded direction of the piece, if any, is parallel to a
        # constraint or to a cone edge
        cands = [vec(1, 0), vec(0, 1)]
        for _, _, d in self.constraints:
            cands.extend((d, -d))
        for w in cands:
            if w.x < 0 or w.y < 0 or w.is_zero():
                continue
            if all(wedge(d, w) >= 0 for _, _, d in self.constraints):
                return True
        return False

    def feasible(self, q):
        return (
            q.x >= 0
            and q.y >= 0
            and all(wedge(d, q - p) >= 0 for _, p, d in self.constraints)
        )

    def _build_chain(self):
        """Boundary corners away from the origin, swept from rho_i to
        rho_{i+1}; the first and last points sit on the two cone rays."""
        pts = [Vec2(self.b0, Fraction(0)), Vec2(Fraction(0), self.b1)]
        m = len(self.constraints)
        for i in range(m):
            _, pi, di = self.constraints[i]
            ci = wedge(di, pi)
            for j in range(i + 1, m):
                _, pj, dj = self.constraints[j]
                det = wedge(di, dj)
                if det == 0:
                    continue
                cj = wedge(dj, pj)
                q = Vec2((ci * dj.x - cj * di.x) / det, (ci * dj.y - cj * di.y) / det)
                if q.x <= 0 or q.y <= 0:
                    continue
                if self.feasible(q):
                    pts.append(q)
        pts.sort(key=lambda q: (1, Fraction(0)) if q.x == 0 else (0, q.y / q.x))
        chain = [pts[0]]
        for q in pts[1:]:
            if q != chain[-1]:
                chain.append(q)
        return chain

    def _tag_edges(self):
        tags = []
        for a, b in zip(self.chain, self.chain[1:]):
            t = frozenset(
                idx
                for idx, p, d in self.constraints
                if wedge(d, a - p) == 0 and wedge(d, b - p) == 0
            )
            assert t, "boundary edge without a supporting line"
            tags.append(t)
        return tags


class PolygonOnB:
    """Intersection of generalized half spaces, stored chartwise."""

    def __init__(self, half_spaces):
        if not half_spaces:
            raise ValueError("need at least one half space")
        atlas = half_spaces[0].atlas
        if any(hs.atlas is not atlas for hs in half_spaces):
            raise ValueError("half spaces live on different pairs")
        self.atlas = atlas
        self.half_spaces = list(half_spaces)
        n = atlas.n
        per = [[] for _ in range(n)]
        for idx, hs in enumerate(self.half_spaces):
            for cone, p, d in hs.line.segments:
                per[cone].append((idx, p, d))
        self.pieces = [ChartPiece(atlas, i, per[i]) for i in range(n)]
        self.bounded = all(pc.bounded for pc in self.pieces)
        if self.bounded:
            for i in range(n):
                if self.pieces[i].b0 != self.pieces[(i - 1) % n].b1:
                    raise ValueError(f"boundary does not close up across ray {i}")

    def contains(self, point, num=1, den=1):
        """Whether the point lies in (num/den) * F."""
        q = point.vec()
        return all(
            wedge(d, den * q - num * p) >= 0
            for _, p, d in self.pieces[point.cone % self.atlas.n].constraints
        )

    def membership_scale(self, point, den=1):
        """Least positive integer k with the point in (k/den) * F."""
        q = point.vec()
        k = 1
        for _, p, d in self.pieces[point.cone % self.atlas.n].constraints:
            k = max(k, ceil(Fraction(den) * wedge(d, q) / wedge(d, p)))
        return k

    def ray_crossing(self, i):
        """Radius of the boundary crossing on rho_i."""
        if not self.bounded:
            raise ValueError("unbounded polygon has no closed boundary")
        return self.pieces[i % self.atlas.n].b0

    def vertices(self):
        """Boundary corners strictly inside cones, as (cone, point) pairs."""
        if not self.bounded:
            raise ValueError("unbounded polygon has no closed boundary")
        out = []
        for pc in self.pieces:
            out.extend((pc.cone, q) for q in pc.chain[1:-1])
        return out

    def edge_length(self, line_index):
        """Total lattice length of the boundary edges on the given line."""
        total = Fraction(0)
        for pc in self.pieces:
            for (a, b), tags in zip(zip(pc.chain, pc.chain[1:]), pc.edge_tags):
                if line_index in tags:
                    diff = b - a
                    g = primitive(diff)
                    total += diff.x / g.x if g.x != 0 else diff.y / g.y
        return total

    def piece_polygon(self, i, num=1, den=1):
        """The cone-i piece of (num/den) * F as a plane polygon."""
        pc = self.pieces[i % self.atlas.n]
        if not pc.bounded:
            raise ValueError("unbounded piece")
        s = Fraction(num, den)
        return PlanePolygon([Vec2(Fraction(0), Fraction(0))] + [s * q for q in pc.chain])


def intersect(half_spaces):
    """The polygon cut out by the given half spaces."""
    return PolygonOnB(half_spaces)


def enumerate_polygon_points(polygon, num=1, den=1):
    """All integral points of (num/den) * F, one canonical chart point each."""
    n = polygon.atlas.n
    pts = [ChartPoint(0, 0, 0, n)]
    for i in range(n):
        poly = polygon.piece_polygon(i, num, den)
        for v in enumerate_lattice_points(poly):
            if v.y > 0:
                pts.append(ChartPoint(i, v.x, v.y, n))
    return pts


class WeilDivisorW:
    """Positive integer coefficients of a boundary Weil divisor sum a_i D_i."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        self.entries = tuple(int(a) for a in entries)
        if any(a <= 0 for a in self.entries):
            raise ValueError("coefficients must be positive integers")

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other):
        return isinstance(other, WeilDivisorW) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return f"WeilDivisorW{self.entries}"

    def pairings(self, pair):
        """(W . D_j)_j computed with the boundary intersection matrix."""
        g = pair.boundary_gram()
        n = pair.n
        return [sum(g[j][i] * self.entries[i] for i in range(n)) for j in range(n)]

    def is_d_ample(self, pair):
        return all(x > 0 for x in self.pairings(pair))

    def is_nef(self, pair):
        return all(x >= 0 for x in self.pairings(pair))


def parallel_polygon(pair, w):
    """P(W): the intersection of the half spaces of the lines parallel to
    rho_i at lattice distance a_i, for a D-ample W = sum a_i D_i."""
    w = w if isinstance(w, WeilDivisorW) else WeilDivisorW(w)
    if len(w) != pair.n:
        raise ValueError("coefficient count does not match the boundary")
    if not w.is_d_ample(pair):
        raise ValueError("divisor is not D-ample")
    atlas = build_atlas(pair)
    hs = [half_space(boundary_parallel_line(atlas, i, w[i])) for i in range(pair.n)]
    polygon = PolygonOnB(hs)
    polygon.weil = w
    return polygon


def find_parallel_configuration(pair):
    """A divisor whose parallel polygon has a correct corner in every cone,
    or the string "none".

    For n >= 2 this exists whenever some component has non-negative
    self-intersection, by the recursion a_{i+1} = max(1, -D_i^2 a_i + 1)
    started with a = 1 after such a component; for n = 1 it exists if and
    only if D^2 >= 2."""
    from .pair_model import is_positive

    if is_positive(pair) is None:
        raise ValueError("pair is not positive")
    n, d = pair.n, pair.self_ints
    if n == 1:
        return WeilDivisorW([1]) if d[0] >= 2 else "none"
    i0 = next((i for i in range(n) if d[i] >= 0), None)
    if i0 is None:
        return "none"
    a = [0] * n
    a[(i0 + 1) % n] = 1
    for k in range(1, n):
        i = (i0 + k) % n
        a[(i + 1) % n] = 1 if -d[i] <= 0 else (-d[i]) * a[i] + 1
    w = WeilDivisorW(a)
    assert w.is_d_ample(pair)
    return w


def ass_poly_scale(polygon):
    """Minimal integer m >= 1 such that F/m crosses every rho_i at 1/a_i with
    a_i a positive integer; returns (m, the divisor with those a_i)."""
    rs = [polygon.ray_crossing(i) for i in range(polygon.atlas.n)]
    m = lcm(*(r.numerator for r in rs))
    return m, WeilDivisorW([Fraction(m) / r for r in rs])


def height(pair, w, point, cls=None):
    """The grading height g: for q = b v_i + c v_{i+1}, g(q) = b a_i + c a_{i+1};
    with a curve class, g(q, C) = g(q) + W . C.

    For a polygon whose vertices all lie on rays of the fan and whose ray
    crossings are at 1/a_i, an integral point q lies in m*F exactly when
    g(q) <= m."""
    ent = tuple(w)
    n = pair.n
    g = point.b * ent[point.cone % n] + point.c * ent[(point.cone + 1) % n]
    if cls is not None:
        from .pair_model import weight

        g += sum(a * c for a, c in zip(ent, weight(pair, cls).entries))
    return g


def _forward_escape(atlas, cone, p, d, max_steps=500):
    """(cone, primitive direction) in which the ray from p along d escapes."""
    walker = _Walker(atlas, cone, p, d)
    for _ in range(max_steps):
        res = walker.step()
        if res[0] == "escape":
            return walker.cone, primitive(res[1])
    raise RuntimeError("ray did not escape within the step budget")


def polygon_checks(polygon):
    """Definitional flags of a polygon: boundedness, convexity, vertex
    unimodularity and integrality, which defining lines support edges, and
    which cones hold a correct corner (a unique interior vertex whose two
    edges run off to infinity parallel to the next two rays)."""
    atlas = polygon.atlas
    n = atlas.n
    if not polygon.bounded:
        report = dict.fromkeys(
            (
                "convex",
                "nonsingular",
                "integral",
                "supporting_edges",
                "correct_corners",
                "parallel_configuration",
                "vertex_on_ray",
                "vertex_count",
                "scale",
                "weil",
                "nef_values",
                "nef",
            )
        )
        report["bounded"] = False
        return report

    chains = [pc.chain for pc in polygon.pieces]
    ray_turn = []
    corners = []  # (cone, point, incoming dir, outgoing dir), chart of `cone`
    for i in range(n):
        prev = chains[(i - 1) % n]
        din = atlas.cross_ccw((i - 1) % n)(primitive(prev[-1] - prev[-2]))
        dout = primitive(chains[i][1] - chains[i][0])
        ray_turn.append(wedge(din, dout))
        if ray_turn[-1] != 0:
            corners.append((i, chains[i][0], din, dout))
    for i in range(n):
        ch = chains[i]
        for j in range(1, len(ch) - 1):
            din = primitive(ch[j] - ch[j - 1])
            dout = primitive(ch[j + 1] - ch[j])
            assert wedge(din, dout) > 0
            corners.append((i, ch[j], din, dout))

    convex = all(t >= 0 for t in ray_turn)
    nonsingular = convex and all(
        abs(wedge(din, dout)) == 1 for _, _, din, dout in corners
    )
    integral = all(q.is_integral() for _, q, _, _ in corners)
    supporting = [
        any(idx in tags for pc in polygon.pieces for tags in pc.edge_tags)
        for idx in range(len(polygon.half_spaces))
    ]

    vertex_on_ray = [t != 0 for t in ray_turn]
    correct = []
    for i in range(n):
        ch = chains[i]
        ok = (
            len(ch) == 3
            and not vertex_on_ray[i]
            and not vertex_on_ray[(i + 1) % n]
        )
        if ok:
            v = ch[1]
            e_in = _forward_escape(atlas, i, v, primitive(v - ch[0]))
            e_out = _forward_escape(atlas, i, v, primitive(ch[2] - v))
            want = {(i, (0, 1)), ((i + 1) % n, (0, 1))}
            got = {(e_in[0], (int(e_in[1].x), int(e_in[1].y))),
                   (e_out[0], (int(e_out[1].x), int(e_out[1].y)))}
            ok = got == want
        correct.append(ok)

    scale, w = ass_poly_scale(polygon)
    nef_values = w.pairings(atlas.pair)
    return {
        "bounded": True,
        "convex": convex,
        "nonsingular": nonsingular,
        "integral": integral,
        "supporting_edges": supporting,
        "correct_corners": correct,
        "parallel_configuration": all(correct),
        "vertex_on_ray": vertex_on_ray,
        "vertex_count": len(corners),
        "scale": scale,
        "weil": w,
        "nef_values": nef_values,
        "nef": all(x >= 0 for x in nef_values),
    }
