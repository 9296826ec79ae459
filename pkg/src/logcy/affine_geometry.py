"""The integral affine manifold B of a pair: one singularity at the origin,
one cone per boundary node, charts determined by the self-intersections.

Cone i is spanned by the rays rho_i and rho_{i+1} (indices mod n) and a point
with coordinates (b, c) in cone i is b*v_i + c*v_{i+1}.  Crossing rho_{i+1}
counterclockwise into cone i+1 maps (b, c) to (c - D_{i+1}^2 * b, -b).
The machinery works verbatim for n = 1 (one self-glued cone) and n = 2
(two cones sharing both rays).
"""

from fractions import Fraction

from .lattice import UnimodularMap, Vec2, vec, wedge


class ChartPoint:
    """A point of B in cone coordinates; points on a ray are stored in the
    cone on the clockwise side (so c > 0 except at the origin)."""

    __slots__ = ("cone", "b", "c")

    def __init__(self, cone, b, c, n=None):
        b, c = Fraction(b), Fraction(c)
        if b < 0 or c < 0:
            raise ValueError("cone coordinates must be non-negative")
        if n is not None:
            cone %= n
            if c == 0 and b > 0:
                cone = (cone - 1) % n
                b, c = Fraction(0), b
            if b == 0 and c == 0:
                cone = 0
        self.cone, self.b, self.c = cone, b, c

    def vec(self):
        return Vec2(self.b, self.c)

    def is_integral(self):
        return self.b.denominator == 1 and self.c.denominator == 1

    def __eq__(self, other):
        return (
            isinstance(other, ChartPoint)
            and (self.cone, self.b, self.c) == (other.cone, other.b, other.c)
        )

    def __hash__(self):
        return hash((self.cone, self.b, self.c))

    def __repr__(self):
        return f"ChartPoint(cone={self.cone}, {self.b}, {self.c})"


class AffineAtlas:
    """Charts and transition maps of B for a given pair."""

    def __init__(self, pair):
        self.pair = pair
        self.n = pair.n
        self.self_ints = list(pair.self_ints)

    def cross_ccw(self, i):
        """Transition from cone i coordinates to cone i+1 coordinates
        (crossing the ray rho_{i+1})."""
        d = self.self_ints[(i + 1) % self.n]
        return UnimodularMap(-d, 1, -1, 0)

    def cross_cw(self, i):
        """Transition from cone i coordinates to cone i-1 coordinates
        (crossing the ray rho_i)."""
        return self.cross_ccw((i - 1) % self.n).inverse()

    def monodromy(self):
        """Counterclockwise transport once around the origin, cone 0 to cone 0."""
        m = UnimodularMap.identity()
        for i in range(self.n):
            m = self.cross_ccw(i) @ m
        return m

    def point(self, cone, b, c):
        return ChartPoint(cone, b, c, self.n)

    def ray_point(self, i, r=1):
        """The point r * v_i."""
        return self.point(i, r, 0)


def build_atlas(pair):
    return AffineAtlas(pair)


def parallel_transport(atlas, v, start_cone, steps):
    """Transport an integral vector along a chart path.

    `steps` is a sequence of +1 (counterclockwise) / -1 (clockwise) cone
    crossings starting from `start_cone`; returns (vector, end_cone)."""
    cone = start_cone % atlas.n
    for s in steps:
        if s == 1:
            v = atlas.cross_ccw(cone)(v)
            cone = (cone + 1) % atlas.n
        elif s == -1:
            v = atlas.cross_cw(cone)(v)
            cone = (cone - 1) % atlas.n
        else:
            raise ValueError("steps must be +1 or -1")
    return v, cone


def developing_map(atlas, count, base=((1, 0), (0, 1))):
    """Images of count consecutive ray lifts under the developing map.

    The k-th entry is the image of rho_{k mod n}, starting from the two base
    vectors fixed for rho_0 and rho_1 (the choice of base is the SL2(Z)
    ambiguity of the developing map)."""
    u, v = vec(base[0]), vec(base[1])
    out = [u, v]
    for k in range(1, count - 1):
        d = atlas.self_ints[k % atlas.n]
        u, v = v, -u - d * v
        out.append(v)
    return out[:count]


class _Walker:
    """Exact straight-line walking on B, one cone at a time.

    State: cone index, point and direction in that cone's coordinates.
    Along a straight line the angular coordinate is strictly monotone
    (the sign of wedge(point, direction) is constant), so every step either
    crosses one determined ray or escapes to infinity inside the cone."""

    def __init__(self, atlas, cone, p, d):
        if d.is_zero():
            raise ValueError("zero direction")
        self.atlas = atlas
        self.cone = cone % atlas.n
        self.p = p
        self.d = d
        if wedge(p, d) == 0:
            raise ValueError("line passes through the origin")

    def side(self):
        return 1 if wedge(self.p, self.d) > 0 else -1

    def step(self):
        """Advance to the next ray crossing.

        Returns ('cross', ray_index, crossing_point_radial) after updating the
        state into the neighbouring cone, or ('escape', asymptotic_direction)
        if the ray p + t*d stays in the current cone forever."""
        a, n = self.atlas, self.atlas.n
        p, d = self.p, self.d
        s = wedge(p, d)
        if s > 0:
            # counterclockwise: normalize a start on rho_{i+1} into cone i+1
            if p.x == 0:
                self._to_ccw_neighbor()
                p, d = self.p, self.d
            if d.x >= 0:
                assert d.y >= 0 or d.x > 0
                return ("escape", d)
            t = -p.x / d.x
            r = p.y + t * d.y
            assert t > 0 and r > 0
            self.p = Vec2(Fraction(0), r)
            self._to_ccw_neighbor()
            return ("cross", self.cone, r)
        else:
            if p.y == 0:
                self._to_cw_neighbor()
                p, d = self.p, self.d
            if d.y >= 0:
                return ("escape", d)
            t = -p.y / d.y
            r = p.x + t * d.x
            assert t > 0 and r > 0
            self.p = Vec2(r, Fraction(0))
            ray = self.cone
            self._to_cw_neighbor()
            return ("cross", ray, r)

    def _to_ccw_neighbor(self):
        m = self.atlas.cross_ccw(self.cone)
        self.p = m(self.p)
        self.d = m(self.d)
        self.cone = (self.cone + 1) % self.atlas.n

    def _to_cw_neighbor(self):
        m = self.atlas.cross_cw(self.cone)
        self.p = m(self.p)
        self.d = m(self.d)
        self.cone = (self.cone - 1) % self.atlas.n


class ImmersedLine:
    """A complete straight line on B, oriented with the origin on its left.

    Each segment is a (cone, point, direction) triple: one pass of the line
    through that cone, with a representative point of the pass and the travel
    direction, both in the cone's coordinates."""

    def __init__(self, atlas, segments, start_escape, end_escape):
        self.atlas = atlas
        self.segments = segments
        self.start_escape = start_escape  # (cone, direction) as t -> -infinity
        self.end_escape = end_escape  # (cone, direction) as t -> +infinity

    def distance(self):
        cone, p, d = self.segments[0]
        return abs(wedge(p, d))

    def crossings(self):
        return len(self.segments) - 1


def trace_line(atlas, start, direction, max_segments=500, check_positive=True):
    """Trace the complete immersed line through `start` with the given chart
    direction, normalized so that the origin lies on its left."""
    if check_positive:
        from .pair_model import is_positive

        if is_positive(atlas.pair) is None:
            raise ValueError("line tracing requires a positive pair")
    p0 = start.vec() if isinstance(start, ChartPoint) else start
    cone0 = start.cone if isinstance(start, ChartPoint) else 0
    d = direction
    if wedge(p0, d) == 0:
        raise ValueError("line passes through the origin")
    if wedge(p0, d) < 0:
        d = -d

    def walk(cone, p, dd):
        w = _Walker(atlas, cone, p, dd)
        segs = [(w.cone, w.p, w.d)]
        for _ in range(max_segments):
            res = w.step()
            if res[0] == "escape":
                return segs, (w.cone, res[1])
            segs.append((w.cone, w.p, w.d))
        raise RuntimeError("line did not escape within the segment budget")

    fwd, end_esc = walk(cone0, p0, d)
    back, start_esc = walk(cone0, p0, -d)
    segments = [(cone, pt, -dd) for cone, pt, dd in reversed(back[1:])]
    segments.extend(fwd)
    return ImmersedLine(atlas, segments, (start_esc[0], -start_esc[1]), end_esc)


def line_distance(line):
    """The chart-independent lattice distance |0p ^ v| of the line from 0."""
    return line.distance()
