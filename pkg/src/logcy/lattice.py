"""Exact rational 2D lattice geometry primitives."""

from fractions import Fraction
from math import gcd


class Vec2:
    """A point or vector of the rational plane."""

    __slots__ = ("x", "y")

    def __init__(self, x, y):
        self.x = Fraction(x)
        self.y = Fraction(y)

    def __add__(self, other):
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other):
        return Vec2(self.x - other.x, self.y - other.y)

    def __neg__(self):
        return Vec2(-self.x, -self.y)

    def __mul__(self, k):
        return Vec2(self.x * k, self.y * k)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Vec2) and self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash((self.x, self.y))

    def __repr__(self):
        return f"Vec2({self.x}, {self.y})"

    def __iter__(self):
        return iter((self.x, self.y))

    def is_zero(self):
        return self.x == 0 and self.y == 0

    def is_integral(self):
        return self.x.denominator == 1 and self.y.denominator == 1

    def key(self):
        return (self.x, self.y)


def vec(x, y=None):
    if y is None:
        x, y = x
    return Vec2(x, y)


def wedge(u, v):
    """Determinant u_x v_y - u_y v_x."""
    return u.x * v.y - u.y * v.x


def dot(u, v):
    return u.x * v.x + u.y * v.y


def primitive(v):
    """The primitive integer vector positively proportional to v."""
    if v.is_zero():
        raise ValueError("zero vector has no primitive direction")
    d = v.x.denominator * v.y.denominator // gcd(v.x.denominator, v.y.denominator)
    a, b = int(v.x * d), int(v.y * d)
    g = gcd(abs(a), abs(b))
    return Vec2(a // g, b // g)


class UnimodularMap:
    """An element of SL2(Z) acting on column vectors."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d):
        if a * d - b * c != 1:
            raise ValueError("matrix is not in SL2(Z)")
        self.a, self.b, self.c, self.d = a, b, c, d

    def __call__(self, v):
        return Vec2(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)

    def __matmul__(self, other):
        return UnimodularMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self):
        return UnimodularMap(self.d, -self.b, -self.c, self.a)

    def __eq__(self, other):
        return (self.a, self.b, self.c, self.d) == (other.a, other.b, other.c, other.d)

    def __hash__(self):
        return hash((self.a, self.b, self.c, self.d))

    def __repr__(self):
        return f"UnimodularMap({self.a}, {self.b}, {self.c}, {self.d})"

    @staticmethod
    def identity():
        return UnimodularMap(1, 0, 0, 1)

    def is_identity(self):
        return (self.a, self.b, self.c, self.d) == (1, 0, 0, 1)


class PlanePolygon:
    """A strictly convex polygon, vertices counterclockwise."""

    def __init__(self, vertices):
        vs = [v if isinstance(v, Vec2) else vec(v) for v in vertices]
        if len(vs) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        m = len(vs)
        for i in range(m):
            a, b, c = vs[i], vs[(i + 1) % m], vs[(i + 2) % m]
            if wedge(b - a, c - b) <= 0:
                raise ValueError("vertices not strictly convex counterclockwise")
        self.vertices = vs

    def __len__(self):
        return len(self.vertices)

    def contains(self, p):
        """Closed-polygon membership."""
        vs = self.vertices
        m = len(vs)
        return all(wedge(vs[(i + 1) % m] - vs[i], p - vs[i]) >= 0 for i in range(m))

    def area(self):
        vs = self.vertices
        m = len(vs)
        s = sum(wedge(vs[i], vs[(i + 1) % m]) for i in range(m))
        return s / 2

    def bounding_box(self):
        xs = [v.x for v in self.vertices]
        ys = [v.y for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)


def enumerate_lattice_points(p):
    """All integer points in the closed polygon, sorted lexicographically."""
    import math

    x0, y0, x1, y1 = p.bounding_box()
    pts = []
    for x in range(math.ceil(x0), math.floor(x1) + 1):
        for y in range(math.ceil(y0), math.floor(y1) + 1):
            q = Vec2(x, y)
            if p.contains(q):
                pts.append(q)
    pts.sort(key=Vec2.key)
    return pts


def pick_data(p):
    """(area, boundary lattice count, interior lattice count) for an integral polygon.

    Pick's identity area = interior + boundary/2 - 1 holds for the result.
    """
    vs = p.vertices
    if not all(v.is_integral() for v in vs):
        raise ValueError("polygon vertices must be integral")
    m = len(vs)
    boundary = 0
    for i in range(m):
        d = vs[(i + 1) % m] - vs[i]
        boundary += gcd(abs(int(d.x)), abs(int(d.y)))
    area = p.area()
    interior = len(enumerate_lattice_points(p)) - boundary
    assert area == interior + Fraction(boundary, 2) - 1
    return area, boundary, interior
