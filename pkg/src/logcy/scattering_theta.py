"""Scattering diagrams on B and theta-function multiplication.

Walls are rays of B through the origin, carried by a cone of the fan
structure and a primitive direction in that cone's coordinates.  The initial
walls come from the toric model: the ray rho_i carries the slab function
prod_j (1 + z^[E_ij] X_i^{-1}) with X_i the monomial of v_i.  Consistency is
checked in the plane of the toric fan (the singular points of B pushed to
infinity along their rays, so slabs become full lines): the diagram is
completed order by order in the wall-term grading until the counterclockwise
loop of wall-crossing automorphisms around the origin is the identity.

Theta structure constants count pairs of broken lines with a common generic
endpoint near the target direction, also in the plane.  The kinks of the
single-valued piecewise linear function phi (one pullback class per ray)
enter through the corrected wall-term classes and a closed-form twist, so
lines only bend at walls; the choice of the cone where phi vanishes is a
gauge that cancels from every structure constant.  Products over the central
fiber (all curve classes set to zero) only see straight lines on B and are
computed by a separate direct count.
"""

from fractions import Fraction

from .affine_geometry import ChartPoint, build_atlas
from .lattice import Vec2, dot, primitive, vec, wedge
from .pair_model import DivisorClass, WeightVector


def _exc_degree(cls):
    """Total degree in the exceptional classes of the toric model."""
    n = cls.lattice.n_toric
    return sum(cls.coords[n:])


def plane_chart(pair, m):
    """The fan cone of the toric model containing m, as (cone, b, c)."""
    rays = pair.toric_model.rays
    n = pair.n
    for i in range(n):
        b = wedge(m, rays[(i + 1) % n])
        c = wedge(rays[i], m)
        if b >= 0 and c >= 0:
            return i, b, c
    raise ValueError("point not contained in any fan cone")


def as_point(pair, x):
    """Normalize a point of B: ChartPoints pass through, plane vectors are
    located in the fan of the toric model (exact for toric pairs)."""
    if isinstance(x, ChartPoint):
        return ChartPoint(x.cone, x.b, x.c, pair.n)
    m = x if isinstance(x, Vec2) else vec(*x)
    if pair.toric_model is None:
        raise ValueError("plane coordinates need a toric model")
    cone, b, c = plane_chart(pair, m)
    return ChartPoint(cone, b, c, pair.n)


def _plane_vec(pair, p):
    """The plane point of a ChartPoint under the fan identification."""
    rays = pair.toric_model.rays
    return p.b * rays[p.cone] + p.c * rays[(p.cone + 1) % pair.n]


def _as_plane(pair, x):
    """Normalize a point given as a ChartPoint, Vec2 or pair to a plane Vec2."""
    if isinstance(x, ChartPoint):
        return _plane_vec(pair, x)
    return x if isinstance(x, Vec2) else vec(*x)


def point_weight(pair, p):
    """The weight vector of a point of B."""
    entries = [Fraction(0)] * pair.n
    entries[p.cone % pair.n] += p.b
    entries[(p.cone + 1) % pair.n] += p.c
    return WeightVector(entries)


def class_weight(pair, cls):
    """The weight vector (C . D_j)_j of a curve class."""
    from .pair_model import intersection_number

    return WeightVector(
        intersection_number(cls, pair.boundary_class(j)) for j in range(pair.n)
    )


class PLFunctionPhi:
    """A single-valued piecewise linear function on the plane of the toric
    fan with the given kink class at each ray, zero on the cone `zero_cone`.
    Single-valuedness requires the kinks to close up around the origin, which
    holds for the pullback classes by the standard toric relations."""

    def __init__(self, pair, kinks, zero_cone=None):
        self.pair = pair
        self.kinks = list(kinks)
        if len(self.kinks) != pair.n:
            raise ValueError("one kink class per ray required")
        n = pair.n
        self.zero_cone = (n - 1) if zero_cone is None else zero_cone % n
        if pair.toric_model is None:
            raise ValueError("missing toric model")
        rays = pair.toric_model.rays
        ax, bx = pair.zero_class(), pair.zero_class()
        self._branch = [None] * n
        self._branch[self.zero_cone] = (ax, bx)
        for s in range(1, n + 1):
            i = (self.zero_cone + s) % n
            u = rays[i]
            # primitive normal of rho_i, positive on its counterclockwise side
            ax = ax + int(-u.y) * self.kinks[i]
            bx = bx + int(u.x) * self.kinks[i]
            if s < n:
                self._branch[i] = (ax, bx)
            elif not (ax.is_zero() and bx.is_zero()):
                raise ValueError("kinks do not close up around the origin")

    def kink(self, i):
        return self.kinks[i % self.pair.n]

    def slab_kink(self, i, j):
        """Kink of the slab between the j-th and (j+1)-th singular point on
        ray i: the kink at infinity plus the exceptional classes beyond."""
        pair = self.pair
        out = pair.boundary_class(i)
        for k in range(j, pair.toric_model.blowups_per_ray[i]):
            out = out + pair.exceptional_class(i, k)
        return out

    def value(self, m):
        """The value at a plane point, an integral class for integral m."""
        cone, _, _ = plane_chart(self.pair, m)
        ax, bx = self._branch[cone]
        return int(m.x) * ax + int(m.y) * bx


def build_phi(pair, zero_cone=None):
    """The piecewise linear function with kink [F_i] at rho_i: the kink seen
    between the origin and the first singular point of the ray (all of B in
    the presentation with the singular points pushed to infinity)."""
    if pair.toric_model is None:
        raise ValueError("missing toric model")
    return PLFunctionPhi(
        pair, [pair.classes.pullback_class(i) for i in range(pair.n)], zero_cone
    )


def _norm_function(function):
    """Normalize wall terms to {(class, j, degree): coeff}."""
    out = {}
    for key, c in function.items():
        if len(key) == 2:
            cls, j = key
            deg = _exc_degree(cls)
        else:
            cls, j, deg = key
        if j == 0:
            raise ValueError("wall terms must move along the wall")
        if deg < 1:
            raise ValueError("wall function not graded")
        out[(cls, j, deg)] = out.get((cls, j, deg), 0) + c
    return {k: v for k, v in out.items() if v}


class Wall:
    """A wall: a ray of B from the origin, given by the carrying cone and a
    primitive direction in that cone's coordinates, with a function
    1 + sum of terms c z^C x^(j * direction).  Slab walls are the initial
    walls through the singular points; they extend to full lines in the
    plane presentation, ordinary walls stay rays."""

    __slots__ = ("cone", "direction", "function", "slab")

    def __init__(self, pair, cone, direction, function, slab=False):
        n = pair.n
        d = primitive(direction if isinstance(direction, Vec2) else vec(*direction))
        cone %= n
        if d.x < 0 or d.y < 0 or d.is_zero():
            raise ValueError("wall direction must lie in its cone")
        if d.x == 0:
            # the ray rho_{cone+1}: canonical chart is the next cone
            cone = (cone + 1) % n
            d = vec(1, 0)
            function = {
                (k[0], k[1]) if len(k) == 2 else k: v for k, v in function.items()
            }
        self.cone, self.direction = cone, d
        self.function = _norm_function(function)
        if slab and not self.is_ray:
            raise ValueError("slab walls must be supported on fan rays")
        self.slab = slab

    @property
    def is_ray(self):
        """Whether the wall is supported on the fan ray rho_cone."""
        return self.direction == vec(1, 0)

    def __repr__(self):
        return (
            f"Wall(cone={self.cone}, direction={self.direction},"
            f" {len(self.function)} terms)"
        )


def initial_walls(pair):
    """One wall per blown-up ray of the toric model, with the slab function
    prod_j (1 + z^[E_ij] X_i^{-1})."""
    model = pair.toric_model
    if model is None:
        raise ValueError("missing toric model")
    walls = []
    for i in range(pair.n):
        l = model.blowups_per_ray[i]
        if l == 0:
            continue
        fn = _fn_one(pair)
        for j in range(l):
            step = dict(_fn_one(pair))
            step[(pair.exceptional_class(i, j), -1, 1)] = 1
            fn = _fn_mul(fn, step, None)
        fn.pop((pair.zero_class(), 0, 0))
        walls.append(Wall(pair, i, vec(1, 0), fn, slab=True))
    return walls


def _fn_one(pair):
    return {(pair.zero_class(), 0, 0): 1}


def _fn_mul(a, b, cap):
    out = {}
    for (ca, ja, da), xa in a.items():
        for (cb, jb, db), xb in b.items():
            if cap is not None and da + db > cap:
                continue
            key = (ca + cb, ja + jb, da + db)
            out[key] = out.get(key, 0) + xa * xb
    return {k: v for k, v in out.items() if v}


def _fn_pow(pair, fn, p, cap):
    if p < 0:
        if cap is None:
            raise ValueError("negative powers require a truncation order")
        u = {k: -v for k, v in fn.items() if k[2] > 0}
        inv = dict(_fn_one(pair))
        term = _fn_one(pair)
        for _ in range(cap):
            term = _fn_mul(term, u, cap)
            if not term:
                break
            for k, v in term.items():
                inv[k] = inv.get(k, 0) + v
        fn, p = inv, -p
    out = _fn_one(pair)
    base = dict(fn)
    while p:
        if p & 1:
            out = _fn_mul(out, base, cap)
        p >>= 1
        if p:
            base = _fn_mul(base, base, cap)
    return out


class _Locus:
    """All wall terms supported on one ray, in the carrying cone's
    coordinates, with cached truncated powers of the function."""

    __slots__ = ("direction", "function", "_powers")

    def __init__(self, pair, direction):
        self.direction = direction
        self.function = dict(_fn_one(pair))
        self._powers = {}

    def add_terms(self, terms):
        for k, v in terms.items():
            self.function[k] = self.function.get(k, 0) + v
        self._powers = {}

    def power(self, pair, p, cap):
        if cap is not None and cap < 0:
            cap = 0
        key = (p, cap)
        if key not in self._powers:
            self._powers[key] = _fn_pow(pair, self.function, p, cap)
        return self._powers[key]


class Diagram:
    """A scattering diagram truncated at a fixed order, held in the plane
    presentation: crossing loci (rays from the origin) with their functions,
    and the same loci with the term classes corrected by the piecewise
    linear function phi, which is what broken lines bend against."""

    def __init__(self, pair, walls, order, phi=None):
        if pair.toric_model is None:
            raise ValueError("missing toric model")
        self.pair = pair
        self.walls = list(walls)
        self.order = order
        self.phi = phi if phi is not None else build_phi(pair)
        self.loci = _plane_loci(pair, self.walls)
        self.corrected = []
        for lc in self.loci:
            fixed = _Locus(pair, lc.direction)
            terms = {}
            for (cls, j, dg), c in lc.function.items():
                if dg == 0:
                    continue
                e = j * lc.direction
                terms[(cls - self.phi.value(-e), j, dg)] = c
            fixed.add_terms(terms)
            self.corrected.append(fixed)

    def is_empty(self):
        return not self.walls

    def on_wall(self, p):
        """Whether the point lies on a ray of the fan or on a wall locus."""
        m = _as_plane(self.pair, p)
        if m.is_zero():
            return True
        for u in self.pair.toric_model.rays:
            if wedge(u, m) == 0 and dot(u, m) > 0:
                return True
        return any(
            wedge(lc.direction, m) == 0 and dot(lc.direction, m) > 0
            for lc in self.loci
        )


def _cross_series(pair, series, locus, d, cap):
    """Apply a wall-crossing automorphism to a series keyed
    {(class, (ex, ey), degree): coeff}; the pairing uses the normal
    n = (d.y, -d.x), negative on the counterclockwise direction of travel."""
    out = {}
    for (cls, m, deg), c in series.items():
        p = int(d.y * m[0] - d.x * m[1])
        sub = None if cap is None else cap - deg
        for (cls2, j, dg2), c2 in locus.power(pair, p, sub).items():
            key = (
                cls + cls2,
                (int(m[0] + j * d.x), int(m[1] + j * d.y)),
                deg + dg2,
            )
            out[key] = out.get(key, 0) + c * c2
    return {k: v for k, v in out.items() if v}


def _rel_angle_key(base, v):
    """Total order of plane directions by angle measured counterclockwise
    from `base`, in (0, 2*pi]; `base` itself sorts last."""
    w = wedge(base, v)
    d = dot(base, v)
    if w > 0:
        return (0, Fraction(-d, w))
    if w == 0 and d < 0:
        return (1, Fraction(0))
    if w < 0:
        return (2, Fraction(-d, w))
    return (3, Fraction(0))


def _plane_direction(pair, wall):
    """The plane direction of a wall under the identification of B with the
    plane of the toric fan (singular points pushed to infinity)."""
    rays = pair.toric_model.rays
    d = wall.direction
    return primitive(
        int(d.x) * rays[wall.cone] + int(d.y) * rays[(wall.cone + 1) % pair.n]
    )


def _plane_loci(pair, walls):
    """Plane crossing loci of the walls, one per ray from the origin, in
    counterclockwise loop order.  Slab walls pass through the singular
    points at infinity and become full lines in the plane."""
    loci = {}

    def locus(d):
        key = (d.x, d.y)
        if key not in loci:
            loci[key] = _Locus(pair, d)
        return loci[key]

    for w in walls:
        dp = _plane_direction(pair, w)
        locus(dp).add_terms(w.function)
        if w.slab:
            flipped = {(cls, -j, dg): c for (cls, j, dg), c in w.function.items()}
            locus(-dp).add_terms(flipped)
    base = primitive(pair.toric_model.rays[0])
    return sorted(
        loci.values(), key=lambda lc: _rel_angle_key(base, lc.direction)
    )


def _plane_loop_images(pair, loci, cap):
    """Images of the basis monomials under the counterclockwise loop of all
    plane wall crossings."""
    images = []
    for e in ((1, 0), (0, 1)):
        s = {(pair.zero_class(), e, 0): 1}
        for lc in loci:
            s = _cross_series(pair, s, lc, lc.direction, cap)
        images.append(s)
    return images


def loop_is_identity(pair, walls, order):
    """Whether the loop of plane wall crossings is the identity mod degree
    greater than `order`."""
    loci = _plane_loci(pair, walls)
    images = _plane_loop_images(pair, loci, order)
    return all(
        img == {(pair.zero_class(), e, 0): 1}
        for img, e in zip(images, ((1, 0), (0, 1)))
    )


def complete_to_consistency(pair, walls, order):
    """Insert walls order by order until the loop of plane wall crossings is
    the identity modulo wall-term degree > order."""
    if order < 0:
        raise ValueError("order must be non-negative")
    walls = list(walls)
    for deg in range(1, order + 1):
        loci = _plane_loci(pair, walls)
        images = _plane_loop_images(pair, loci, deg)
        defects = {}
        for idx, e in enumerate(((1, 0), (0, 1))):
            for (cls, m, dg), c in images[idx].items():
                w = vec(m[0] - e[0], m[1] - e[1])
                if w.is_zero() and cls.is_zero():
                    if c != 1:
                        raise AssertionError("loop does not fix the unit term")
                    continue
                if dg != deg:
                    raise AssertionError("lower-order defect not cancelled")
                if w.is_zero():
                    raise AssertionError("defect with trivial direction")
                defects.setdefault((cls, (w.x, w.y)), [0, 0])[idx] = c
        for (cls, wkey), (c1, c2) in sorted(
            defects.items(), key=lambda kv: (kv[0][1], kv[0][0].coords)
        ):
            wrel = vec(*wkey)
            d = primitive(-wrel)
            n1, n2 = d.y, -d.x
            delta = -Fraction(c1, n1) if n1 else -Fraction(c2, n2)
            if c1 + delta * n1 != 0 or c2 + delta * n2 != 0:
                raise AssertionError("defect is not a derivation")
            if delta == 0:
                continue
            if delta.denominator == 1:
                delta = int(delta)
            jmult = int(wrel.x // d.x) if d.x else int(wrel.y // d.y)
            cone, b, c = plane_chart(pair, d)
            walls.append(
                Wall(pair, cone, (int(b), int(c)), {(cls, jmult, deg): delta})
            )
    return Diagram(pair, walls, order)


# --- broken lines in the plane --------------------------------------------------


class BrokenLine:
    """A broken line in the plane: carried monomial coeff * z^class * x^v per
    segment, walked backwards from the endpoint; v_end is the exponent of the
    final segment and cls the sum of the phi-corrected bend classes."""

    __slots__ = ("q", "endpoint", "v_end", "coeff", "cls", "bend_degree", "path")

    def __init__(self, q, endpoint, v_end, coeff, cls, bend_degree, path):
        self.q = q
        self.endpoint = endpoint
        self.v_end = v_end
        self.coeff = coeff
        self.cls = cls
        self.bend_degree = bend_degree
        self.path = path

    def __repr__(self):
        return f"BrokenLine(q={self.q}, v_end={self.v_end}, z^({self.cls}))"


class _Degenerate(Exception):
    pass


def _point_reps(pair, p):
    """All chart representations of a point or direction of B."""
    n = pair.n
    if p.b == 0 and p.c == 0:
        return [(i, vec(0, 0)) for i in range(n)]
    reps = [(p.cone, vec(p.b, p.c))]
    if p.b == 0 and p.c > 0:
        reps.append(((p.cone + 1) % n, vec(p.c, 0)))
    return reps


def _candidate_exponents(diagram, q_vec, order):
    """Final-segment exponent candidates: the asymptotic exponent shifted by
    up to `order` worth of bend contributions; maps each candidate to the
    least bend degree that can reach it."""
    start = (int(q_vec.x), int(q_vec.y))
    best = {start: 0}
    layer = {(start, 0)}
    while layer:
        nxt = set()
        for vkey, deg in layer:
            v = vec(*vkey)
            for lc in diagram.corrected:
                for (cls2, j, dg2) in lc.function:
                    if dg2 == 0 or deg + dg2 > order:
                        continue
                    v2 = v + j * lc.direction
                    if v2.is_zero():
                        continue
                    key = (int(v2.x), int(v2.y))
                    if best.get(key, order + 1) > deg + dg2:
                        best[key] = deg + dg2
                        nxt.add((key, deg + dg2))
        layer = nxt
    return best


def broken_lines(diagram, q, endpoint, order=None):
    """All broken lines with asymptotic monomial z^q ending at the generic
    endpoint, with total bend degree at most the truncation order."""
    pair = diagram.pair
    order = diagram.order if order is None else order
    q = as_point(pair, q)
    if not q.is_integral() or (q.b == 0 and q.c == 0):
        raise ValueError("initial direction must be a nonzero integral point")
    endpoint = _as_plane(pair, endpoint)
    if diagram.on_wall(endpoint):
        raise ValueError("endpoint lies on a wall")
    q_vec = _plane_vec(pair, q)
    out = []
    for vkey in sorted(_candidate_exponents(diagram, q_vec, order)):
        _trace_back(diagram, q, q_vec, endpoint, vec(*vkey), order, out)
    return out


def _trace_back(diagram, q, q_vec, endpoint, v_end, order, out):
    pair = diagram.pair
    limit = 16 * (pair.n + 4) * (order + 2)

    def rec(x, v, coeff, cls, budget, path, depth):
        if depth > limit:
            raise RuntimeError("broken line did not escape")
        events = []
        for lc in diagram.corrected:
            d = lc.direction
            dv = wedge(d, v)
            if dv == 0:
                continue
            t = -Fraction(wedge(d, x), dv)
            if t <= 0:
                continue
            y = x + t * v
            if y.is_zero():
                raise _Degenerate
            if dot(d, y) > 0:
                events.append((t, lc))
        if not events:
            if v == q_vec:
                out.append(
                    BrokenLine(q, endpoint, v_end, coeff, cls, order - budget, path)
                )
            return
        events.sort(key=lambda ev: ev[0])
        if len(events) > 1 and events[0][0] == events[1][0]:
            raise _Degenerate
        t, lc = events[0]
        y = x + t * v
        d = lc.direction
        p = int(abs(wedge(d, v)))
        for (cls2, j, dg2), c2 in lc.power(pair, p, budget).items():
            v_prev = v - j * d
            if v_prev.is_zero():
                continue
            rec(
                y,
                v_prev,
                coeff * c2,
                cls + cls2,
                budget - dg2,
                path + [y],
                depth + 1,
            )

    rec(endpoint, v_end, 1, pair.zero_class(), order, [], 0)


def _generic_endpoint(diagram, r, salt=0):
    """A deterministic generic plane point near r, off every wall."""
    r_vec = _plane_vec(diagram.pair, r)
    for shrink in range(10):
        eps1 = Fraction(3, 1009 + 2 * salt) / 2**shrink
        eps2 = Fraction(1, 1013 + 2 * salt) / 2**shrink
        q = r_vec + vec(eps1, eps2)
        if not diagram.on_wall(q):
            return q
    raise RuntimeError("no generic endpoint found")


def structure_constant(diagram, p1, p2, r, order=None, endpoint=None):
    """The coefficient of theta_r in theta_p1 * theta_p2 as a dict mapping
    curve classes to integers."""
    pair = diagram.pair
    order = diagram.order if order is None else order
    p1 = as_point(pair, p1)
    p2 = as_point(pair, p2)
    r = as_point(pair, r)
    origin = ChartPoint(0, 0, 0, pair.n)
    if p1 == origin or p2 == origin:
        other = p2 if p1 == origin else p1
        return {pair.zero_class(): 1} if r == other else {}
    for salt in range(8):
        q = endpoint if endpoint is not None else _generic_endpoint(diagram, r, salt)
        try:
            lines1 = broken_lines(diagram, p1, q, order)
            lines2 = broken_lines(diagram, p2, q, order)
            break
        except _Degenerate:
            if endpoint is not None:
                raise ValueError("endpoint gives a degenerate configuration")
            continue
    else:
        raise RuntimeError("no generic endpoint found")
    r_vec = _plane_vec(pair, r)
    phi = diagram.phi
    twist = (
        phi.value(_plane_vec(pair, p1))
        + phi.value(_plane_vec(pair, p2))
        - phi.value(r_vec)
    )
    combo = {}
    for g1 in lines1:
        for g2 in lines2:
            if g1.bend_degree + g2.bend_degree > order:
                continue
            if g1.v_end + g2.v_end != r_vec:
                continue
            cls = g1.cls + g2.cls + twist
            combo[cls] = combo.get(cls, 0) + g1.coeff * g2.coeff
    return {k: v for k, v in combo.items() if v}


class ThetaExpansion:
    """A finite sum of c z^C theta_r, keyed by the point r of B."""

    def __init__(self, diagram, terms=None):
        self.diagram = diagram
        self.terms = {}
        for key, combo in (terms or {}).items():
            combo = {c: x for c, x in combo.items() if x}
            if combo:
                self.terms[key] = combo

    @classmethod
    def theta(cls, diagram, q, combo=None):
        q = as_point(diagram.pair, q)
        base = combo if combo is not None else {diagram.pair.zero_class(): 1}
        return cls(diagram, {q: dict(base)})

    def __eq__(self, other):
        return isinstance(other, ThetaExpansion) and self.terms == other.terms

    def __add__(self, other):
        out = {k: dict(v) for k, v in self.terms.items()}
        for k, combo in other.terms.items():
            dst = out.setdefault(k, {})
            for c, x in combo.items():
                dst[c] = dst.get(c, 0) + x
        return ThetaExpansion(self.diagram, out)

    def __repr__(self):
        return f"ThetaExpansion({self.terms})"


def theta_product(diagram, p1, p2, order=None):
    """The full expansion of theta_p1 * theta_p2."""
    pair = diagram.pair
    order = diagram.order if order is None else order
    p1 = as_point(pair, p1)
    p2 = as_point(pair, p2)
    origin = ChartPoint(0, 0, 0, pair.n)
    if p1 == origin or p2 == origin:
        return ThetaExpansion.theta(diagram, p2 if p1 == origin else p1)
    # the support lies among sums of one final-segment exponent per factor
    cand1 = _candidate_exponents(diagram, _plane_vec(pair, p1), order)
    cand2 = _candidate_exponents(diagram, _plane_vec(pair, p2), order)
    targets = set()
    for k1, d1 in cand1.items():
        for k2, d2 in cand2.items():
            if d1 + d2 <= order:
                targets.add((k1[0] + k2[0], k1[1] + k2[1]))
    out = {}
    for key in sorted(targets):
        r = as_point(pair, vec(*key))
        combo = structure_constant(diagram, p1, p2, r, order)
        if combo:
            out[r] = combo
    return ThetaExpansion(diagram, out)


def multiply(f, g, order=None):
    """Bilinear extension of theta_product to finite theta sums."""
    if f.diagram is not g.diagram:
        raise ValueError("order mismatch: expansions from different diagrams")
    diagram = f.diagram
    order = diagram.order if order is None else order
    out = ThetaExpansion(diagram)
    for r1, c1 in f.terms.items():
        for r2, c2 in g.terms.items():
            prod = theta_product(diagram, r1, r2, order)
            scaled = {}
            for key, combo in prod.terms.items():
                dst = scaled.setdefault(key, {})
                for (ca, xa) in c1.items():
                    for (cb, xb) in c2.items():
                        for (cc, xc) in combo.items():
                            cls = ca + cb + cc
                            dst[cls] = dst.get(cls, 0) + xa * xb * xc
            out = out + ThetaExpansion(diagram, scaled)
    return out


# --- central fiber products: straight lines on B ------------------------------


def _straight_lines(atlas, p, Q_cone, Q_vec, free_rays, max_crossings=None):
    """Straight lines on B ending at Q whose asymptotic direction is p,
    crossing only the allowed rays.  Returns the list of final backward
    direction vectors at Q."""
    from .affine_geometry import _Walker

    pair = atlas.pair
    n = atlas.n
    if max_crossings is None:
        max_crossings = 8 * n + 16
    results = []
    seen = set()
    for esc_cone, w_p in _point_reps(pair, p):
        for rotation in (1, -1):
            for t in range(max_crossings + 1):
                if t == 0 and rotation == -1:
                    continue
                if t == 0:
                    if esc_cone != Q_cone:
                        continue
                    crossed = []
                else:
                    if (Q_cone + rotation * t) % n != esc_cone:
                        continue
                    if rotation == 1:
                        crossed = [(Q_cone + s) % n for s in range(1, t + 1)]
                    else:
                        crossed = [(Q_cone - s) % n for s in range(t)]
                    if not all(j in free_rays for j in crossed):
                        continue
                # transport the asymptotic vector back to Q's chart
                v = w_p
                cone = esc_cone
                for _ in range(t):
                    if rotation == 1:
                        v = atlas.cross_cw(cone)(v)
                        cone = (cone - 1) % n
                    else:
                        v = atlas.cross_ccw(cone)(v)
                        cone = (cone + 1) % n
                if wedge(Q_vec, v) == 0:
                    raise _Degenerate
                # verify by walking backward from Q
                walker = _Walker(atlas, Q_cone, Q_vec, v)
                ok = True
                for expect in crossed:
                    step = walker.step()
                    if step[0] != "cross" or step[1] != expect:
                        ok = False
                        break
                if ok:
                    step = walker.step()
                    if (
                        step[0] != "escape"
                        or walker.cone != esc_cone
                        or primitive(step[1]) != primitive(w_p)
                    ):
                        ok = False
                if ok:
                    key = (esc_cone, w_p.key(), rotation if t else 0, t)
                    if key not in seen:
                        seen.add(key)
                        results.append(v)
    return results


def central_structure_constant(pair, p, q, r, free_rays=(), endpoint=None):
    """alpha(p, q, r) over the central fiber: the number of pairs of straight
    lines on B meeting at a generic point near r, where only the listed rays
    may be crossed (their kink classes are evaluated to 1, all other curve
    classes to 0)."""
    atlas = build_atlas(pair)
    free = {i % pair.n for i in free_rays}
    zero = ChartPoint(0, 0, 0, pair.n)
    if p == zero or q == zero:
        other = q if p == zero else p
        return 1 if r == other else 0
    for salt in range(10):
        if endpoint is not None and salt > 0:
            raise ValueError("endpoint gives a degenerate configuration")
        if endpoint is not None:
            Q_cone, Q_vec = endpoint
        else:
            eps = Fraction(3, 1009 + 2 * salt) / 2
            eps2 = Fraction(1, 1013 + 2 * salt) / 2
            Q_cone = r.cone
            Q_vec = vec(r.b + eps, r.c + eps2)
        try:
            lines_p = _straight_lines(atlas, p, Q_cone, Q_vec, free)
            lines_q = _straight_lines(atlas, q, Q_cone, Q_vec, free)
        except _Degenerate:
            continue
        r_vec = vec(r.b, r.c) if r.cone == Q_cone else None
        if r_vec is None:
            for cone, w in _point_reps(pair, r):
                if cone == Q_cone:
                    r_vec = w
            if r_vec is None:
                return 0
        return sum(1 for v1 in lines_p for v2 in lines_q if v1 + v2 == r_vec)
    raise RuntimeError("no generic endpoint found")


def central_multiply(pair, ps, free_rays=()):
    """Expand a product of central-fiber thetas, given as a list of B(Z)
    points; returns a dict mapping ChartPoints to integer coefficients."""
    zero = ChartPoint(0, 0, 0, pair.n)
    out = {ps[0]: 1} if ps else {zero: 1}
    for p in ps[1:]:
        nxt = {}
        for rpt, c in out.items():
            for r2, c2 in _central_theta_product(pair, rpt, p, free_rays).items():
                nxt[r2] = nxt.get(r2, 0) + c * c2
        out = {k: v for k, v in nxt.items() if v}
    return out


def _central_theta_product(pair, p, q, free_rays):
    n = pair.n
    gram = pair.boundary_gram()
    for j in free_rays:
        if sum(gram[j % n]) < 1:
            raise ValueError("free ray must pair positively with the boundary")
    # total weight b + c only drops when a free ray is crossed, so it bounds
    # the support of the product
    bound = int(p.b + p.c + q.b + q.c)
    out = {}
    for i in range(n):
        for b in range(bound + 1):
            for c in range(bound + 1 - b):
                if b == 0 and c == 0:
                    continue
                r = ChartPoint(i, b, c, n)
                if r.cone != i:
                    continue  # canonical representative only
                alpha = central_structure_constant(pair, p, q, r, free_rays)
                if alpha:
                    out[r] = alpha
    return out


# --- graded basis and boundary coordinates ------------------------------------


def graded_basis(polygon, max_degree):
    """Basis (q, m) of the compactified algebra: q in mF, 0 <= m <= max_degree,
    for a polygon with all ray crossings of the form 1/a_i."""
    from .polygon_engine import enumerate_polygon_points

    n = polygon.atlas.n
    for i in range(n):
        if polygon.ray_crossing(i).numerator != 1:
            raise ValueError("polygon is not scaled: ray crossings must be 1/a_i")
    out = [(ChartPoint(0, 0, 0, n), 0)]
    for m in range(1, max_degree + 1):
        for q in enumerate_polygon_points(polygon, num=m):
            out.append((q, m))
    return out


class BoundaryCoordinate:
    """The canonical coordinate on a boundary component: a class prefactor
    times the ratio theta_a / theta_b of consecutive edge thetas."""

    __slots__ = ("edge", "prefactor", "numerator", "denominator")

    def __init__(self, edge, prefactor, numerator, denominator):
        self.edge = edge
        self.prefactor = prefactor
        self.numerator = numerator
        self.denominator = denominator

    def __repr__(self):
        return (
            f"BoundaryCoordinate(edge={self.edge}, z^({self.prefactor})"
            f" * theta_{self.numerator} / theta_{self.denominator})"
        )


def boundary_coordinate(polygon, i, a, b):
    """The coordinate on the boundary component D_i from consecutive lattice
    points a after b on the edge of the polygon parallel to ray i."""
    from .affine_geometry import _Walker

    atlas = polygon.atlas
    pair = atlas.pair
    if a.cone != b.cone:
        raise ValueError("consecutive points must share a chart")
    av, bv = vec(a.b, a.c), vec(b.b, b.c)
    direction = av - bv
    if primitive(direction) != direction:
        raise ValueError("points are not consecutive lattice points")
    if not (a.is_integral() and b.is_integral()):
        raise ValueError("points must be integral")
    if wedge(bv, direction) <= 0:
        raise ValueError("a must succeed b along the oriented edge")
    piece = polygon.pieces[a.cone]
    on_edge = False
    for (line_idx, p, d) in piece.constraints:
        if line_idx == i and wedge(d, av - p) == 0 and wedge(d, bv - p) == 0:
            on_edge = True
    if not on_edge:
        raise ValueError("points do not lie on the requested edge")
    coords = [0] * pair.n
    walker = _Walker(atlas, a.cone, av, direction)
    for _ in range(8 * pair.n + 64):
        step = walker.step()
        if step[0] == "escape":
            break
        ray = step[1]
        d = walker.d
        if walker.side() > 0:
            # counterclockwise: the crossed ray is the x-axis of the new chart
            delta = abs(d.y)
        else:
            delta = abs(d.x)
        coords[ray] += delta
    else:
        raise RuntimeError("edge ray did not escape")
    prefactor = pair.zero_class()
    for j, dj in enumerate(coords):
        if dj:
            prefactor = prefactor + dj * pair.boundary_class(j)
    return BoundaryCoordinate(i, prefactor, a, b)
