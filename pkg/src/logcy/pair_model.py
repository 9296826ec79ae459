"""Boundary cycles with a toric model: Picard lattice, positivity, charge.

A pair is a rational surface Y with an anticanonical cycle of n rational
curves D = D_1 + ... + D_n.  When a toric model is present the surface is a
blowup of a smooth projective toric surface at l_i interior points of the
i-th toric boundary divisor, and the Picard lattice is computed exactly.
Pairs without a model carry a formal class lattice spanned by the boundary
components, enough for the mod-maximal-ideal computations downstream.
"""

from fractions import Fraction

from .lattice import Vec2, vec, wedge


class SearchBoundExhausted(Exception):
    """Positivity witness search ran out of budget while the rational
    relaxation is feasible."""


def _direction_key(v):
    # total order on directions: angle from the positive x-axis, ccw
    half = 0 if (v.y > 0 or (v.y == 0 and v.x > 0)) else 1
    return half


def _check_complete_unimodular(rays):
    m = len(rays)
    if m < 3:
        raise ValueError("a complete fan needs at least 3 rays")
    descents = 0
    for i in range(m):
        a, b = rays[i], rays[(i + 1) % m]
        if wedge(a, b) != 1:
            raise ValueError(
                f"consecutive rays {i},{(i + 1) % m} do not span a unimodular cone"
            )
        ha, hb = _direction_key(a), _direction_key(b)
        if ha > hb or (ha == hb and wedge(a, b) <= 0):
            descents += 1
    if descents != 1:
        raise ValueError("rays do not wrap the plane exactly once (incomplete fan)")


class ToricModel:
    """A smooth complete 2D fan plus non-toric blowup counts per ray."""

    def __init__(self, rays, blowups_per_ray):
        rays = [v if isinstance(v, Vec2) else vec(v) for v in rays]
        for v in rays:
            if not v.is_integral():
                raise ValueError("fan rays must be integral")
        _check_complete_unimodular(rays)
        if len(blowups_per_ray) != len(rays):
            raise ValueError("blowups_per_ray length must match rays")
        if any(l < 0 for l in blowups_per_ray):
            raise ValueError("blowup counts must be non-negative")
        self.rays = rays
        self.blowups_per_ray = list(blowups_per_ray)

    @property
    def n(self):
        return len(self.rays)

    def toric_self_int(self, i):
        """Self-intersection of the i-th toric boundary divisor."""
        m = self.n
        u = self.rays[(i - 1) % m] + self.rays[(i + 1) % m]
        v = self.rays[i]
        c = u.x / v.x if v.x != 0 else u.y / v.y
        if u != c * v or c.denominator != 1:
            raise ValueError("fan is not smooth at ray %d" % i)
        return -int(c)

    def toric_self_ints(self):
        return [self.toric_self_int(i) for i in range(self.n)]


def boundary_gram(self_ints):
    """Intersection matrix of the boundary components."""
    n = len(self_ints)
    g = [[0] * n for _ in range(n)]
    for i in range(n):
        g[i][i] = self_ints[i]
    if n == 1:
        pass
    elif n == 2:
        g[0][1] = g[1][0] = 2
    else:
        for i in range(n):
            j = (i + 1) % n
            g[i][j] += 1
            g[j][i] += 1
    return g


def total_boundary_square(self_ints):
    """D^2 for the full boundary cycle."""
    g = boundary_gram(self_ints)
    return sum(sum(row) for row in g)


class ClassLattice:
    """Formal class lattice spanned by the boundary components."""

    kind = "boundary"

    def __init__(self, pair):
        self.pair = pair
        self.labels = [f"D{i + 1}" for i in range(pair.n)]
        self.rank = pair.n
        self._gram = boundary_gram(pair.self_ints)

    def reduce(self, coords):
        return tuple(coords)

    def gram(self):
        return self._gram

    def boundary_class(self, i):
        coords = [0] * self.rank
        coords[i] = 1
        return DivisorClass(self, coords)

    def zero(self):
        return DivisorClass(self, [0] * self.rank)


def _hnf_rows(rows):
    """Row Hermite normal form of an integer matrix (list of lists)."""
    rows = [list(r) for r in rows]
    m = len(rows)
    ncols = len(rows[0]) if m else 0
    pivot_row = 0
    pivots = []
    for col in range(ncols):
        best = None
        for r in range(pivot_row, m):
            if rows[r][col] != 0:
                if best is None or abs(rows[r][col]) < abs(rows[best][col]):
                    best = r
        if best is None:
            continue
        rows[pivot_row], rows[best] = rows[best], rows[pivot_row]
        # clear below
        changed = True
        while changed:
            changed = False
            for r in range(pivot_row + 1, m):
                if rows[r][col] != 0:
                    q = rows[r][col] // rows[pivot_row][col]
                    rows[r] = [a - q * b for a, b in zip(rows[r], rows[pivot_row])]
                    if rows[r][col] != 0:
                        rows[pivot_row], rows[r] = rows[r], rows[pivot_row]
                    changed = True
        if rows[pivot_row][col] < 0:
            rows[pivot_row] = [-a for a in rows[pivot_row]]
        # clear above, reduce into [0, pivot)
        for r in range(pivot_row):
            q = rows[r][col] // rows[pivot_row][col]
            if q:
                rows[r] = [a - q * b for a, b in zip(rows[r], rows[pivot_row])]
        pivots.append(col)
        pivot_row += 1
        if pivot_row == m:
            break
    return rows[:pivot_row], pivots


class PicardLattice:
    """Pic(Y) for a pair with toric model: pullbacks of the toric boundary
    divisors plus the exceptional classes, modulo the two relations of linear
    equivalence coming from the fan coordinates."""

    kind = "picard"

    def __init__(self, pair):
        model = pair.toric_model
        self.pair = pair
        n = model.n
        self.n_toric = n
        self.labels = [f"F{i + 1}" for i in range(n)]
        self.exc_index = {}
        for i in range(n):
            for j in range(model.blowups_per_ray[i]):
                self.exc_index[(i, j)] = len(self.labels)
                self.labels.append(f"E{i + 1}{j + 1}")
        self.rank = len(self.labels)
        rel_x = [int(model.rays[i].x) for i in range(n)] + [0] * (self.rank - n)
        rel_y = [int(model.rays[i].y) for i in range(n)] + [0] * (self.rank - n)
        self.rel_rows, self.rel_pivots = _hnf_rows([rel_x, rel_y])
        bar = boundary_gram(model.toric_self_ints())
        g = [[0] * self.rank for _ in range(self.rank)]
        for i in range(n):
            for j in range(n):
                g[i][j] = bar[i][j]
        for k in range(n, self.rank):
            g[k][k] = -1
        self._gram = g

    def reduce(self, coords):
        coords = list(coords)
        for row, p in zip(self.rel_rows, self.rel_pivots):
            q = coords[p] // row[p]
            if q:
                coords = [a - q * b for a, b in zip(coords, row)]
        return tuple(coords)

    def gram(self):
        return self._gram

    def zero(self):
        return DivisorClass(self, [0] * self.rank)

    def pullback_class(self, i):
        coords = [0] * self.rank
        coords[i] = 1
        return DivisorClass(self, coords)

    def exceptional_class(self, i, j):
        coords = [0] * self.rank
        coords[self.exc_index[(i, j)]] = 1
        return DivisorClass(self, coords)

    def boundary_class(self, i):
        coords = [0] * self.rank
        coords[i] = 1
        for j in range(self.pair.toric_model.blowups_per_ray[i]):
            coords[self.exc_index[(i, j)]] = -1
        return DivisorClass(self, coords)


class DivisorClass:
    """An integer class vector in its lattice's canonical normal form."""

    __slots__ = ("lattice", "coords")

    def __init__(self, lattice, coords):
        self.lattice = lattice
        self.coords = lattice.reduce(coords)

    def _check(self, other):
        if self.lattice is not other.lattice:
            raise ValueError("classes live on different pairs")

    def __add__(self, other):
        self._check(other)
        return DivisorClass(self.lattice, [a + b for a, b in zip(self.coords, other.coords)])

    def __sub__(self, other):
        self._check(other)
        return DivisorClass(self.lattice, [a - b for a, b in zip(self.coords, other.coords)])

    def __neg__(self):
        return DivisorClass(self.lattice, [-a for a in self.coords])

    def __mul__(self, k):
        return DivisorClass(self.lattice, [a * k for a in self.coords])

    __rmul__ = __mul__

    def __eq__(self, other):
        return (
            isinstance(other, DivisorClass)
            and self.lattice is other.lattice
            and self.coords == other.coords
        )

    def __hash__(self):
        return hash((id(self.lattice), self.coords))

    def is_zero(self):
        return all(a == 0 for a in self.coords)

    def __repr__(self):
        terms = []
        for c, lbl in zip(self.coords, self.lattice.labels):
            if c == 0:
                continue
            if c == 1:
                terms.append(f"+{lbl}")
            elif c == -1:
                terms.append(f"-{lbl}")
            else:
                terms.append(f"{c:+d}*{lbl}")
        return "".join(terms) if terms else "0"


def intersection_number(a, b):
    """Intersection pairing of two divisor classes on the same pair."""
    a._check(b)
    g = a.lattice.gram()
    return sum(
        a.coords[i] * g[i][j] * b.coords[j]
        for i in range(len(a.coords))
        for j in range(len(b.coords))
        if a.coords[i] and g[i][j]
    )


class WeightVector:
    """Integer vector indexed by the boundary components."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        self.entries = tuple(entries)

    def __add__(self, other):
        return WeightVector(a + b for a, b in zip(self.entries, other.entries))

    def __sub__(self, other):
        return WeightVector(a - b for a, b in zip(self.entries, other.entries))

    def __mul__(self, k):
        return WeightVector(a * k for a in self.entries)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, WeightVector) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return f"WeightVector{self.entries}"


class LooijengaPair:
    """An anticanonical cycle with optional toric model."""

    def __init__(self, self_ints, toric_model=None, name=None):
        self.self_ints = [int(d) for d in self_ints]
        self.n = len(self.self_ints)
        if self.n < 1:
            raise ValueError("need at least one boundary component")
        self.toric_model = toric_model
        self.name = name
        if toric_model is not None:
            if toric_model.n != self.n:
                raise ValueError("toric model ray count does not match boundary")
            bar = toric_model.toric_self_ints()
            for i in range(self.n):
                if self.self_ints[i] != bar[i] - toric_model.blowups_per_ray[i]:
                    raise ValueError(
                        f"self-intersection of component {i + 1} is "
                        f"{self.self_ints[i]}, expected "
                        f"{bar[i]} - {toric_model.blowups_per_ray[i]}"
                    )
            if sum(toric_model.blowups_per_ray) != charge_of(self.self_ints):
                raise ValueError("blowup count does not match the charge")
            self.classes = PicardLattice(self)
        else:
            self.classes = ClassLattice(self)

    def boundary_class(self, i):
        return self.classes.boundary_class(i % self.n)

    def exceptional_class(self, i, j):
        if self.toric_model is None:
            raise ValueError("pair has no toric model, no exceptional classes")
        return self.classes.exceptional_class(i % self.n, j)

    def zero_class(self):
        return self.classes.zero()

    def boundary_gram(self):
        return boundary_gram(self.self_ints)

    def __repr__(self):
        tag = self.name or ",".join(str(d) for d in self.self_ints)
        return f"LooijengaPair({tag})"


def charge_of(self_ints):
    return 12 - total_boundary_square(self_ints) - len(self_ints)


def charge(pair):
    """12 - D^2 - n; counts the non-toric blowups of any toric model."""
    return charge_of(pair.self_ints)


def build_pair(self_ints, toric_model=None, name=None):
    """Construct a pair, validating the toric model and charge bookkeeping.

    When `self_ints` is None and a model is given, the self-intersections are
    derived from the model."""
    if self_ints is None:
        if toric_model is None:
            raise ValueError("need self-intersections or a toric model")
        bar = toric_model.toric_self_ints()
        self_ints = [b - l for b, l in zip(bar, toric_model.blowups_per_ray)]
    return LooijengaPair(self_ints, toric_model, name)


def weight(pair, x):
    """The weight of a point of B(Z) or of a divisor class.

    Points b*v_i + c*v_{i+1} map to b*e_i + c*e_{i+1}; classes map to their
    intersection profile with the boundary components."""
    if isinstance(x, DivisorClass):
        return WeightVector(
            intersection_number(x, pair.boundary_class(i)) for i in range(pair.n)
        )
    cone, b, c = x.cone, x.b, x.c
    w = [0] * pair.n
    w[cone % pair.n] += b
    w[(cone + 1) % pair.n] += c
    return WeightVector(w)


# --- positivity -------------------------------------------------------------


def _fm_feasible(rows):
    """Feasibility of the strict homogeneous system {x : row . x > 0 for all rows}
    by Fourier-Motzkin elimination."""
    rows = [tuple(Fraction(c) for c in r) for r in rows]
    nvar = len(rows[0]) if rows else 0
    for k in range(nvar):
        pos, neg, rest = [], [], []
        for r in rows:
            if r[k] > 0:
                pos.append(r)
            elif r[k] < 0:
                neg.append(r)
            else:
                rest.append(r)
        new = list(rest)
        for p in pos:
            for q in neg:
                comb = tuple(p[j] * (-q[k]) + q[j] * p[k] for j in range(nvar))
                if all(c == 0 for c in comb):
                    return False
                new.append(comb)
        rows = []
        seen = set()
        for r in new:
            if all(c == 0 for c in r):
                return False
            if r not in seen:
                seen.add(r)
                rows.append(r)
    return True


def _positivity_rows(self_ints):
    g = boundary_gram(self_ints)
    n = len(self_ints)
    rows = [list(col) for col in zip(*g)]  # (G a)_j > 0, G symmetric anyway
    for i in range(n):
        e = [0] * n
        e[i] = 1
        rows.append(e)
    return rows


def is_positive(pair_or_self_ints, max_bound=1280, node_budget=2_000_000):
    """A witness a_1..a_n of positivity (lex-minimal), or None.

    Returns the lexicographically least tuple of positive integers with
    (sum a_i D_i) . D_j > 0 for every j, or None when the exact rational
    relaxation is infeasible.  Raises SearchBoundExhausted when the rational
    system is feasible but no integer witness is found within budget."""
    if isinstance(pair_or_self_ints, LooijengaPair):
        self_ints = pair_or_self_ints.self_ints
    else:
        self_ints = list(pair_or_self_ints)
    n = len(self_ints)
    g = boundary_gram(self_ints)
    if not _fm_feasible(_positivity_rows(self_ints)):
        return None

    def check(a):
        return all(sum(g[j][i] * a[i] for i in range(n)) > 0 for j in range(n))

    nodes = 0
    bound = 20
    while bound <= max_bound:
        def dfs(prefix):
            nonlocal nodes
            k = len(prefix)
            if k == n:
                return tuple(prefix) if check(prefix) else None
            lo = 1
            if k >= 2 and n >= 3:
                # chain constraint (sum a_i D_i) . D_{k-1} > 0 pins a lower bound
                need = 1 - sum(g[k - 1][i] * prefix[i] for i in range(k))
                lo = max(lo, need)
            for a in range(lo, bound + 1):
                nodes += 1
                if nodes > node_budget:
                    raise SearchBoundExhausted(
                        f"no witness within bound {bound} and node budget"
                    )
                res = dfs(prefix + [a])
                if res is not None:
                    return res
            return None

        res = dfs([])
        if res is not None:
            return res
        bound *= 2
    raise SearchBoundExhausted(f"rational system feasible, no witness up to {max_bound}")


# --- toric blowups and blowdowns of the boundary cycle ----------------------


def toric_blowup(pair, i):
    """Blow up the node between components i and i+1 (indices mod n).

    The new (-1)-component is inserted at position i+1.  For n = 1 the node is
    the self-node of the unique component."""
    d = list(pair.self_ints)
    n = pair.n
    if n == 1:
        new = [d[0] - 4, -1]
    else:
        j = (i + 1) % n
        d[i % n] -= 1
        d[j] -= 1
        new = d[: i % n + 1] + [-1] + d[i % n + 1 :] if j != 0 else d + [-1]
    model = None
    if pair.toric_model is not None and n >= 3:
        rays = list(pair.toric_model.rays)
        l = list(pair.toric_model.blowups_per_ray)
        j = (i + 1) % n
        newray = rays[i % n] + rays[j]
        if j != 0:
            rays.insert(j, newray)
            l.insert(j, 0)
        else:
            rays.append(newray)
            l.append(0)
        model = ToricModel(rays, l)
    out = build_pair(new, model)
    assert charge(out) == charge(pair)
    return out


def toric_blowdown(pair, i):
    """Contract the (-1) boundary component i."""
    n = pair.n
    i %= n
    if n < 2:
        raise ValueError("cannot blow down the last boundary component")
    if pair.self_ints[i] != -1:
        raise ValueError("component is not a (-1)-curve")
    d = list(pair.self_ints)
    if n == 2:
        new = [d[1 - i] + 4]
    else:
        prev, nxt = (i - 1) % n, (i + 1) % n
        d[prev] += 1
        d[nxt] += 1
        new = [d[k] for k in range(n) if k != i]
    model = None
    if (
        pair.toric_model is not None
        and n >= 4
        and pair.toric_model.blowups_per_ray[i] == 0
    ):
        rays = [r for k, r in enumerate(pair.toric_model.rays) if k != i]
        l = [x for k, x in enumerate(pair.toric_model.blowups_per_ray) if k != i]
        model = ToricModel(rays, l)
    out = build_pair(new, model)
    assert charge(out) == charge(pair)
    return out


def has_parallel_divisor(self_ints):
    """Whether a divisor with an edge parallel to every ray exists."""
    n = len(self_ints)
    if n == 1:
        return self_ints[0] >= 2
    return any(d >= 0 for d in self_ints)


def blowdown_to_canonical(pair):
    """Blow down (-1) boundary components until a parallel configuration
    exists or the degree-1 del Pezzo pair (n=1, D^2=1) is reached."""
    if is_positive(pair) is None:
        raise ValueError("pair is not positive")
    cur = pair
    steps = []
    while True:
        if has_parallel_divisor(cur.self_ints):
            return cur, "parallel-configuration", steps
        if cur.n == 1:
            if cur.self_ints[0] == 1:
                return cur, "dP1", steps
            raise ValueError("n=1 pair with D^2 < 1 is not positive")
        try:
            i = cur.self_ints.index(-1)
        except ValueError:
            raise ValueError(
                "positive pair without (-1) component must have some D_i^2 >= 0"
            )
        cur = toric_blowdown(cur, i)
        steps.append(i)
