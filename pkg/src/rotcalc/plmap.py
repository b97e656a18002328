"""Lifts of piecewise-linear circle homeomorphisms.

A lift ``F`` of a PL homeomorphism of the circle ``R / lZ`` is stored on one
fundamental domain ``[0, l)`` as a list of pieces ``(x_i, v_i, s_i)``: on
``[x_i, x_{i+1}]`` it is ``v_i + s_i * (x - x_i)``. Everywhere else it is
determined by ``F(x + l) = F(x) + l``.

Normal form: ``x_0 = 0`` is always stored, adjacent pieces inside ``[0, l)``
have distinct slopes, and a map with a single slope is a single piece.
"""

from bisect import bisect_right
from typing import NamedTuple

from gmpy2 import mpq

from .arith import as_rat, floor_rat
from .errors import (
    Discontinuous,
    EffortExceeded,
    EmptyInput,
    MismatchedCircumference,
    NotMonotone,
)

MAX_PIECES = 10**6


class Piece(NamedTuple):
    x: mpq
    v: mpq
    slope: mpq


class FixedSet(NamedTuple):
    """A closed interval ``[lo, hi]``; ``lo == hi`` for an isolated point."""

    lo: mpq
    hi: mpq

    @property
    def length(self):
        return self.hi - self.lo


class PLLift:
    __slots__ = ("l", "xs", "vs", "ss", "_hash")

    def __init__(self, l, xs, vs, ss):
        # trusted constructor: callers guarantee normal form
        self.l = l
        self.xs = xs
        self.vs = vs
        self.ss = ss
        self._hash = None

    # -- construction -------------------------------------------------------

    @classmethod
    def from_pieces(cls, pieces, l=1):
        """Validate and normalize raw ``(x, v, slope)`` triples."""
        return normalize(pieces, l)

    @classmethod
    def identity(cls, l=1):
        return cls.translation(0, l)

    @classmethod
    def translation(cls, t, l=1):
        """The lift ``x -> x + t`` (absolute amount, not turns)."""
        l = as_rat(l)
        if l <= 0:
            raise ValueError("circumference must be positive")
        return cls(l, (mpq(0),), (as_rat(t),), (mpq(1),))

    @classmethod
    def from_knots(cls, knots, l=1):
        """Build a lift from its graph over one full period.

        ``knots`` is a list of ``(x, y)`` with strictly increasing ``x`` and
        ``y``, spanning exactly one period: the last knot must equal the first
        shifted by ``(l, l)``.
        """
        l = as_rat(l)
        pts = [(as_rat(x), as_rat(y)) for x, y in knots]
        if len(pts) < 2:
            raise EmptyInput("need at least two knots")
        (x0, y0), (xe, ye) = pts[0], pts[-1]
        if xe - x0 != l or ye - y0 != l:
            raise Discontinuous("knots must span exactly one period")
        raw = []
        for (xa, ya), (xb, yb) in zip(pts, pts[1:]):
            if xb <= xa or yb <= ya:
                raise NotMonotone(f"knots not strictly increasing near x={xa}")
            raw.append((xa, ya, (yb - ya) / (xb - xa)))
        # rotate the pieces into [0, l)
        shifted = []
        for x, y, s in raw:
            k = floor_rat(x / l)
            shifted.append((x - k * l, y - k * l, s))
        shifted.sort(key=lambda p: p[0])
        return normalize(shifted, l)

    # -- basic protocol -------------------------------------------------------

    @property
    def pieces(self):
        return [Piece(*p) for p in zip(self.xs, self.vs, self.ss)]

    def __len__(self):
        return len(self.xs)

    def __eq__(self, other):
        if not isinstance(other, PLLift):
            return NotImplemented
        return (self.l == other.l and self.xs == other.xs
                and self.vs == other.vs and self.ss == other.ss)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.l, self.xs, self.vs, self.ss))
        return self._hash

    def __repr__(self):
        body = ", ".join(f"({x}, {v}, {s})" for x, v, s in zip(self.xs, self.vs, self.ss))
        return f"PLLift(l={self.l}, pieces=[{body}])"

    def __call__(self, x):
        return evaluate(self, x)

    def __matmul__(self, other):
        return compose(self, other)

    def __invert__(self):
        return invert(self)

    def __pow__(self, n):
        return power(self, n)

    @property
    def end_value(self):
        """``F(l)``, i.e. ``F(0) + l``."""
        return self.vs[0] + self.l

    def slope_at(self, x):
        """Right derivative at ``x``."""
        x = as_rat(x)
        r = x - floor_rat(x / self.l) * self.l
        return self.ss[bisect_right(self.xs, r) - 1]

    def is_identity(self):
        return len(self.xs) == 1 and self.vs[0] == 0 and self.ss[0] == 1

    def offset(self):
        """Integer ``k`` with ``F(0) - k*l`` in ``[0, l)``."""
        return floor_rat(self.vs[0] / self.l)

    def circle_reduce(self):
        """Canonical circle representative and its translation offset."""
        k = self.offset()
        return shift(self, -k), k


def _merge(l, xs, vs, ss):
    """Drop breaks (other than 0) across which the slope does not change."""
    if len(xs) == 1:
        return PLLift(l, tuple(xs), tuple(vs), tuple(ss))
    nx, nv, ns = [xs[0]], [vs[0]], [ss[0]]
    for x, v, s in zip(xs[1:], vs[1:], ss[1:]):
        if s == ns[-1]:
            continue
        nx.append(x)
        nv.append(v)
        ns.append(s)
    if len(nx) > 1 and all(s == ns[0] for s in ns):
        nx, nv, ns = nx[:1], nv[:1], ns[:1]
    return PLLift(l, tuple(nx), tuple(nv), tuple(ns))


def normalize(pieces, l=1):
    """Canonical :class:`PLLift` from ``(x, v, slope)`` triples on ``[0, l)``.

    Raises :class:`EmptyInput`, :class:`NotMonotone` or :class:`Discontinuous`.
    """
    l = as_rat(l)
    if l <= 0:
        raise ValueError("circumference must be positive")
    raw = sorted(((as_rat(x), as_rat(v), as_rat(s)) for x, v, s in pieces), key=lambda p: p[0])
    if not raw:
        raise EmptyInput("no pieces")
    for x, _, s in raw:
        if s <= 0:
            raise NotMonotone(f"slope {s} at x={x} is not positive")
        if not 0 <= x < l:
            raise Discontinuous(f"break {x} outside [0, {l})")
    for (x, _, _), (y, _, _) in zip(raw, raw[1:]):
        if x == y:
            raise Discontinuous(f"duplicate break {x}")
    xs = [p[0] for p in raw]
    vs = [p[1] for p in raw]
    ss = [p[2] for p in raw]
    for i in range(len(xs) - 1):
        if vs[i] + ss[i] * (xs[i + 1] - xs[i]) != vs[i + 1]:
            raise Discontinuous(f"jump at x={xs[i + 1]}")
    end = vs[-1] + ss[-1] * (l - xs[-1])
    if xs[0] != 0:
        # anchor at 0 using the last piece continued past l
        v0 = end - l
        vfirst = v0 + ss[-1] * xs[0]
        if vfirst != vs[0]:
            raise Discontinuous("wrap condition violated")
        xs.insert(0, mpq(0))
        vs.insert(0, v0)
        ss.insert(0, ss[-1])
    elif end != vs[0] + l:
        raise Discontinuous(f"wrap condition violated: F(l) = {end}, F(0) + l = {vs[0] + l}")
    return _merge(l, xs, vs, ss)


def _check_l(F, G):
    if F.l != G.l:
        raise MismatchedCircumference(f"l = {F.l} vs l = {G.l}")


def evaluate(F, x):
    x = as_rat(x)
    l = F.l
    k = floor_rat(x / l)
    r = x - k * l
    i = bisect_right(F.xs, r) - 1
    return F.vs[i] + F.ss[i] * (r - F.xs[i]) + k * l


def _locate(F, y):
    """Reduce ``y`` to ``[0, l)``; return (piece index, reduced y, shift k)."""
    k = floor_rat(y / F.l)
    r = y - k * F.l
    return bisect_right(F.xs, r) - 1, r, k


def shift(F, t):
    """``F + t`` (post-composition with translation by ``t``)."""
    if not t:
        return F
    return PLLift(F.l, F.xs, tuple(v + t for v in F.vs), F.ss)


def compose(F, G):
    """``F o G``."""
    _check_l(F, G)
    l = F.l
    if G.is_identity():
        return F
    if F.is_identity():
        return G
    if len(F.xs) == 1:
        # F is a translation
        return shift(G, F.vs[0])
    g0 = G.vs[0]
    gx, gv, gs = G.xs, G.vs, G.ss
    breaks = set(gx)
    # F's breaks lifted into [G(0), G(0) + l), pulled back through G
    for xf in F.xs:
        y = xf - floor_rat((xf - g0) / l) * l
        i = bisect_right(gv, y) - 1
        breaks.add(gx[i] + (y - gv[i]) / gs[i])
    return _assemble(F, G, sorted(breaks))


def _assemble(F, G, breaks):
    if len(breaks) > MAX_PIECES:
        raise EffortExceeded(f"composition would have {len(breaks)} pieces")
    xs, vs, ss = [], [], []
    for b in breaks:
        j, gr, gk = _locate(G, b)
        gval = G.vs[j] + G.ss[j] * (gr - G.xs[j]) + gk * G.l
        i, fr, fk = _locate(F, gval)
        xs.append(b)
        vs.append(F.vs[i] + F.ss[i] * (fr - F.xs[i]) + fk * F.l)
        ss.append(F.ss[i] * G.ss[j])
    return _merge(F.l, xs, vs, ss)


def invert(F):
    l = F.l
    m = len(F.xs)
    ends = list(F.vs[1:]) + [F.vs[0] + l]
    raw = []
    for x, v, s, e in zip(F.xs, F.vs, F.ss, ends):
        # inverse piece maps [v, e] -> [x, x + (e - v)/s]
        k = floor_rat(v / l)
        raw.append((v - k * l, x - k * l, 1 / s))
        # a piece may straddle a multiple of l after reduction
        top = e - k * l
        if top > l:
            raw.append((mpq(0), x - k * l + (l - (v - k * l)) / s - l, 1 / s))
    if m == 1:
        return PLLift(l, (mpq(0),), (-F.vs[0],), (mpq(1),))
    raw.sort(key=lambda p: p[0])
    dedup = raw
    xs = [p[0] for p in dedup]
    vs = [p[1] for p in dedup]
    ss = [p[2] for p in dedup]
    return _merge(l, xs, vs, ss)


def power(F, n, cache=None):
    """``F**n`` by binary doubling; ``cache`` maps ``2**i`` to ``F**(2**i)``."""
    n = int(n)
    if n == 0:
        return PLLift.identity(F.l)
    base = F if n > 0 else invert(F)
    n = abs(n)
    if cache is None:
        cache = {}
    cache.setdefault(1, base)
    result = None
    e = 1
    while n:
        if e not in cache:
            half = cache[e // 2]
            cache[e] = compose(half, half)
        if n & 1:
            result = cache[e] if result is None else compose(result, cache[e])
        n >>= 1
        e <<= 1
    return result


def commutator(F, G):
    """``F^-1 o G^-1 o F o G``."""
    _check_l(F, G)
    return compose(invert(F), compose(invert(G), compose(F, G)))


def displacement_extrema(F):
    """Exact ``(min, max)`` of ``F(x) - x``; attained at break points."""
    d = [v - x for x, v in zip(F.xs, F.vs)]
    return min(d), max(d)


def fixed_points(F, p=0):
    """Solutions of ``F(x) = x + p*l`` in ``[0, l)`` as sorted :class:`FixedSet` items."""
    l = F.l
    target = p * l
    ends = list(F.xs[1:]) + [l]
    found = []
    for x, v, s, e in zip(F.xs, F.vs, F.ss, ends):
        d0 = v - x - target
        if s == 1:
            if d0 == 0:
                found.append(FixedSet(x, e))
            continue
        # d0 + (s - 1) t = 0
        t = -d0 / (s - 1)
        if 0 <= t <= e - x:
            r = x + t
            if r < l:
                found.append(FixedSet(r, r))
    merged = []
    for fs in found:
        if merged and fs.lo <= merged[-1].hi:
            last = merged[-1]
            merged[-1] = FixedSet(last.lo, max(last.hi, fs.hi))
        else:
            merged.append(fs)
    return merged


def equals(F, G):
    return F == G
