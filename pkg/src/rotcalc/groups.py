"""Generalized Thompson groups ``T(l, A, P)`` and ``F(l, A, P)``.

Membership validation, explicit Bieri-Strebel interpolation, the two-factor
decomposition into arc-fixing maps, C0 approximation of circle homeomorphisms
and seeded random elements.
"""

import math
import random
import re
from dataclasses import dataclass, field
from itertools import product

from gmpy2 import mpq

from .arith import (
    BreakRing,
    SlopeGroup,
    as_rat,
    bezout,
    floor_rat,
    format_rat,
    gcd_defect,
    in_break_ring,
    in_slope_group,
    parse_rat,
    residue_mod_d,
)
from .errors import (
    CongruenceViolation,
    ConstructionFailed,
    GroupFormatError,
    NotInRing,
    NotMonotone,
    PreconditionViolation,
    SamplesTooCoarse,
    WindowTooLarge,
)
from .plmap import PLLift, compose, evaluate, fixed_points, invert

# search bound on |exponent| per generator when picking the scaling slope
MAX_SCALE_EXPONENT = 64


@dataclass(frozen=True)
class GroupDescriptor:
    """``T(l, A, P)`` (kind ``"T"``, circle) or ``F(l, A, P)`` (kind ``"F"``, interval)."""

    kind: str
    l: mpq
    P: SlopeGroup

    def __post_init__(self):
        if self.kind not in ("T", "F"):
            raise GroupFormatError(f"kind must be T or F, got {self.kind!r}")
        object.__setattr__(self, "l", as_rat(self.l))
        if not isinstance(self.P, SlopeGroup):
            object.__setattr__(self, "P", SlopeGroup(self.P))
        if self.l <= 0 or not in_break_ring(self.l, self.P):
            raise GroupFormatError(f"l = {self.l} must be a positive element of A")

    @classmethod
    def T(cls, gens, l=1):
        return cls("T", l, SlopeGroup(gens))

    @classmethod
    def F(cls, gens, l=1):
        return cls("F", l, SlopeGroup(gens))

    @property
    def A(self):
        return BreakRing(self.P)

    @property
    def d(self):
        return gcd_defect(self.P)

    def __str__(self):
        gens = ",".join(str(n) for n in self.P.generators)
        return f"{self.kind}(l={format_rat(self.l)}; gens={gens})"


_GROUP_RE = re.compile(r"^\s*([TF])\s*\(\s*l\s*=\s*([^;]+?)\s*;\s*gens\s*=\s*([\d,\s]+?)\s*\)\s*$")


def parse_group(text):
    """Parse ``"T(l=1; gens=2,3)"`` style descriptors."""
    m = _GROUP_RE.match(text)
    if m is None:
        raise GroupFormatError(f"bad group descriptor: {text!r}")
    kind, l, gens = m.groups()
    try:
        gens = [int(g) for g in gens.split(",") if g.strip()]
        return GroupDescriptor(kind, parse_rat(l), SlopeGroup(gens))
    except ValueError as exc:
        raise GroupFormatError(str(exc)) from exc


class IntervalMap:
    """PL homeomorphism ``[a, c] -> [a', c']`` given by its knots ``(x, y)``.

    Knots are strictly increasing in both coordinates; collinear interior knots
    are dropped, so the interior knots are exactly the break points.
    """

    __slots__ = ("knots",)

    def __init__(self, knots):
        pts = [(as_rat(x), as_rat(y)) for x, y in knots]
        if len(pts) < 2:
            raise NotMonotone("need at least two knots")
        for (xa, ya), (xb, yb) in zip(pts, pts[1:]):
            if xb <= xa or yb <= ya:
                raise NotMonotone(f"knots not strictly increasing near x={xa}")
        out = [pts[0]]
        for i in range(1, len(pts) - 1):
            (x0, y0), (x1, y1), (x2, y2) = out[-1], pts[i], pts[i + 1]
            if (y1 - y0) * (x2 - x1) != (y2 - y1) * (x1 - x0):
                out.append(pts[i])
        out.append(pts[-1])
        self.knots = tuple(out)

    def __eq__(self, other):
        return isinstance(other, IntervalMap) and self.knots == other.knots

    def __hash__(self):
        return hash(self.knots)

    def __repr__(self):
        return "IntervalMap([" + ", ".join(f"({x}, {y})" for x, y in self.knots) + "])"

    @property
    def domain(self):
        return self.knots[0][0], self.knots[-1][0]

    @property
    def image(self):
        return self.knots[0][1], self.knots[-1][1]

    @property
    def breaks(self):
        return [x for x, _ in self.knots[1:-1]]

    @property
    def slopes(self):
        return [(yb - ya) / (xb - xa) for (xa, ya), (xb, yb) in zip(self.knots, self.knots[1:])]

    def __call__(self, x):
        x = as_rat(x)
        a, c = self.domain
        if not a <= x <= c:
            raise ValueError(f"{x} outside domain [{a}, {c}]")
        for (xa, ya), (xb, yb) in zip(self.knots, self.knots[1:]):
            if x <= xb:
                return ya + (yb - ya) * (x - xa) / (xb - xa)
        raise AssertionError("unreachable")


@dataclass
class MembershipReport:
    group: str
    checks: dict
    endpoint_derivatives: tuple = None
    notes: list = field(default_factory=list)

    @property
    def ok(self):
        return all(self.checks.values())

    def __bool__(self):
        return self.ok

    def lines(self):
        out = [f"group\t{self.group}"]
        out += [f"{name}\t{'pass' if v else 'FAIL'}" for name, v in self.checks.items()]
        if self.endpoint_derivatives is not None:
            left, right = self.endpoint_derivatives
            out.append(f"endpoint_derivatives\t{left}\t{right}")
        out += [f"note\t{n}" for n in self.notes]
        out.append(f"result\t{'pass' if self.ok else 'FAIL'}")
        return out


def validate_membership(f, group):
    """Check that ``f`` (a :class:`PLLift` or :class:`IntervalMap`) lies in ``group``."""
    P = group.P
    if isinstance(f, PLLift):
        breaks, values, slopes = list(f.xs), list(f.vs), list(f.ss)
    else:
        breaks = [x for x, _ in f.knots]
        values = [y for _, y in f.knots]
        slopes = f.slopes
    checks = {
        "breaks_in_A": all(in_break_ring(x, P) for x in breaks),
        "slopes_in_P": all(in_slope_group(s, P) for s in slopes),
        "values_in_A": all(in_break_ring(v, P) for v in values),
    }
    report = MembershipReport(str(group), checks)
    if group.kind == "T":
        checks["is_circle_lift"] = isinstance(f, PLLift)
        checks["circumference"] = isinstance(f, PLLift) and f.l == group.l
    else:
        is_interval = isinstance(f, IntervalMap)
        checks["is_interval_map"] = is_interval
        checks["endpoints_fixed"] = is_interval and f.domain == (0, group.l) and f.image == (0, group.l)
        if is_interval:
            s = f.slopes
            report.endpoint_derivatives = (s[0], s[-1])
    return report


def _require_ring(group, *values):
    for v in values:
        if not in_break_ring(v, group.P):
            raise NotInRing(f"{v} is not in {group.A!r}")


def _scale_candidates(P, ratio):
    """Elements of ``P`` ordered by exponent size, then closeness to ``ratio``."""
    gens = P.generators
    logs = [math.log(n) for n in gens]
    target = math.log(ratio)
    for bound in range(0, MAX_SCALE_EXPONENT + 1):
        shell = []
        for e in product(range(-bound, bound + 1), repeat=len(gens)):
            if max((abs(v) for v in e), default=0) != bound:
                continue
            shell.append((abs(sum(v * lg for v, lg in zip(e, logs)) - target), e))
        shell.sort()
        for _, e in shell:
            t = mpq(1)
            for n, v in zip(gens, e):
                t *= mpq(n) ** v
            yield t


def bieri_strebel(group, a, c, a2, c2):
    """PL map ``[a, c] -> [a2, c2]`` with breaks in ``A`` and slopes in ``P``.

    Exists iff ``c2 - a2 = c - a`` modulo ``IP*A = dA``. The map is built as a
    linear stretch by some ``t`` in ``P`` followed by a handful of pieces of
    slope ``n_i`` or ``1/n_i`` that absorb the remaining length difference
    ``sum_i (n_i - 1) alpha_i`` (Bezout coefficients on the ``n_i - 1``).
    """
    a, c, a2, c2 = (as_rat(v) for v in (a, c, a2, c2))
    if not (a < c and a2 < c2):
        raise PreconditionViolation("need a < c and a2 < c2")
    _require_ring(group, a, c, a2, c2)
    P = group.P
    L, L2 = c - a, c2 - a2
    if residue_mod_d(L, P) != residue_mod_d(L2, P):
        raise CongruenceViolation(
            f"lengths {L} and {L2} differ modulo {P.d}A "
            f"(residues {residue_mod_d(L, P)} vs {residue_mod_d(L2, P)})")
    if L == L2:
        return IntervalMap([(a, a2), (c, c2)])
    gens = P.generators
    d, coeffs = bezout([n - 1 for n in gens])
    for t in _scale_candidates(P, float(L2 / L)):
        tL = t * L
        delta = (L2 - tL) / d
        alphas = [k * delta for k in coeffs]
        used = sum(al if al > 0 else n * -al for n, al in zip(gens, alphas))
        if used <= tL:
            break
    else:
        raise ConstructionFailed(f"no scaling slope found for {L} -> {L2}")
    # stage two on [0, tL]; remainder at slope 1 first
    knots = [(mpq(0), mpq(0))]
    u = y = mpq(0)
    rest = tL - used
    if rest > 0:
        u, y = u + rest, y + rest
        knots.append((u, y))
    for n, al in zip(gens, alphas):
        if al > 0:
            u, y = u + al, y + n * al
        elif al < 0:
            u, y = u + n * -al, y - al
        else:
            continue
        knots.append((u, y))
    if u != tL or y != L2:
        raise ConstructionFailed("length bookkeeping mismatch")
    g = IntervalMap([(a + ku / t, a2 + ky) for ku, ky in knots])
    if g.domain != (a, c) or g.image != (a2, c2):
        raise ConstructionFailed("endpoints not hit exactly")
    if not all(in_break_ring(x, P) for x in g.breaks) or not all(in_slope_group(s, P) for s in g.slopes):
        raise ConstructionFailed("constructed map left the group")
    return g


def interpolate_circle(xs, ys, group):
    """Element of ``T(l, A, P)`` with ``g(xs[i]) = ys[i]``.

    ``xs`` strictly increasing inside one period ``[xs[0], xs[0] + l)``; ``ys``
    strictly increasing with ``ys[-1] < ys[0] + l``. All points in ``A``.
    """
    l = group.l
    xs = [as_rat(x) for x in xs] + [as_rat(xs[0]) + l]
    ys = [as_rat(y) for y in ys] + [as_rat(ys[0]) + l]
    knots = []
    for i in range(len(xs) - 1):
        if xs[i + 1] <= xs[i] or ys[i + 1] <= ys[i]:
            raise NotMonotone(f"interpolation data not increasing at index {i}")
        piece = bieri_strebel(group, xs[i], xs[i + 1], ys[i], ys[i + 1]).knots
        knots.extend(piece if not knots else piece[1:])
    return PLLift.from_knots(knots, l)


def _require_d1(group):
    if group.d != 1:
        raise PreconditionViolation(f"requires gcd(n_i - 1) = 1, got d = {group.d}")


def _ring_points(rng, group, count, complexity):
    """``count`` distinct sorted points of ``A`` in ``[0, l)``."""
    gens = group.P.generators
    l = group.l
    pts = set()
    while len(pts) < count:
        den = 1
        for _ in range(rng.randint(0, complexity)):
            den *= rng.choice(gens)
        pts.add(l * mpq(rng.randrange(den), den))
        if len(pts) < count and rng.random() < 0.05:
            # keep the loop finite when small denominators are exhausted
            complexity += 1
    return sorted(pts)


def random_element(group, complexity, seed):
    """Deterministic random element of ``group`` (a lift with ``F(0)`` in ``[0, l)``)."""
    _require_d1(group)
    if complexity < 1:
        raise PreconditionViolation("complexity must be >= 1")
    rng = random.Random(seed)
    if group.kind == "F":
        inner = complexity - 1
        xs = _ring_points(rng, group, inner + 1, complexity)[1:] if inner else []
        ys = _ring_points(rng, group, inner + 1, complexity)[1:] if inner else []
        pts = [mpq(0)] + xs + [group.l]
        ims = [mpq(0)] + ys + [group.l]
        knots = []
        for i in range(len(pts) - 1):
            piece = bieri_strebel(group, pts[i], pts[i + 1], ims[i], ims[i + 1]).knots
            knots.extend(piece if not knots else piece[1:])
        return IntervalMap(knots)
    xs = _ring_points(rng, group, complexity, complexity)
    ys = _ring_points(rng, group, complexity, complexity)
    r = rng.randrange(complexity)
    lifted = [ys[(j + r) % complexity] + (group.l if j + r >= complexity else 0) for j in range(complexity)]
    F = interpolate_circle(xs, lifted, group)
    return F.circle_reduce()[0]


@dataclass
class SteinFactorization:
    """``f = g1 o g2``; ``g2`` fixes ``fixed_arc_g2`` pointwise, ``g1`` fixes
    ``fixed_arc_g1`` modulo the central translation by ``g1_shift * l``."""

    g1: PLLift
    g2: PLLift
    fixed_arc_g1: tuple
    fixed_arc_g2: tuple
    g1_shift: int

    def __iter__(self):
        return iter((self.g1, self.g2))


def _gaps(w, s2, e2, l):
    """Open gaps of ``[0, l)`` not covered by arcs ``[0, w]`` and ``[s2, e2]`` (``e2`` may exceed ``l``)."""
    if e2 <= l:
        gaps = []
        if s2 > w:
            gaps.append((w, s2))
        lo = max(w, e2)
        if lo < l:
            gaps.append((lo, l))
        return gaps
    lo = max(w, e2 - l)
    return [(lo, s2)] if lo < s2 else []


def stein_decompose(f, group, window=None):
    """Split ``f`` as ``(f o g^-1) o g`` with both factors fixing an open arc.

    ``g`` agrees with ``f`` on a small arc ``[a, b]``, is the identity on an arc
    ``[c, d]`` missing both ``[a, b]`` and ``f([a, b])``, and is filled in by
    Bieri-Strebel interpolation on the two remaining gaps. ``window`` is an
    optional ``(a, b)``; without it ``[0, l/n_1^j]`` is shrunk until it fits.
    """
    _require_d1(group)
    l = f.l
    n1 = group.P.generators[0]
    if window is not None:
        a, b = (as_rat(v) for v in window)
        _require_ring(group, a, b)
        if not (0 <= a < b < a + l):
            raise PreconditionViolation("window must satisfy a < b < a + l")
        attempts = [(a, b - a)]
    else:
        attempts = ((mpq(0), l / mpq(n1) ** j) for j in range(1, 200))
    for a, w in attempts:
        a1, b1 = evaluate(f, a), evaluate(f, a + w)
        s2 = (a1 - a) - floor_rat((a1 - a) / l) * l
        e2 = s2 + (b1 - a1)
        gaps = _gaps(w, s2, e2, l)
        if gaps:
            break
        if window is not None:
            raise WindowTooLarge(f"arc [{a}, {a + w}] and its image cover the circle")
    else:
        raise ConstructionFailed("no disjoint arc found")
    u, v = max(gaps, key=lambda g: g[1] - g[0])
    margin = (v - u) / (n1 * n1)
    c_off, d_off = u + margin, v - margin
    b = a + w
    c, d = a + c_off, a + d_off
    a1p = a + s2 - l if s2 >= d_off else a + s2
    k = floor_rat((a1 - a1p) / l)
    b1p = a1p + (b1 - a1)
    knots = [(x, evaluate(f, x) - k * l) for x in _knots_between(f, a, b)]
    for piece in (bieri_strebel(group, b, c, b1p, c).knots,
                  ((c, c), (d, d)),
                  bieri_strebel(group, d, a + l, d, a1p + l).knots):
        knots.extend(piece[1:])
    g = PLLift.from_knots(knots, l)
    g1 = compose(f, invert(g))
    if compose(g1, g) != f:
        raise ConstructionFailed("factors do not recompose to f")
    fix2 = [s for s in fixed_points(g, 0) if s.hi > s.lo]
    fix1 = [s for s in fixed_points(g1, k) if s.hi > s.lo]
    if not fix1 or not fix2:
        raise ConstructionFailed("a factor fixes no open arc")
    s1 = a1p - floor_rat(a1p / l) * l
    s2 = c - floor_rat(c / l) * l
    return SteinFactorization(g1, g, (s1, s1 + (b1 - a1)), (s2, s2 + (d - c)), k)


def _knots_between(F, a, b):
    """``a``, the breaks of the lift ``F`` strictly inside ``(a, b)``, and ``b``."""
    l = F.l
    out = [a]
    k0 = floor_rat(a / l)
    k = k0
    while k * l < b:
        for x in F.xs:
            y = x + k * l
            if a < y < b:
                out.append(y)
        k += 1
    out.append(b)
    return sorted(set(out))


def _denominators(P, limit):
    """Products of generators up to ``limit``, ascending."""
    seen = {1}
    frontier = [1]
    while frontier:
        nxt = []
        for m in frontier:
            for n in P.generators:
                q = m * n
                if q <= limit and q not in seen:
                    seen.add(q)
                    nxt.append(q)
        frontier = nxt
    return sorted(seen)


def snap_to_ring(value, tol, group):
    """Smallest-denominator point of ``A`` strictly within ``tol`` of ``value``.

    Ties go to the smaller value.
    """
    value, tol = as_rat(value), as_rat(tol)
    if tol <= 0:
        raise PreconditionViolation("tolerance must be positive")
    n1 = min(group.P.generators)
    limit = 1
    while mpq(1, limit) >= tol:
        limit *= n1
    for den in _denominators(group.P, limit):
        lo = mpq(floor_rat(value * den), den)
        best = None
        for cand in (lo, lo + mpq(1, den)):
            dist = abs(cand - value)
            if dist < tol and (best is None or dist < best[0]):
                best = (dist, cand)
        if best is not None:
            return best[1]
    raise ConstructionFailed(f"no ring point within {tol} of {value}")


def _lift_increasing(ys, l):
    out = []
    for y in ys:
        y = y - floor_rat(y / l) * l
        if out:
            while y <= out[-1]:
                y += l
        out.append(y)
    return out


def approximate(samples, eps, group, uniform=False):
    """Group element through ``A``-snapped copies of monotone circle samples.

    Each sample ``(x, y)`` is moved to ring points within ``eps/3`` and the
    result interpolates the snapped points exactly, so it is within ``eps`` of
    every sample. With ``uniform=True`` the consecutive image gaps must also be
    below ``eps/3``, which makes the result ``eps``-close in sup norm to every
    homeomorphism through the samples.
    """
    _require_d1(group)
    eps = as_rat(eps)
    if eps <= 0:
        raise PreconditionViolation("eps must be positive")
    l = group.l
    tol = eps / 3
    pts = []
    for x, y in samples:
        x, y = as_rat(x), as_rat(y)
        pts.append((x - floor_rat(x / l) * l, y))
    pts.sort(key=lambda p: p[0])
    if not pts:
        raise PreconditionViolation("no samples")
    ys = _lift_increasing([y for _, y in pts], l)
    if ys[-1] >= ys[0] + l:
        raise NotMonotone("sample images are not cyclically monotone")
    if uniform:
        gaps = [b - a for a, b in zip(ys, ys[1:] + [ys[0] + l])]
        if max(gaps) >= tol:
            raise SamplesTooCoarse(f"largest image gap {max(gaps)} is not below eps/3 = {tol}")
    sx = [snap_to_ring(x, tol, group) for x, _ in pts]
    sy = _lift_increasing([snap_to_ring(y, tol, group) for y in ys], l)
    if any(b <= a for a, b in zip(sx, sx[1:])) or sx[-1] - sx[0] >= l:
        raise NotMonotone("snapped sample points collide; decrease eps")
    if sy[-1] >= sy[0] + l:
        raise NotMonotone("snapped sample images collide; decrease eps")
    g = interpolate_circle(sx, sy, group)
    if any(evaluate(g, x) != y for x, y in zip(sx, sy)):
        raise ConstructionFailed("interpolation missed a snapped point")
    return g.circle_reduce()[0]
