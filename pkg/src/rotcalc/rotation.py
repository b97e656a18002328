"""Certified rotation numbers of PL lifts, scl, and defect experiments.

Rotation numbers are measured in turns: ``rot(F) = lim F^n(0) / (n l)``, so
the unit translation ``x -> x + l`` has rotation number 1 for every ``l``.

Everything here is exact. The basic certificate is the displacement of an
iterate: if ``F^q(x) - x - p l`` is negative everywhere then ``rot < p/q``,
if positive everywhere then ``rot > p/q``, and if it changes sign there is
a periodic point and ``rot = p/q``.
"""

import enum
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from gmpy2 import mpq

from .arith import as_rat, ceil_rat, floor_rat, format_rat, gcd_defect
from .errors import EffortExceeded, NotAMember, PreconditionViolation, UnsupportedGroup
from .plmap import (
    PLLift,
    commutator,
    displacement_extrema,
    evaluate,
    fixed_points,
    power,
    shift,
)

DEFAULT_MAX_ITERATES = 2**20


def max_iterates():
    """Iteration cap; ``ROTCALC_MAX_EFFORT`` overrides the default."""
    env = os.environ.get("ROTCALC_MAX_EFFORT")
    return int(env) if env else DEFAULT_MAX_ITERATES


class Order(enum.IntEnum):
    """Position of ``rot(F)`` relative to a target."""

    LESS = -1
    EQUAL = 0
    GREATER = 1


@dataclass(frozen=True)
class PeriodicOrbit:
    """``F^q(x) = x + p l``: a witness that ``rot(F) = p/q``."""

    x: mpq
    p: int
    q: int


@dataclass(frozen=True)
class ExactRational:
    value: mpq
    certificate: PeriodicOrbit = None

    def __str__(self):
        return f"{format_rat(self.value)} (exact)"


@dataclass(frozen=True)
class Enclosure:
    lo: mpq
    hi: mpq
    effort: int

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def midpoint(self):
        return (self.lo + self.hi) / 2

    def __contains__(self, x):
        return self.lo <= x <= self.hi

    def __str__(self):
        return f"[{format_rat(self.lo)}, {format_rat(self.hi)}] (n={self.effort})"


@dataclass(frozen=True)
class DecimalValue:
    text: str
    guaranteed_digits: int
    lo: mpq = None
    hi: mpq = None

    def __str__(self):
        return f"{self.text} (certified {self.guaranteed_digits} digits)"


@dataclass
class CFExpansion:
    terms: list
    convergents: list
    exact: bool

    def __str__(self):
        if len(self.terms) == 1:
            body = str(self.terms[0])
        else:
            body = f"{self.terms[0]}; " + ", ".join(str(a) for a in self.terms[1:])
        return f"[{body}]"


class _Oracle:
    """Comparison oracle for one lift, sharing cached powers ``F^(2^i)``.

    Every query also narrows the certified bracket ``[lo, hi]`` using the
    displacement enclosure of the iterate it had to build anyway.
    """

    def __init__(self, F, limit=None):
        self.F = F
        self.l = F.l
        self.cache = {}
        self.limit = max_iterates() if limit is None else limit
        self.lo = None
        self.hi = None
        self.exact = None

    def _narrow(self, lo, hi):
        if self.lo is None or lo > self.lo:
            self.lo = lo
        if self.hi is None or hi < self.hi:
            self.hi = hi

    def iterate(self, n):
        if n > self.limit:
            raise EffortExceeded(f"needs {n} iterates, cap is {self.limit}")
        return power(self.F, n, self.cache)

    def enclosure(self, n):
        mn, mx = displacement_extrema(self.iterate(n))
        lo, hi = mn / (n * self.l), mx / (n * self.l)
        self._narrow(lo, hi)
        return Enclosure(lo, hi, n)

    def compare(self, p, q):
        G = self.iterate(q)
        mn, mx = displacement_extrema(G)
        self._narrow(mn / (q * self.l), mx / (q * self.l))
        target = p * self.l
        if mx < target:
            self._narrow(self.lo, mpq(p, q))
            return Order.LESS
        if mn > target:
            self._narrow(mpq(p, q), self.hi)
            return Order.GREATER
        x = fixed_points(G, p)[0].lo
        self.exact = ExactRational(mpq(p, q), PeriodicOrbit(x, p, q))
        self.lo = self.hi = mpq(p, q)
        return Order.EQUAL


def _cf_walk(oracle, q_limit=None):
    """Generate continued-fraction terms of ``rot`` from comparisons alone.

    Yields ``("term", a)`` for every certified term and ``("cmp", None)``
    after every comparison. Terms are found by galloping then bisecting over
    the intermediate fractions ``(p' + t p) / (q' + t q)``. Returns when the
    rotation number is found to be rational, or when every remaining
    candidate would have denominator above ``q_limit``.
    """
    lo_turns = oracle.enclosure(1).lo
    k = floor_rat(lo_turns)
    while True:
        c = oracle.compare(k + 1, 1)
        yield "cmp", None
        if c == Order.EQUAL:
            yield "term", k + 1
            return
        if c == Order.LESS:
            break
        k += 1
    c = oracle.compare(k, 1)
    yield "cmp", None
    yield "term", k
    if c == Order.EQUAL:
        return
    p_prev, q_prev, p, q = 1, 0, k, 1
    side_prev = 1

    def side(t):
        c = oracle.compare(p_prev + t * p, q_prev + t * q)
        return 0 if c == Order.EQUAL else (1 if c == Order.LESS else -1)

    while True:
        t_cap = None if q_limit is None else (q_limit - q_prev) // q
        if t_cap is not None and t_cap < 1:
            return
        s = side(1)
        yield "cmp", None
        if s == 0:
            yield "term", 1
            return
        if s != side_prev:
            raise AssertionError("continued fraction walk lost its bracket")
        lo_t, hi_t = 1, None
        while hi_t is None:
            t = 2 * lo_t
            if t_cap is not None:
                if lo_t >= t_cap:
                    return
                t = min(t, t_cap)
            s = side(t)
            yield "cmp", None
            if s == 0:
                yield "term", t
                return
            if s == side_prev:
                lo_t = t
            else:
                hi_t = t
        while hi_t - lo_t > 1:
            mid = (lo_t + hi_t) // 2
            s = side(mid)
            yield "cmp", None
            if s == 0:
                yield "term", mid
                return
            if s == side_prev:
                lo_t = mid
            else:
                hi_t = mid
        a = lo_t
        yield "term", a
        p_prev, q_prev, p, q = p, q, p_prev + a * p, q_prev + a * q
        side_prev = -side_prev


def rot_enclosure(F, n):
    """``[min, max]`` of ``(F^n(x) - x) / (n l)``; contains ``rot(F)``."""
    if n < 1:
        raise PreconditionViolation("n must be >= 1")
    return _Oracle(F).enclosure(int(n))


def rot_compare(F, target):
    """Compare ``rot(F)`` with the rational ``target``; exact."""
    target = as_rat(target)
    return _Oracle(F).compare(int(target.numerator), int(target.denominator))


def periodic_certificate(F, target):
    """A periodic point proving ``rot(F) = target``, or ``None``."""
    target = as_rat(target)
    p, q = int(target.numerator), int(target.denominator)
    pts = fixed_points(power(F, q), p)
    return PeriodicOrbit(pts[0].lo, p, q) if pts else None


def rot_rational(F, q_max):
    """``rot(F)`` as an exact rational if its denominator is at most ``q_max``.

    Returns an :class:`ExactRational` carrying a periodic orbit, or ``None``.
    """
    if q_max < 1:
        raise PreconditionViolation("q_max must be >= 1")
    oracle = _Oracle(F, limit=max(q_max, 1))
    for _ in _cf_walk(oracle, q_limit=q_max):
        pass
    return oracle.exact


def _convergents(terms):
    out = []
    h1, k1, h0, k0 = 1, 0, 0, 1
    for a in terms:
        h1, h0 = a * h1 + h0, h1
        k1, k0 = a * k1 + k0, k1
        out.append(mpq(h1, k1))
    return out


def rot_cf(F, depth):
    """First ``depth`` continued-fraction terms of ``rot(F)``, each certified."""
    if depth < 1:
        raise PreconditionViolation("depth must be >= 1")
    oracle = _Oracle(F)
    terms = []
    for kind, a in _cf_walk(oracle):
        if kind == "term":
            terms.append(a)
            if len(terms) == depth:
                break
    exact = oracle.exact is not None
    return CFExpansion(terms, _convergents(terms), exact)


def _round(x, digits):
    """Round half up at ``digits`` decimals; returns the scaled integer."""
    return floor_rat(x * 10**digits + mpq(1, 2))


def _render(k, digits):
    sign = "-" if k < 0 else ""
    k = abs(k)
    whole, frac = divmod(k, 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


def _certified_decimal(oracle, digits, scale=1):
    """Narrow the oracle's bracket until ``scale * rot`` rounds unambiguously."""
    scale = mpq(scale)
    tol = mpq(1, 10 ** (digits + 1))

    def settled():
        if oracle.lo is None:
            return False
        lo, hi = sorted((oracle.lo * scale, oracle.hi * scale))
        return hi - lo < tol and _round(lo, digits) == _round(hi, digits)

    n = 1
    while n <= 1024 and not settled():
        oracle.enclosure(n)
        n *= 2
    if not settled():
        for _ in _cf_walk(oracle):
            if settled() or oracle.exact is not None:
                break
    if not settled():
        raise EffortExceeded(f"could not certify {digits} digits")
    lo, hi = sorted((oracle.lo * scale, oracle.hi * scale))
    return DecimalValue(_render(_round(lo, digits), digits), digits, lo, hi)


def rot_decimal(F, digits):
    """``rot(F)`` rounded to ``digits`` places, with a certified bracket."""
    if digits < 1:
        raise PreconditionViolation("digits must be >= 1")
    return _certified_decimal(_Oracle(F), digits)


def scl(F, group, digits=None, q_max=64, n=1024):
    """Stable commutator length ``rot(F) / 2`` of a lift of an element of ``T(l, A, P)``.

    With ``digits`` the result is a :class:`DecimalValue`; otherwise an
    :class:`ExactRational` when the rotation number has denominator at most
    ``q_max``, else the halved :class:`Enclosure` at effort ``n``.
    """
    from .groups import validate_membership

    if gcd_defect(group.P) != 1:
        raise UnsupportedGroup(f"scl = rot/2 needs gcd(n_i - 1) = 1; {group} has d = {group.d}")
    report = validate_membership(F, group)
    if not report.ok:
        failed = [k for k, v in report.checks.items() if not v]
        raise NotAMember(f"not in {group}: {', '.join(failed)}")
    if digits is not None:
        return _certified_decimal(_Oracle(F), digits, scale=mpq(1, 2))
    exact = rot_rational(F, q_max)
    if exact is not None:
        return ExactRational(exact.value / 2, exact.certificate)
    enc = rot_enclosure(F, n)
    return Enclosure(enc.lo / 2, enc.hi / 2, n)


# -- defect experiments -------------------------------------------------------


@dataclass
class DefectTrial:
    index: int
    enclosure: Enclosure
    passed: bool


@dataclass
class DefectReport:
    n: int
    trials: list = field(default_factory=list)

    @property
    def bound(self):
        return 1 + mpq(2, self.n)

    @property
    def max_abs_midpoint(self):
        return max((abs(t.enclosure.midpoint) for t in self.trials), default=mpq(0))

    @property
    def violations(self):
        return [t for t in self.trials if not t.passed]

    @property
    def passed(self):
        return not self.violations

    def lines(self, digits=12):
        """Tab-separated rows; endpoints rounded outward so each row stays certified."""
        scale = 10**digits
        out = [f"{t.index}\t{_render(floor_rat(t.enclosure.lo * scale), digits)}\t"
               f"{_render(ceil_rat(t.enclosure.hi * scale), digits)}\t"
               f"{'pass' if t.passed else 'FAIL'}" for t in self.trials]
        out.append(f"summary\ttrials={len(self.trials)}\tviolations={len(self.violations)}\t"
                   f"max|mid|~{_render(_round(self.max_abs_midpoint, 6), 6)}\t"
                   f"bound={format_rat(self.bound)}\t{'pass' if self.passed else 'FAIL'}")
        return out


def _trial_pair(group, seed, index, complexity):
    from .groups import random_element

    rng = random.Random(f"{seed}:{index}")
    pair = []
    for _ in range(2):
        F = random_element(group, complexity, rng.getrandbits(64))
        pair.append(shift(F, rng.choice((-1, 0, 1)) * group.l))
    return pair


def _run_trial(args):
    index, f, g, n = args
    enc = rot_enclosure(commutator(f, g), n)
    bound = 1 + mpq(2, n)
    return DefectTrial(index, enc, -bound <= enc.lo and enc.hi <= bound)


def defect_scan(group, trials, seed, n, complexity=3, pairs=None, workers=None):
    """Enclose ``rot([f, g])`` for random pairs and check it stays within ``[-1 - 2/n, 1 + 2/n]``.

    Pairs are random group elements with random central offsets in
    ``{-1, 0, 1}``; trial ``i`` depends only on ``(seed, i)``. ``pairs``
    replaces the random pairs with explicit ones.
    """
    if trials < 1 and pairs is None:
        raise PreconditionViolation("trials must be >= 1")
    if pairs is None:
        pairs = [_trial_pair(group, seed, i, complexity) for i in range(trials)]
    jobs = [(i, f, g, n) for i, (f, g) in enumerate(pairs)]
    report = DefectReport(n)
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            report.trials = list(pool.map(_run_trial, jobs, chunksize=4))
    else:
        report.trials = [_run_trial(job) for job in jobs]
    return report


def defect_witness_pair(group):
    """Lifts ``f, g`` in the group with ``rot([f, g]) = 1`` exactly.

    Arranged so that ``0 < g(0) <= f(0) < l`` and ``f(g(0)) > g(f(0)) + l``,
    which forces ``[f, g]`` to have a point moved by exactly ``l``.
    """
    from .groups import interpolate_circle

    if gcd_defect(group.P) != 1:
        raise PreconditionViolation(f"requires gcd(n_i - 1) = 1, got d = {group.d}")
    l = group.l
    # dyadic points lie in A whenever d = 1 (some generator is even)
    f = interpolate_circle([0, l / 4], [l / 2, l * mpq(23, 16)], group)
    g = interpolate_circle([0, l / 2], [l / 4, l * mpq(3, 8)], group)
    f0, g0 = evaluate(f, 0), evaluate(g, 0)
    if not (0 < g0 <= f0 < l and evaluate(f, g0) > evaluate(g, f0) + l):
        raise AssertionError("witness inequalities failed")
    cert = rot_rational(commutator(f, g), 1)
    if cert is None or cert.value != 1:
        raise AssertionError("witness commutator does not have rotation number 1")
    return f, g
