"""Exact scalars, the break ring ``A = Z[1/n_1, ..., 1/n_k]`` and the slope group
``P = <n_1, ..., n_k>``.

Rationals are :class:`gmpy2.mpq` values; they are canonical on construction,
so structural equality is value equality.
"""

import math
import re
from functools import reduce

from gmpy2 import mpq

from .errors import NonPositive, NotInRing, RationalFormatError

Rat = mpq

_RAT_RE = re.compile(r"^(-?)(\d+)(?:/(\d+))?$")


def parse_rat(text):
    """Parse ``"p/q"`` or ``"p"`` (optional leading ``-``) into a :data:`Rat`."""
    m = _RAT_RE.match(text.strip()) if isinstance(text, str) else None
    if m is None:
        raise RationalFormatError(f"not a rational: {text!r}")
    sign, num, den = m.groups()
    den = int(den) if den is not None else 1
    if den <= 0:
        raise RationalFormatError(f"denominator must be positive: {text!r}")
    value = mpq(int(num), den)
    return -value if sign else value


def format_rat(x):
    return str(mpq(x))


def as_rat(x):
    """Coerce ints, strings, Fractions and mpq values to :data:`Rat`.

    Floats are rejected; they have no place in exact paths.
    """
    if isinstance(x, str):
        return parse_rat(x)
    if isinstance(x, float):
        raise TypeError("floats are not exact; pass a string or Fraction")
    return mpq(x)


def floor_rat(x):
    return int(x.numerator // x.denominator)


def ceil_rat(x):
    return -int((-x.numerator) // x.denominator)


def primes_of(n):
    """Prime divisors of a small positive integer by trial division."""
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def factor_over(n, primes):
    """Split ``n > 0`` as ``prod(p**e) * cofactor`` over the given primes."""
    n = int(n)
    exps = []
    for p in primes:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        exps.append(e)
    return exps, n


def _hermite_rows(matrix, ncols):
    """Row-style Hermite normal form of an integer matrix (pivot rows only)."""
    rows = [list(r) for r in matrix if any(r)]
    basis = []
    for col in range(ncols):
        while True:
            live = [r for r in rows if r[col] != 0]
            if len(live) <= 1:
                break
            pivot = min(live, key=lambda r: abs(r[col]))
            for r in live:
                if r is pivot:
                    continue
                q = r[col] // pivot[col]
                for j in range(col, ncols):
                    r[j] -= q * pivot[j]
            rows = [r for r in rows if any(r)]
        live = [r for r in rows if r[col] != 0]
        if live:
            pivot = live[0]
            if pivot[col] < 0:
                pivot[:] = [-v for v in pivot]
            rows.remove(pivot)
            basis.append((col, tuple(pivot)))
    return tuple(basis)


class SlopeGroup:
    """Multiplicative group generated by integers ``n_i >= 2``.

    The generators need not be multiplicatively independent; lattice
    membership goes through a cached Hermite normal form.
    """

    __slots__ = ("generators", "prime_basis", "exponent_matrix", "d", "_hnf")

    def __init__(self, generators):
        gens = tuple(int(n) for n in generators)
        if not gens or any(n < 2 for n in gens):
            raise ValueError(f"generators must be integers >= 2, got {generators!r}")
        self.generators = gens
        self.prime_basis = tuple(sorted({p for n in gens for p in primes_of(n)}))
        self.exponent_matrix = tuple(tuple(factor_over(n, self.prime_basis)[0]) for n in gens)
        self.d = reduce(math.gcd, (n - 1 for n in gens))
        self._hnf = _hermite_rows(self.exponent_matrix, len(self.prime_basis))

    def __eq__(self, other):
        return isinstance(other, SlopeGroup) and self.generators == other.generators

    def __hash__(self):
        return hash(self.generators)

    def __repr__(self):
        return f"SlopeGroup({list(self.generators)})"

    def exponent_vector(self, s):
        """Prime exponents of ``s`` over the basis, or ``None`` if it does not factor."""
        s = mpq(s)
        num, rest_n = factor_over(s.numerator, self.prime_basis)
        den, rest_d = factor_over(s.denominator, self.prime_basis)
        if rest_n != 1 or rest_d != 1:
            return None
        return [a - b for a, b in zip(num, den)]

    def lattice_contains(self, vec):
        vec = list(vec)
        for col, row in self._hnf:
            if vec[col] % row[col]:
                return False
            q = vec[col] // row[col]
            if q:
                vec = [v - q * r for v, r in zip(vec, row)]
        return not any(vec)


class BreakRing:
    """The ring ``Z[1/n_1, ..., 1/n_k]``; shares generator data with a :class:`SlopeGroup`."""

    __slots__ = ("slopes",)

    def __init__(self, slopes):
        self.slopes = slopes if isinstance(slopes, SlopeGroup) else SlopeGroup(slopes)

    @property
    def prime_basis(self):
        return self.slopes.prime_basis

    def __eq__(self, other):
        return isinstance(other, BreakRing) and self.slopes == other.slopes

    def __hash__(self):
        return hash(("A", self.slopes.generators))

    def __repr__(self):
        inv = ", ".join(f"1/{n}" for n in self.slopes.generators)
        return f"BreakRing(Z[{inv}])"

    def __contains__(self, x):
        return in_break_ring(x, self)


def _basis(group):
    return group.prime_basis


def in_break_ring(x, ring):
    _, rest = factor_over(mpq(x).denominator, _basis(ring))
    return rest == 1


def in_slope_group(s, group):
    s = mpq(s)
    if s <= 0:
        raise NonPositive(f"slope {s} is not positive")
    vec = group.exponent_vector(s)
    return vec is not None and group.lattice_contains(vec)


def gcd_defect(group):
    """``gcd(n_1 - 1, ..., n_k - 1)``."""
    return group.d


def residue_mod_d(x, group):
    """Class of ``x`` in ``A / IP*A``, identified with ``Z/dZ``.

    Every ``n_i`` is 1 mod ``d``, so every denominator in ``A`` is a unit mod ``d``.
    """
    x = mpq(x)
    if not in_break_ring(x, group):
        raise NotInRing(f"{x} is not in Z[{', '.join(f'1/{n}' for n in group.generators)}]")
    d = group.d
    if d == 1:
        return 0
    return int(x.numerator) * pow(int(x.denominator), -1, d) % d


def bezout(values):
    """Integers ``c`` with ``sum(c_i * values_i) == gcd(values)``."""
    g, coeffs = 0, []
    for v in values:
        if g == 0:
            g, coeffs = abs(v), [1 if v >= 0 else -1]
            continue
        # extended Euclid on (g, v)
        old_r, r = g, v
        old_s, s = 1, 0
        old_t, t = 0, 1
        while r:
            q = old_r // r
            old_r, r = r, old_r - q * r
            old_s, s = s, old_s - q * s
            old_t, t = t, old_t - q * t
        if old_r < 0:
            old_r, old_s, old_t = -old_r, -old_s, -old_t
        coeffs = [c * old_s for c in coeffs] + [old_t]
        g = old_r
    return g, coeffs
