"""Floating-point diagnostics for maps conjugate to rigid rotations.

These are the only places that leave exact arithmetic: logarithms of slopes
and exponential conjugacies are transcendental. Precision is in bits and
handled by mpmath.
"""

import mpmath

from .arith import as_rat, floor_rat
from .errors import NotAConjugacy, PartitionMismatch
from .plmap import evaluate

DEFAULT_PRECISION = 128


def _mpf(x):
    x = as_rat(x)
    return mpmath.mpf(int(x.numerator)) / int(x.denominator)


def _as_mpf(value):
    if isinstance(value, str):
        return mpmath.mpf(value)
    try:
        return _mpf(value)
    except TypeError:
        return mpmath.mpf(value)


def balance_residual(f, measures, precision=DEFAULT_PRECISION):
    """``sum_j mu(I_j) * log(slope of f on I_j)``.

    ``measures`` is a list of ``((lo, hi), mass)``; the intervals must tile
    ``[0, l)`` in order and each must sit inside a single piece of ``f``.
    For the invariant measure of a map conjugate to a rotation the result is 0.
    """
    l = f.l
    with mpmath.workprec(precision):
        cursor = as_rat(0)
        total_mass = mpmath.mpf(0)
        acc = mpmath.mpf(0)
        ends = list(f.xs[1:]) + [l]
        for (lo, hi), mass in measures:
            lo, hi = as_rat(lo), as_rat(hi)
            if lo != cursor or hi <= lo:
                raise PartitionMismatch(f"interval [{lo}, {hi}] does not continue the tiling at {cursor}")
            cursor = hi
            i = max(j for j, x in enumerate(f.xs) if x <= lo)
            if hi > ends[i]:
                raise PartitionMismatch(f"interval [{lo}, {hi}] crosses the break at {ends[i]}")
            m = _as_mpf(mass)
            if m < 0:
                raise PartitionMismatch(f"negative mass on [{lo}, {hi}]")
            total_mass += m
            acc += m * mpmath.log(_mpf(f.ss[i]))
        if cursor != l:
            raise PartitionMismatch(f"intervals stop at {cursor}, not {l}")
        if abs(total_mass - 1) > mpmath.mpf(2) ** (-precision // 2):
            raise PartitionMismatch(f"masses sum to {mpmath.nstr(total_mass, 20)}, not 1")
        return +acc


def verify_exp_conjugacy(f, base, beta, gamma, rho, grid=1024, precision=DEFAULT_PRECISION):
    """Grid check that ``h(x) = beta - gamma * base**(-x)`` conjugates ``f`` to rotation by ``rho``.

    The conjugacy reads ``f o h = h o R_rho``, equivalently
    ``h^-1(f(x)) - h^-1(x) = rho`` modulo ``l``. Returns the largest
    ``|h^-1(f(x)) - h^-1(x) - rho|`` (reduced mod ``l``) over ``grid``
    equispaced points; ``f(x)`` is reduced into ``[0, l)`` and computed exactly.
    ``h`` must be increasing with ``h(0) = 0`` and ``h(l) = l``.
    """
    l = f.l
    with mpmath.workprec(precision):
        B, b, g, lm = mpmath.mpf(base), _as_mpf(beta), _as_mpf(gamma), _mpf(l)
        tol = mpmath.mpf(2) ** (-(precision - 8))
        if not (B > 1 and g > 0):
            raise NotAConjugacy("h is not increasing (need base > 1 and gamma > 0)")

        def h(x):
            return b - g * mpmath.power(B, -x)

        if abs(h(0)) > tol or abs(h(lm) - lm) > tol:
            raise NotAConjugacy(f"h(0) = {mpmath.nstr(h(0), 10)}, h(l) = {mpmath.nstr(h(lm), 10)}")

        def h_inv(y):
            return -mpmath.log((b - y) / g, B)

        r = _as_mpf(rho)
        worst = mpmath.mpf(0)
        for k in range(grid):
            x = l * k / grid
            y = evaluate(f, x)
            y -= floor_rat(y / l) * l
            diff = h_inv(_mpf(y)) - h_inv(_mpf(x)) - r
            diff -= lm * mpmath.nint(diff / lm)
            worst = max(worst, abs(diff))
        return +worst
