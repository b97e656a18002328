import random

import pytest
from gmpy2 import mpq

from rotcalc.groups import GroupDescriptor
from rotcalc.lang import example39
from rotcalc.plmap import PLLift

DENOMS = (1, 2, 3, 4, 5, 6, 8, 9, 12)


def random_rat(rng, lo, hi):
    """Uniform-ish rational strictly inside ``(lo, hi)`` with a small denominator."""
    while True:
        den = rng.choice(DENOMS) * rng.choice((1, 2, 3))
        k = rng.randint(0, den)
        x = lo + (hi - lo) * mpq(k, den)
        if lo < x < hi:
            return x


def random_lift(rng, l=1, max_breaks=4, max_offset=2):
    """Random PL lift with small rational data; not necessarily a group member."""
    l = mpq(l)
    m = rng.randint(1, max_breaks)
    xs = sorted({mpq(0)} | {random_rat(rng, 0, l) for _ in range(m - 1)})
    start = random_rat(rng, -max_offset * l, max_offset * l)
    ys = sorted({start} | {random_rat(rng, start, start + l) for _ in range(len(xs) - 1)})
    while len(ys) < len(xs):
        ys = sorted(set(ys) | {random_rat(rng, start, start + l)})
    knots = list(zip(xs, ys[:len(xs)])) + [(l, start + l)]
    return PLLift.from_knots(knots, l)


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture(scope="session")
def f39():
    return example39()


@pytest.fixture(scope="session")
def T23():
    return GroupDescriptor.T([2, 3])


# lines recorded by test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
