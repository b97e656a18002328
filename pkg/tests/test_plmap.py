import random

import pytest
from gmpy2 import mpq

from conftest import random_lift, random_rat
from rotcalc.errors import Discontinuous, EmptyInput, MismatchedCircumference, NotMonotone
from rotcalc.plmap import (
    PLLift,
    commutator,
    compose,
    displacement_extrema,
    evaluate,
    fixed_points,
    invert,
    normalize,
    power,
    shift,
)

q = mpq


def test_normalize_examples(f39):
    assert normalize([(0, 0, 1), (q(1, 2), q(1, 2), 1)], 1) == PLLift.identity()
    assert f39.pieces == [(0, q(2, 3), q(2, 3)), (q(1, 2), 1, q(4, 3))]
    assert normalize(f39.pieces, 1) == f39


@pytest.mark.parametrize("pieces, error", [
    ([(0, 0, 1), (q(1, 2), q(1, 2), 2)], Discontinuous),       # wrap: F(1) = 3/2
    ([(0, 0, 2), (q(1, 2), q(1, 2), 0)], NotMonotone),
    ([(0, 0, 2), (q(1, 2), q(3, 4), q(1, 2))], Discontinuous),
    ([], EmptyInput),
])
def test_normalize_rejects(pieces, error):
    with pytest.raises(error):
        normalize(pieces, 1)


def test_evaluate_examples(f39):
    assert evaluate(f39, 0) == q(2, 3)
    assert evaluate(f39, q(3, 4)) == q(4, 3)
    assert evaluate(f39, q(-1, 4)) == q(4, 3) - 1
    assert evaluate(PLLift.identity(), q(17, 5)) == q(17, 5)


def test_compose_example(f39):
    F2 = compose(f39, f39)
    # both pieces of F through 1/2 give slope 8/9, so the 1/2 break merges away
    assert evaluate(F2, 0) == q(11, 9)
    assert evaluate(F2, q(1, 2)) == q(5, 3)
    assert evaluate(F2, q(7, 8)) == 2
    assert F2.pieces == [(0, q(11, 9), q(8, 9)), (q(7, 8), 2, q(16, 9))]
    assert compose(f39, PLLift.identity()) == f39
    assert compose(f39, invert(f39)).is_identity()


def test_compose_matches_pointwise(f39, rng):
    F2 = compose(f39, f39)
    for _ in range(1000):
        x = random_rat(rng, -3, 3)
        assert evaluate(F2, x) == evaluate(f39, evaluate(f39, x))


def test_invert_examples(f39):
    assert invert(f39).pieces == [(0, q(-1, 2), q(3, 4)), (q(2, 3), 0, q(3, 2))]
    assert invert(PLLift.identity()).is_identity()
    assert invert(PLLift.translation(1)) == PLLift.translation(-1)


def test_power_examples(f39):
    assert power(f39, 0).is_identity()
    assert power(f39, 2) == compose(f39, f39)
    assert power(f39, -1) == invert(f39)
    assert power(f39, -3) == invert(power(f39, 3))
    assert f39 ** 5 == f39 @ f39 ** 4


def test_commutator_examples(f39):
    assert commutator(f39, f39).is_identity()
    assert commutator(f39, PLLift.identity()).is_identity()


def test_displacement_extrema(f39):
    assert displacement_extrema(PLLift.identity()) == (0, 0)
    assert displacement_extrema(f39) == (q(1, 2), q(2, 3))
    assert displacement_extrema(power(f39, 2)) == (q(9, 8), q(11, 9))


def test_fixed_points_examples(f39):
    assert fixed_points(PLLift.translation(q(1, 2)), 0) == []
    assert fixed_points(PLLift.identity(), 0) == [(0, 1)]
    assert fixed_points(f39, 0) == []
    assert fixed_points(PLLift.translation(q(1, 2)), 1) == []
    assert fixed_points(PLLift.translation(3), 3) == [(0, 1)]


def test_fixed_points_isolated():
    # slope 2 then 2/3: fixes 0 and nothing else in [0, 1)
    F = PLLift.from_knots([(0, 0), (q(1, 4), q(1, 2)), (1, 1)], 1)
    pts = fixed_points(F, 0)
    assert pts == [(0, 0)]
    assert pts[0].length == 0


def test_equals_examples(f39):
    split = [(0, q(2, 3), q(2, 3)), (q(1, 4), q(5, 6), q(2, 3)), (q(1, 2), 1, q(4, 3))]
    assert normalize(split, 1) == f39
    assert f39 != compose(f39, PLLift.translation(1))
    assert compose(invert(f39), f39) == PLLift.identity()


def test_mismatched_circumference(f39):
    with pytest.raises(MismatchedCircumference):
        compose(f39, PLLift.identity(2))


def test_other_circumference():
    l = q(3)
    F = PLLift.from_knots([(0, 1), (1, q(7, 2)), (3, 4)], l)
    assert evaluate(F, 3) == 4
    assert evaluate(F, q(1, 2)) == q(9, 4)
    G = compose(invert(F), F)
    assert G.is_identity() and G.l == l


def test_shift_and_circle_reduce(f39):
    G = shift(f39, 3)
    assert evaluate(G, 0) == q(11, 3)
    R, k = G.circle_reduce()
    assert R == f39 and k == 3


# -- group laws on random maps ---------------------------------------------


@pytest.fixture(scope="module")
def random_maps():
    rng = random.Random(7)
    return [random_lift(rng) for _ in range(1000)]


def test_associativity(random_maps):
    rng = random.Random(1)
    for _ in range(1000):
        F, G, H = rng.sample(random_maps, 3)
        assert compose(compose(F, G), H) == compose(F, compose(G, H))


def test_inverses(random_maps):
    for F in random_maps:
        Fi = invert(F)
        assert compose(F, Fi).is_identity()
        assert compose(Fi, F).is_identity()
        assert invert(Fi) == F


def test_power_additive(random_maps):
    rng = random.Random(2)
    for F in random_maps[:300]:
        a, b = rng.randint(-3, 3), rng.randint(-3, 3)
        assert power(F, a + b) == compose(power(F, a), power(F, b))


def test_equivariance_and_monotonicity(random_maps):
    rng = random.Random(3)
    for F in random_maps:
        x = random_rat(rng, -2, 2)
        y = x + random_rat(rng, 0, 1)
        assert evaluate(F, x + F.l) == evaluate(F, x) + F.l
        assert evaluate(F, x) < evaluate(F, y)


def test_piece_count_bound(random_maps):
    rng = random.Random(4)
    for _ in range(1000):
        F, G = rng.sample(random_maps, 2)
        assert len(compose(F, G)) <= len(F) + len(G)


def test_compose_pointwise_random(random_maps):
    rng = random.Random(5)
    for _ in range(500):
        F, G = rng.sample(random_maps, 2)
        H = compose(F, G)
        x = random_rat(rng, -1, 2)
        assert evaluate(H, x) == evaluate(F, evaluate(G, x))


def test_fixed_points_are_fixed(random_maps):
    for F in random_maps[:300]:
        for p in (-1, 0, 1, 2):
            for s in fixed_points(F, p):
                assert 0 <= s.lo <= s.hi <= F.l
                assert evaluate(F, s.lo) == s.lo + p * F.l
                assert evaluate(F, s.hi) == s.hi + p * F.l
