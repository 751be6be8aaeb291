import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_polynomial, random_rational_point
from singfol.exactpoly import (
    JetSeries,
    NonUnitError,
    ParseError,
    Polynomial,
    Space,
    SpaceMismatchError,
    parse_expression,
)

PHASE3 = Space(3, True)
BASE2 = Space(2)


def var(space, name):
    kind, k = name[0], int(name[1:])
    pos = space.x(k) if kind == "x" else space.p(k)
    return Polynomial.variable(space, pos)


# -- arithmetic -------------------------------------------------------------


def test_difference_of_squares():
    x1, p3 = var(PHASE3, "x1"), var(PHASE3, "p3")
    assert (x1 + p3) * (x1 - p3) == x1 ** 2 - p3 ** 2


def test_zero_is_absorbing():
    f = var(PHASE3, "x1") + 2 * var(PHASE3, "p2")
    assert (f * Polynomial.zero(PHASE3)).is_zero()


def test_binomial_cube():
    # oracle: binomial coefficients of (x1 + x2)^3
    x1, x2 = var(BASE2, "x1"), var(BASE2, "x2")
    cube = (x1 + x2) ** 3
    expected = {}
    for k in range(4):
        expected[(3 - k, k)] = Fraction(math.comb(3, k))
    assert cube == Polynomial(BASE2, expected)
    assert len(cube.terms) == 4


def test_space_mismatch_raises():
    with pytest.raises(SpaceMismatchError):
        var(BASE2, "x1") + var(Space(3), "x1")


# -- derivatives ------------------------------------------------------------


def test_partial_derivatives():
    s = Space(4, True)
    f = var(s, "x1") ** 2 * var(s, "p4")
    assert f.partial(s.x(1)) == 2 * var(s, "x1") * var(s, "p4")
    assert f.partial(s.p(4)) == var(s, "x1") ** 2
    assert var(s, "x1").partial(s.x(2)).is_zero()


def test_partial_out_of_range():
    with pytest.raises(IndexError):
        var(BASE2, "x1").partial(5)


# -- evaluation -------------------------------------------------------------


def test_evaluate_examples():
    s = PHASE3
    f = 2 * var(s, "x1") * var(s, "p3")
    assert f.evaluate([1, 0, 0, 0, 0, 5]) == 10
    assert Polynomial.constant(s, 1).evaluate([7, 1, 2, 3, 4, 5]) == 1
    g = var(BASE2, "x1") ** 2 + var(BASE2, "x2") ** 2
    assert g.evaluate([3, 4]) == 25
    assert g.evaluate([3.0, 4.0]) == pytest.approx(25.0)


def test_evaluate_length_mismatch():
    with pytest.raises(ValueError):
        var(BASE2, "x1").evaluate([1])


# -- fiber grading ----------------------------------------------------------


def test_p_homogeneous_degree():
    s = PHASE3
    assert (var(s, "p3") * var(s, "x1")).p_homogeneous_degree() == 1
    mixed = var(s, "p1") * var(s, "p2") + var(s, "x1") * var(s, "p3")
    assert mixed.p_homogeneous_degree() is None
    zero = Polynomial.zero(s)
    assert zero.p_homogeneous_degree() is None
    assert zero.is_zero()


# -- jets -------------------------------------------------------------------


def test_series_inversion_geometric():
    s = Space(1)
    u = JetSeries(Polynomial.constant(s, 1) + Polynomial.variable(s, 0), 3)
    x = Polynomial.variable(s, 0)
    # geometric series oracle: 1 - x + x^2 - x^3
    assert u.invert_unit().body == 1 - x + x ** 2 - x ** 3
    assert (u.invert_unit() * u).body == Polynomial.constant(s, 1)


def test_series_inversion_constant_and_nonunit():
    s = Space(2)
    two = JetSeries.constant(s, 2, 4)
    assert two.invert_unit().body == Polynomial.constant(s, Fraction(1, 2))
    with pytest.raises(NonUnitError):
        JetSeries(Polynomial.variable(s, 0), 4).invert_unit()


def test_jet_truncation_on_multiply():
    s = Space(1)
    x = Polynomial.variable(s, 0)
    a = JetSeries(1 + x, 2)
    b = JetSeries(1 + x + x ** 2, 2)
    assert (a * b).body == 1 + 2 * x + 2 * x ** 2  # x^3 dropped by the order cut


# -- parser -----------------------------------------------------------------


def test_parse_examples():
    s = Space(4, True)
    f = parse_expression("x1^2 - 3/2*p4", s)
    assert f == var(s, "x1") ** 2 - Fraction(3, 2) * var(s, "p4")
    assert parse_expression("0", s).is_zero()
    g = parse_expression("x1*(x2+x3)", s)
    assert g == var(s, "x1") * var(s, "x2") + var(s, "x1") * var(s, "x3")


def test_parse_unary_minus_and_rationals():
    s = Space(2)
    assert parse_expression("-3/2", s) == Polynomial.constant(s, Fraction(-3, 2))
    # unary minus binds to the atom, so -x1^2 means (-x1)^2
    assert parse_expression("-x1^2", s) == var(s, "x1") ** 2
    assert parse_expression("-(x1^2)", s) == -(var(s, "x1") ** 2)
    assert parse_expression("2 - - 1", s) == Polynomial.constant(s, 3)


def test_leading_negative_power_roundtrip():
    s = Space(2)
    f = -(var(s, "x1") ** 2) + var(s, "x2")
    assert parse_expression(str(f), s) == f


def test_parse_errors_carry_offsets():
    s = Space(2)
    with pytest.raises(ParseError) as err:
        parse_expression("x1 + ", s)
    assert err.value.offset == 5
    with pytest.raises(ParseError) as err:
        parse_expression("x7", s)
    assert err.value.offset == 0
    with pytest.raises(ParseError) as err:
        parse_expression("p1", s)  # no fiber in this space
    assert err.value.offset == 0
    with pytest.raises(ParseError):
        parse_expression("x1^99999", s)
    with pytest.raises(ParseError) as err:
        parse_expression("x1 x2", s)  # implicit multiplication rejected
    assert err.value.offset == 3


def test_parse_zero_denominator():
    with pytest.raises(ParseError):
        parse_expression("1/0", BASE2)


# -- randomized ring properties ----------------------------------------------

_spaces = st.sampled_from([Space(2), Space(2, True), Space(3, True)])


@st.composite
def poly_and_space(draw, count=1):
    space = draw(_spaces)
    seed = draw(st.integers(0, 10 ** 6))
    rng = random.Random(seed)
    polys = [random_polynomial(rng, space) for _ in range(count)]
    return space, polys


@settings(max_examples=60, deadline=None)
@given(poly_and_space(count=3))
def test_ring_axioms(data):
    _, (f, g, h) = data
    assert (f + g) + h == f + (g + h)
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h
    assert f * g == g * f


@settings(max_examples=60, deadline=None)
@given(poly_and_space(count=2), st.integers(0, 5))
def test_leibniz_rule(data, pos_seed):
    space, (f, g) = data
    pos = pos_seed % space.nvars
    product = (f * g).partial(pos)
    assert product == f * g.partial(pos) + g * f.partial(pos)


@settings(max_examples=60, deadline=None)
@given(poly_and_space(count=2), st.integers(0, 10 ** 6))
def test_evaluation_is_ring_homomorphism(data, seed):
    space, (f, g) = data
    point = random_rational_point(random.Random(seed), space.nvars)
    assert (f * g).eval_exact(point) == f.eval_exact(point) * g.eval_exact(point)
    assert (f + g).eval_exact(point) == f.eval_exact(point) + g.eval_exact(point)


@settings(max_examples=60, deadline=None)
@given(poly_and_space(count=1))
def test_print_parse_roundtrip(data):
    space, (f,) = data
    text = str(f)
    assert parse_expression(text, space) == f
    assert str(parse_expression(text, space)) == text


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 4))
def test_series_inverse_property(seed, order):
    rng = random.Random(seed)
    space = Space(2)
    body = random_polynomial(rng, space)
    if body.constant_term() == 0:
        body = body + 1
    u = JetSeries(body, order)
    assert (u.invert_unit() * u) == JetSeries.constant(space, 1, order)
