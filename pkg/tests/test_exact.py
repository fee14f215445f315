from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from quasimean.exact import (ExactDecimal, ceil_at_scale, close, compare_le, exact_sum, floor_at_scale, ratio_sum,
                             render, tame, tmax, tmin, to_exact)

rationals = st.fractions(min_value=-10**6, max_value=10**6, max_denominator=10**6)


def test_decimal_text_is_read_exactly():
    assert to_exact("2.1") == Fraction(21, 10)
    assert to_exact(2.1) == Fraction(21, 10)
    assert to_exact("-0.05") == Fraction(-1, 20)
    assert to_exact("3/4") == Fraction(3, 4)
    assert to_exact(7) == 7


def test_bad_text_is_rejected():
    with pytest.raises(ValueError):
        to_exact("two")
    with pytest.raises(TypeError):
        to_exact(True)


@given(st.integers(-10**12, 10**12), st.integers(-12, 12))
def test_decimal_round_trip(mantissa, exponent):
    d = ExactDecimal.make(mantissa, exponent)
    assert ExactDecimal.parse(d.render()).to_fraction() == d.to_fraction()


def test_floor_and_ceil_at_scale():
    x = Fraction(21, 10)
    assert floor_at_scale(x, 0) == 2
    assert ceil_at_scale(x, 0) == 3
    assert floor_at_scale(x, 1) == 21
    assert floor_at_scale(Fraction(-21, 10), 0) == -3
    # negative m rounds to tens
    assert floor_at_scale(Fraction(57), -1) == 5
    assert ceil_at_scale(Fraction(57), -1) == 6


@given(rationals, st.integers(-3, 6))
def test_floor_brackets_value(x, m):
    k = floor_at_scale(x, m)
    unit = Fraction(10) ** -m
    assert k * unit <= x < (k + 1) * unit


def test_render_marks_inexact_values():
    assert render(Fraction(5, 2)) == "2.5"
    assert render(Fraction(1, 3)).startswith("≈0.333333333333333333")
    assert render(2.0).startswith("≈2")
    assert render(Fraction(-3)) == "-3"


def test_compare_is_exact_on_rationals():
    a = Fraction(1, 3)
    assert compare_le(a, a)
    assert not compare_le(a + Fraction(1, 10**30), a)
    # floats get a relative slack
    assert compare_le(1.0 + 1e-15, 1.0)
    assert close(0.1 + 0.2, 0.3)
    assert not close(Fraction(3, 10), Fraction(3, 10) + Fraction(1, 10**20))


def test_tame_drops_huge_denominators():
    small = Fraction(1, 3)
    assert tame(small) is small
    big = Fraction(1, 3**400)
    assert isinstance(tame(big), float)


@given(st.lists(rationals, min_size=1, max_size=8))
def test_fast_helpers_agree_with_builtins(xs):
    assert exact_sum(xs) == sum(xs, Fraction(0))
    assert ratio_sum([(x.numerator, x.denominator) for x in xs]) == sum(xs, Fraction(0))
    assert tmin(tuple(xs)) == min(xs)
    assert tmax(tuple(xs)) == max(xs)
