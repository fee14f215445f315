import math
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from quasimean import dual as D
from quasimean.classify import check_mean
from quasimean.core import DomainBox
from quasimean.errors import ArityError, DomainError, ParseError

F = Fraction

FORM_1 = ("root(3, root(2, (pow(2, a1) + pow(2, a2))/2) * root(2, (pow(2, a2) + pow(2, a3))/2)"
          " * root(2, (pow(2, a3) + pow(2, a1))/2))")
FORM_2 = "root(6, ((pow(2, a1) + pow(2, a2)) * (pow(2, a2) + pow(2, a3)) * (pow(2, a3) + pow(2, a1)))/8)"

small_rationals = st.sampled_from([F(1, 2), F(2), F(3), F(-1), F(1, 3), F(3, 2), F(-2)])


def exprs(positive_consts=False):
    consts = st.sampled_from([F(1, 2), F(2), F(3), F(5, 4)]) if positive_consts else small_rationals
    leaves = st.one_of(st.integers(1, 3).map(D.Var), consts.map(D.Const))

    def grow(children):
        return st.one_of(
            st.lists(children, min_size=2, max_size=3).map(lambda xs: D.Add(tuple(xs))),
            st.lists(children, min_size=2, max_size=3).map(lambda xs: D.Mul(tuple(xs))),
            st.tuples(children, st.integers(1, 4)).map(lambda p: D.DivN(*p)),
            st.tuples(children, st.integers(1, 4)).map(lambda p: D.RootN(*p)),
            st.tuples(children, st.sampled_from([F(2), F(1, 2), F(-1), F(3)])).map(lambda p: D.PowX(*p)),
            st.tuples(children, consts).map(lambda p: D.ScaleX(*p)),
        )

    return st.recursive(leaves, grow, max_leaves=8)


def with_all_vars(e):
    return D.Add((e, D.Var(1), D.Var(2), D.Var(3)))


def test_grammar():
    assert D.parse("(a1 + a2) / 2") == D.DivN(D.Add((D.Var(1), D.Var(2))), 2)
    assert D.parse("root(2, a1 * a2)") == D.RootN(D.Mul((D.Var(1), D.Var(2))), 2)
    assert D.parse("pow(1/2, a1)") == D.PowX(D.Var(1), F(1, 2))
    assert D.parse("scale(-3, a1)") == D.ScaleX(D.Var(1), F(-3))


@pytest.mark.parametrize("text", ["a1 +", "a1 / 0", "a1 / 1.5", "root(2.5, a1)", "a1 ^ 2", "sin(a1)", "(a1"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        D.parse(text)


def test_variables_must_be_contiguous():
    with pytest.raises(ArityError):
        D.parse("a1 + a3")


def test_evaluation():
    assert D.evaluate(D.parse("(a1 + a2)/2"), (F(2), F(4))) == 3
    assert D.evaluate(D.parse("root(2, a1 * a2)"), (F(4), F(9))) == 6
    assert D.evaluate(D.parse("root(3, a1)"), (F(-8),)) == -2
    v = D.evaluate(D.parse(FORM_2), (F(1), F(2), F(3)))
    assert math.isclose(v, (650 / 8) ** (1 / 6))
    with pytest.raises(DomainError):
        D.evaluate(D.parse("root(2, a1)"), (F(-4),))
    with pytest.raises(DomainError):
        D.evaluate(D.parse("pow(1/2, a1)"), (F(-4),))


def test_arithmetic_and_geometric_are_dual():
    assert D.dualize(D.parse("(a1 + a2)/2")) == D.parse("root(2, a1 * a2)")
    assert D.dualize(D.parse("root(2, a1 * a2)")) == D.parse("(a1 + a2)/2")


def test_dual_of_power_mean_simplifies_to_geometric():
    power = D.parse("pow(1/3, (pow(3, a1) + pow(3, a2) + pow(3, a3))/3)")
    assert D.simplify(D.dualize(power)) == D.parse("root(3, a1 * a2 * a3)")


def test_constant_folding():
    assert D.simplify(D.parse("1/2 + 1/2")) == D.Const(F(1))
    assert D.simplify(D.parse("root(2, 9/4)")) == D.Const(F(3, 2))


@settings(max_examples=1000, deadline=None)
@given(exprs())
def test_dualize_is_an_involution(e):
    assert D.dualize(D.dualize(e)) == e


@settings(max_examples=300, deadline=None)
@given(exprs())
def test_render_round_trip(e):
    e = with_all_vars(e)
    assert D.parse(D.render(e)) == e


@settings(max_examples=300, deadline=None)
@given(exprs())
def test_simplify_is_idempotent(e):
    s = D.simplify(e)
    assert D.simplify(s) == s


@settings(max_examples=1000, deadline=None)
@given(exprs(positive_consts=True),
       st.tuples(*[st.fractions(min_value=F(1, 10), max_value=10, max_denominator=20)] * 3))
def test_simplify_preserves_values(e, t):
    try:
        before = D.evaluate(e, t)
    except (DomainError, OverflowError, ZeroDivisionError):
        assume(False)
    after = D.evaluate(D.simplify(e), t)
    assert math.isclose(float(before), float(after), rel_tol=1e-10, abs_tol=1e-10)


def test_equivalent_forms_have_different_duals():
    one, two = D.parse(FORM_1), D.parse(FORM_2)
    t = (F(1), F(2), F(3))
    assert math.isclose(D.evaluate(one, t), D.evaluate(two, t), rel_tol=1e-10)
    box = DomainBox(F(1, 10), 10, arity=3)
    d1 = D.as_mean_function(D.dualize(one), box)
    d2 = D.as_mean_function(D.dualize(two), box)
    # sqrt(a1 a2) + sqrt(a2 a3) + sqrt(a3 a1) over 3
    assert math.isclose(d1((1, 4, 9)), (2 + 6 + 3) / 3)
    assert check_mean(d1, box, budget=500).holds
    assert check_mean(d2, box, budget=500).falsified


def test_json_export():
    j = D.to_json(D.parse("root(2, a1 * a2)"))
    assert j["node"] == "root" and j["params"] == {"n": 2} and j["children"][0]["node"] == "mul"


def test_formula_without_variables_is_not_a_mean():
    with pytest.raises(ArityError):
        D.as_mean_function(D.parse("3"))
