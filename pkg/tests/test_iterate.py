import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from quasimean import catalog as cat
from quasimean import iterate as it
from quasimean.exact import compare_le
from quasimean.errors import ArityError, ContractViolation, Diverged, DomainError

F = Fraction
positive = st.fractions(min_value=F(1, 10), max_value=100, max_denominator=100)


def d(x):
    return F(str(x))


def test_extend3_floor_mean_reaches_a_constant():
    tr = it.extend3(cat.make("floor-arith?m=0"), d(1.1), d(2.1), d(3.1))
    assert tr.verdict == it.CONSTANT_AFTER and tr.steps == 4 and tr.limit == 1
    assert tr.rows[1] == (F(3, 2), F(2), F(5, 2))
    assert tr.rows[-1] == tr.rows[-2] == (1, 1, 1)


def test_extend3_total_floor_mean_reaches_zero():
    K = cat.make("floor-arith?m=0&total=1")
    assert it.extend3(K, d(0.9), d(1.9), d(2.9)).limit == 0
    assert it.extend3(K, 1, 2, 3).limit == 1


def test_extend3_non_total_floor_mean_leaves_its_domain():
    with pytest.raises(DomainError):
        it.extend3(cat.make("floor-arith?m=0"), d(0.9), d(1.9), d(2.9))


def test_extend3_arith_and_agm():
    tr = it.extend3(cat.make("arith"), d(1.1), d(2.1), d(3.1))
    assert tr.verdict == it.CONVERGED and math.isclose(tr.limit, 2.1, rel_tol=1e-11)
    agm = it.compound(cat.make("geometric"), cat.make("arith"), 1, 2)
    assert agm.converged and math.isclose(agm.limit, 1.4567910310469068, rel_tol=1e-12)


def test_compound_examples():
    tr = it.compound(cat.make("floor-arith?m=0"), cat.make("floor-arith?m=1"), 1, 2)
    assert tr.converged and tr.limit == 1
    t = it.compound(cat.make("floor-arith?m=0&total=1"), cat.make("floor-arith?m=1&total=1"), d(0.9), d(1.9))
    assert t.limit == 0
    same = it.compound(cat.make("arith"), cat.make("arith"), 1, 3)
    assert same.verdict == it.CONSTANT_AFTER and same.limit == 2 and same.steps == 1


def test_compound_contracts():
    with pytest.raises(ContractViolation):
        it.compound(cat.make("arith"), cat.make("geometric"), 1, 2)
    with pytest.raises(ContractViolation):
        it.compound(cat.make("geometric"), cat.make("arith"), 3, 2)
    with pytest.raises(Diverged):
        it.compound(cat.make("min"), cat.make("bessel-plus"), 1, 2)


def test_closure_examples():
    K = cat.make("square-min")
    assert it.idempotent_closure(K, 1, 2).limit == 1
    assert float(it.idempotent_closure(K, d(0.999), 2).limit) < 1e-20
    A = it.idempotent_closure(cat.make("arith"), 1, 3)
    assert A.converged and math.isclose(A.limit, 3, rel_tol=1e-11)
    assert it.iterated(cat.make("arith"), 1, 1, 3) == F(5, 2)
    assert it.iterated(cat.make("arith"), 0, 1, 3) == 2


def test_divergence_needs_a_reachable_floor():
    K = cat.make("arith-minus-one")
    assert it.extend3(K, 1, 2, 3, floor=-100).verdict == it.DIVERGED
    assert it.extend3(K, 1, 2, 3, max_steps=50).verdict == it.EXHAUSTED


def test_bessel_onset():
    assert it.bessel_onset(range(1, 20)) == 3
    assert it.bessel_onset([1] + [2] * 10_000, assume_divergent=False) is None
    assert it.bessel_onset([1, 2]) is None
    with pytest.raises(ValueError):
        it.bessel_onset([1, -2, 3])


def test_compose():
    K = it.compose(cat.make("min"), [cat.make("min"), cat.make("floor-arith?m=0")])
    assert K((d(1.9), d(2.1))) == F(3, 2)
    assert it.compose(cat.make("arith"), [cat.make("min"), cat.make("max")])((1, 3)) == 2
    with pytest.raises(ContractViolation):
        it.compose(cat.make("floor-arith?m=0"), [cat.make("ceil-arith?m=0")] * 2)
    with pytest.raises(ArityError):
        it.compose(cat.make("arith"), [])


def test_exports():
    tr = it.extend3(cat.make("floor-arith?m=0"), d(1.1), d(2.1), d(3.1))
    lines = tr.to_csv().splitlines()
    assert lines[0] == "step,a,b,c" and lines[1] == "0,1.1,2.1,3.1" and lines[2] == "1,1.5,2,2.5"
    j = json.loads(json.dumps(tr.to_json()))
    assert j["verdict"] == "constant-after" and j["steps"] == 4 and j["limit"]["float"] == 1.0
    agm = it.compound(cat.make("geometric"), cat.make("arith"), 1, 2)
    assert all(float(c) for c in agm.to_csv().splitlines()[-1].split(",")[1:])


@settings(max_examples=100, deadline=None)
@given(positive, positive)
def test_compound_trace_is_ordered(x, y):
    a, b = sorted((x, y))
    tr = it.compound(cat.make("harmonic"), cat.make("arith"), a, b)
    assert tr.converged
    for (p, q), (_, q2) in zip(tr.rows, tr.rows[1:]):
        assert compare_le(p, q) and compare_le(q2, q)
    if a < b:
        assert tr.limit < b


@settings(max_examples=100, deadline=None)
@given(positive, positive, positive, st.integers(0, 2))
def test_extend3_keeps_order_and_reaches_constant(x, y, z, m):
    tr = it.extend3(cat.make(f"floor-arith?m={m}&total=1"), x, y, z)
    assert tr.verdict == it.CONSTANT_AFTER
    for r, s in zip(tr.rows, tr.rows[1:]):
        assert compare_le(r[0], r[1]) and compare_le(r[1], r[2]) and compare_le(s[2], r[2])


@settings(max_examples=60, deadline=None)
@given(positive, positive, positive, positive)
def test_extend3_is_monotone(x, y, z, bump):
    K = cat.make("geometric")
    lo = it.extend3(K, x, y, z).limit
    hi = it.extend3(K, x + bump, y, z).limit
    assert float(lo) <= float(hi) * (1 + 1e-9)


@settings(max_examples=60, deadline=None)
@given(positive, positive)
def test_closure_limit_is_a_fixed_point(x, y):
    K = cat.make("square-min")
    a, b = min(x, y, F(2)), min(max(x, y), F(2))
    tr = it.idempotent_closure(K, a, b)
    assert tr.converged
    assert math.isclose(float(K((tr.limit, b))), float(tr.limit), rel_tol=1e-9, abs_tol=1e-12)
