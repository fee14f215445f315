from fractions import Fraction

import pytest

from quasimean import catalog as cat
from quasimean import measures as M
from quasimean.core import DomainBox
from quasimean.errors import EmptyDomain


def two(ident, n=2):
    return cat.make(ident).restrict(n)


def test_floor_mean_distance_scales_with_precision():
    for m in (0, 1):
        est = M.mdist(two(f"floor-arith?m={m}"), DomainBox(0, 10, arity=2), budget=300)
        assert abs(float(est.lower_bound) - 10.0**-m) <= 0.02 * 10.0**-m
        assert est.witness is not None and not est.diverging


def test_relative_distance_of_floor_mean_diverges():
    est = M.mdistp(two("floor-arith?m=0"), DomainBox(0, 10, arity=2), budget=300)
    assert est.diverging


def test_means_have_zero_distance():
    est = M.mdist(two("geometric"), DomainBox(Fraction(1, 10), 10, arity=2), budget=200, refine=False)
    assert est.lower_bound == 0 and est.witness is None


def test_quasi_constants_match_known_values():
    star = M.a_quasi_constant(two("star-arith?m=0"), DomainBox(0, 10, arity=2), budget=300)
    assert 0.49 <= float(star.lower_bound) <= 0.5
    for n in (2, 3):
        b = M.m_quasi_constant(two("bessel", n), DomainBox(-10, 10, arity=n), budget=300)
        assert float(b.lower_bound) == pytest.approx(1 / (n - 1), rel=1e-6)


def test_a_quasi_but_not_m_quasi():
    K = two("max-plus-one")
    assert M.a_quasi_constant(K, DomainBox(-10, 10, arity=2), budget=200).lower_bound == 1
    m = M.m_quasi_constant(K, DomainBox(-10, 10, arity=2), budget=200, probes=[(0, Fraction(1, 10**9))])
    assert m.diverging


def test_estimates_are_reproducible_and_monotone_in_budget():
    K, box = two("floor-arith?m=1"), DomainBox(0, 3, arity=2)
    a = M.mdist(K, box, budget=100, seed=5, refine=False)
    b = M.mdist(K, box, budget=100, seed=5, refine=False)
    c = M.mdist(K, box, budget=200, seed=5, refine=False)
    assert a.to_json() == b.to_json()
    assert c.lower_bound >= a.lower_bound


def test_empty_domain_is_reported():
    with pytest.raises(EmptyDomain):
        M.mdist(two("geometric"), DomainBox(-2, -1, arity=2), budget=50)


def test_violation_share_of_floor_mean():
    assert M.mdista_exact_floor(1) == Fraction(19, 100)
    assert M.mdista_exact_floor(2) == Fraction(199, 10000)
    est = M.mdista(two("floor-arith?m=1"), DomainBox(1, 2, arity=2), samples=100_000, seed=1)
    assert abs(est.value - 0.19) <= 4 * est.half_width
    assert est.above == 0


def test_violation_share_extremes():
    box = DomainBox(1, 2, arity=2)
    assert M.mdista(two("arith"), box, samples=5000).value == 0
    assert M.mdista(two("bessel-plus"), box, samples=5000).value == 1
