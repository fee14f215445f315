from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from quasimean import catalog as cat
from quasimean.errors import CatalogError, DomainError

F = Fraction
positive = st.fractions(min_value=Fraction(1, 1000), max_value=1000, max_denominator=1000)


def ev(ident, *xs):
    return cat.make(ident)(tuple(F(str(x)) for x in xs))


@pytest.mark.parametrize("ident, args, expected", [
    ("bessel-plus", (1, 2), F(3)),
    ("bessel-minus", (-1, -2), F(-3)),
    ("floor-arith?m=0", (2.1, 3), F(5, 2)),
    ("ceil-arith?m=0", (2.1, 3), F(3)),
    ("shifted-ceil?m=0", (2.1, 3), F(2)),
    ("shifted-floor?m=0", (2.1, 3), F(7, 2)),
    ("arith", (2.1, 3), F(51, 20)),
    ("star-arith?m=0", (2, 2.1), F(9, 4)),
    ("star-arith?m=0", (1.9, 2), F(7, 4)),
    ("range-penalized-a", (2, 4), F(3, 2)),
    ("range-penalized-a", (10, 11), F(7)),
    ("quasi-monotone-example", (0.2, 1), F(2, 25)),
    ("parallel-resistance", (3, 3), F(3, 2)),
])
def test_exact_values(ident, args, expected):
    v = ev(ident, *args)
    assert isinstance(v, Fraction) and v == expected


def test_ids_and_parameters():
    assert cat.make("power?x=2").id == "power?x=2"
    assert cat.make("floor-arith").id == "floor-arith?m=0"
    with pytest.raises(CatalogError):
        cat.make("no-such-mean")
    with pytest.raises(CatalogError):
        cat.make("power")
    with pytest.raises(CatalogError):
        cat.make("product-chain?part=middle")
    with pytest.raises(CatalogError):
        cat.make("floor-arith?m=x")


def test_every_instance_builds_and_describes():
    ids = cat.instances(all_params=True)
    assert len(ids) == len(set(ids))
    assert set(cat.instances()) <= set(ids)
    for ident in ids:
        K = cat.make(ident)
        d = cat.describe(ident)
        assert d["class"] == cat.claims(ident).declared_class
        # a claimed property is never also a claimed failure
        assert not set(d["holds"]) & set(d["fails"]), ident
        assert K.id


def test_floor_mean_domain_excludes_all_zero_truncations():
    K = cat.make("floor-arith?m=0")
    with pytest.raises(DomainError):
        K((F(1, 2), F(9, 10)))
    assert cat.make("floor-arith?m=0&total=1")((F(1, 2), F(9, 10))) == 0


def test_floor_mean_range_is_the_scaled_lattice():
    # A_m|_n only takes values k / (n 10^m)
    K = cat.make("floor-arith?m=1")
    for t in [(F(123, 100), F(457, 100), F(9)), (F(1, 7), F(22, 7), F(5, 3))]:
        v = K(t) * 3 * 10
        assert v.denominator == 1


@given(st.lists(positive, min_size=2, max_size=8))
def test_bessel_lemma_equivalence(xs):
    xs = sorted(xs)
    B = cat.make("bessel-plus")
    mean_like = xs[0] <= B(tuple(xs)) <= xs[-1]
    if len(xs) == 2:
        # B+(a1) is undefined; mean-like means a1 + a2 <= a2, impossible for positives
        assert not mean_like
    else:
        assert mean_like == (B(tuple(xs[:-1])) <= xs[-1])


@given(st.lists(positive, min_size=2, max_size=8), positive)
def test_bessel_mean_likeness_persists(xs, extra):
    B = cat.make("bessel-plus")
    t = tuple(xs)
    if B(t) <= max(t):
        u = t + (extra,)
        assert B(u) <= max(u)


def test_bessel_constant_tail_is_never_mean_like():
    B = cat.make("bessel-plus")
    for n in range(2, 60):
        t = (F(1),) + (F(2),) * (n - 1)
        assert B(t) == 2 + F(1, n - 1)


def test_bessel_geometric_tail_value():
    B = cat.make("bessel-plus")
    for n in range(2, 40):
        t = (F(1),) + tuple(2 - F(2) ** (1 - k) for k in range(2, n + 1))
        assert B(t) == 2 + F(1, (n - 1) * 2 ** (n - 1))
        assert B(t) > max(t)


@given(st.fractions(min_value=Fraction(1, 10), max_value=10, max_denominator=100))
def test_resistance_of_equal_resistors(a):
    assert cat.make("parallel-resistance")((a, a)) == a / 2


def test_positive_filter_is_not_monotone():
    K = cat.make("positive-filter?M=arith")
    assert K((F(-1), F(2), F(3))) == F(5, 2)
    assert K((F(1), F(2), F(3))) == 2
