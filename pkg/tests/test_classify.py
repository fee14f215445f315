from fractions import Fraction

import pytest

from quasimean import catalog as cat
from quasimean import classify as C
from quasimean.core import DomainBox

F = Fraction


def box2(lo, hi):
    return DomainBox(lo, hi, arity=2)


def test_envelope_checks_on_simple_means():
    A = cat.make("arith").restrict(2)
    assert C.check_mean(A, box2(-5, 5), budget=500).holds
    assert C.check_strict(A, box2(-5, 5), budget=500).holds
    B = cat.make("bessel-plus").restrict(2)
    v = C.check_right_mean(B, box2(F(1, 10), 5), budget=500)
    assert v.falsified and B(v.witness) > max(v.witness)
    assert C.check_left_mean(B, box2(F(1, 10), 5), budget=500).holds


def test_pair_checks_report_replayable_witnesses():
    K = cat.make("range-penalized-a")
    v = C.check_monotone(K, box2(F(1, 10), 10), budget=2000)
    assert v.falsified
    s, t = v.witness
    assert all(a <= b for a, b in zip(s, t)) and K(s) > K(t)
    P = cat.make("product-chain?part=high").restrict(2)
    v = C.check_symmetric(P, box2(1, 10), budget=500)
    assert v.falsified and P(v.witness[0]) != P(v.witness[1])


def test_diagonal_checks():
    assert C.check_reflexive(cat.make("geometric").restrict(2), box2(F(1, 10), 10), budget=300).holds
    v = C.check_reflexive(cat.make("half-quadratic"), box2(F(1, 10), 10), budget=300)
    assert v.falsified and len(set(v.witness)) == 1
    assert C.check_semi_reflexive(cat.make("floor-arith?m=0").restrict(2), box2(F(1, 10), 10), budget=300).holds


@pytest.mark.parametrize("m", [0, 1, 2])
def test_floor_mean_is_right_but_not_left_continuous(m):
    K = cat.make(f"floor-arith?m={m}").restrict(2)
    point = (F(2, 10**m), F(2, 10**m))
    left = C.check_continuity_at(K, point, "left")
    assert left.falsified and left.witness[0] == point
    assert C.check_continuity_at(K, point, "right").holds
    # off the lattice the function is locally constant
    assert C.check_continuity_at(K, (F(21, 10**(m + 1)), F(37, 10**(m + 1))), "full").holds


@pytest.mark.parametrize("m", [0, 1, 2])
def test_shifted_floor_is_not_semi_reflexive(m):
    K = cat.make(f"shifted-floor?m={m}").restrict(2)
    v = C.check_semi_reflexive(K, box2(F(1, 10**(m + 1)), F(5, 10**m)), budget=500,
                               probes=[(F(21, 10**(m + 1)),) * 2])
    assert v.falsified and v.witness == (F(21, 10**(m + 1)),) * 2


def test_mean_continuity():
    assert C.check_mean_continuity_at(cat.make("arith"), 2).holds
    assert C.check_mean_continuity_at(cat.make("floor-arith?m=0"), 2).falsified


def test_quasi_monotone_and_injectivity():
    Q = cat.make("quasi-monotone-example")
    assert C.check_quasi_monotone(Q, box2(0, 1), budget=300).holds
    assert C.check_right_injective(Q, F(1)).holds
    left = C.check_left_injective(Q, F(0))
    assert left.falsified
    x, y = left.witness
    assert Q(x) == Q(y) and x != y


def test_fixed_point_decomposition():
    d = C.fixed_point_decomposition(cat.make("fixed-point-example"), F(1, 2))
    assert d.consistent and not d.violations
    assert d.fixed_points[0][0] == 0
    assert all(g[2] == -1 for g in d.gaps)


def test_verdicts_serialise():
    v = C.check_reflexive(cat.make("half-quadratic"), box2(1, 2), budget=50)
    j = v.to_json()
    assert j["status"] == "falsified" and j["seed"] == 0 and isinstance(j["witness"], list)


def test_report_is_deterministic():
    a = C.classify("harmonic", budget=300, seed=3, battery=False).to_json()
    b = C.classify("harmonic", budget=300, seed=3, battery=False).to_json()
    assert a == b


@pytest.mark.parametrize("ident", cat.instances(all_params=True))
def test_declared_matrix_at_low_budget(ident):
    report = C.classify(ident, budget=1500, seed=0, battery=False)
    bad = [row for row in report.matrix if not row["agrees"]]
    assert not bad, bad
    for row in report.matrix:
        if row["expected"] == C.FALSIFIED:
            assert report.verdicts[row["property"]].witness is not None
