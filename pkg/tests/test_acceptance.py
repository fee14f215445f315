"""One test per acceptance criterion, each timed against its runtime bound."""

import random
import time
from fractions import Fraction

from quasimean import catalog as cat
from quasimean import dual as D
from quasimean import iterate as it
from quasimean import measures as M
from quasimean.classify import FALSIFIED, HOLDS, check_mean, classify
from quasimean.core import DomainBox

F = Fraction


def d(x):
    return F(str(x))


class Timer:
    def __init__(self, limit):
        self.limit = limit

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.limit, f"took {self.elapsed:.1f} s, limit {self.limit} s"


def test_1_exact_values():
    cases = [
        ("bessel-plus", (1, 2), 3),
        ("bessel-minus", (-1, -2), -3),
        ("floor-arith?m=0", (2.1, 3), d(2.5)),
        ("ceil-arith?m=0", (2.1, 3), 3),
        ("shifted-ceil?m=0", (2.1, 3), 2),
        ("shifted-floor?m=0", (2.1, 3), d(3.5)),
        ("arith", (2.1, 3), d(2.55)),
        ("star-arith?m=0", (2, 2.1), d(2.25)),
        ("star-arith?m=0", (1.9, 2), d(1.75)),
        ("range-penalized-a", (2, 4), d(1.5)),
        ("range-penalized-a", (10, 11), 7),
        ("quasi-monotone-example", (0.2, 1), d(0.08)),
    ]
    with Timer(1):
        for ident, args, want in cases:
            got = cat.make(ident)(tuple(d(x) for x in args))
            assert isinstance(got, (int, Fraction)) and got == want, (ident, args, got)
        P = cat.make("parallel-resistance")
        rng = random.Random(0)
        for _ in range(200):
            a = F(rng.randint(1, 10**6), rng.randint(1, 1000))
            assert P((a, a)) == a / 2


def _chain_tuple(rng, n, m):
    out = []
    for _ in range(n):
        r = rng.random()
        if r < 0.3:
            # on the 10^-m lattice, where floor and ceiling meet
            out.append(F(rng.randint(-500, 500), 10**m) if m >= 0 else F(rng.randint(-50, 50) * 10**-m))
        elif r < 0.5:
            out.append(F(rng.randint(-5000, 5000), 10 ** (m + 1)) if m >= -1 else F(rng.randint(-5000, 5000)))
        else:
            out.append(F(rng.randint(-10**7, 10**7), rng.randint(1, 10**4)))
    return tuple(out)


def test_2_inequality_chain():
    with Timer(10):
        A = cat.make("arith")
        rng = random.Random(0)
        for m in (-1, 0, 1, 2):
            unit = F(10) ** -m
            chain = [cat.make(f"shifted-ceil?m={m}"), cat.make(f"floor-arith?m={m}&total=1"), A,
                     cat.make(f"ceil-arith?m={m}&total=1"), cat.make(f"shifted-floor?m={m}")]
            for _ in range(10_000 // 4):
                t = _chain_tuple(rng, rng.randint(2, 6), m)
                a = A(t)
                vals = [a - unit] + [K(t) for K in chain] + [a + unit]
                assert all(isinstance(v, Fraction) for v in vals)
                assert all(x <= y for x, y in zip(vals, vals[1:])), (m, t, vals)


def test_3_mdista_reproduction():
    box = DomainBox(1, 2, arity=2)
    with Timer(30):
        one = M.mdista(cat.make("floor-arith?m=1").restrict(2), box, samples=10**6, seed=0)
        two = M.mdista(cat.make("floor-arith?m=2").restrict(2), box, samples=10**6, seed=0)
    assert abs(one.value - 0.36) <= 0.01, f"m=1 estimate {one.value:.4f} +- {one.half_width:.4f}"
    assert abs(two.value - 0.0396) <= 0.005, f"m=2 estimate {two.value:.5f} +- {two.half_width:.5f}"


def test_4_mdist_reproduction():
    box = DomainBox(0, 10, arity=2)
    with Timer(30):
        for m in (0, 1):
            est = M.mdist(cat.make(f"floor-arith?m={m}").restrict(2), box)
            assert abs(float(est.lower_bound) - 10.0**-m) <= 0.02 * 10.0**-m
        assert M.mdistp(cat.make("floor-arith?m=0").restrict(2), box).diverging


def test_5_iteration_traces():
    with Timer(5):
        tr = it.extend3(cat.make("floor-arith?m=0"), d(1.1), d(2.1), d(3.1))
        want = [(d(1.5), 2, d(2.5)), (d(1.5), d(1.5), 2), (1, d(1.5), d(1.5)), (1, 1, 1)]
        assert tr.rows[1:5] == want and tr.limit == 1
        assert it.extend3(cat.make("floor-arith?m=0&total=1"), d(0.9), d(1.9), d(2.9)).rows[-1] == (0, 0, 0)
        A = it.extend3(cat.make("arith"), d(1.1), d(2.1), d(3.1))
        assert A.converged and abs(float(A.limit) - 2.1) <= 1e-10
        S = cat.make("square-min")
        assert it.idempotent_closure(S, 1, 2).limit == 1
        assert abs(float(it.idempotent_closure(S, d(0.999), 2).limit)) <= 1e-10
        lo, hi = cat.make("floor-arith?m=0&total=1"), cat.make("floor-arith?m=1&total=1")
        assert it.compound(lo, hi, 1, 2).limit >= 1
        assert it.compound(lo, hi, d(0.9), d(1.9)).limit < d(0.75)


def _mean_like(B, t):
    return min(t) <= B(t) <= max(t)


def test_6_bessel_at_desk_scale():
    B = cat.make("bessel-plus")
    rng = random.Random(0)

    def pos():
        return F(rng.randint(1, 10**6), rng.randint(1, 1000))

    with Timer(20):
        for _ in range(10_000):
            t = tuple(sorted(pos() for _ in range(rng.randint(3, 8))))
            assert _mean_like(B, t) == (B(t[:-1]) <= t[-1])
        done = 0
        while done < 10_000:
            t = tuple(pos() for _ in range(rng.randint(2, 8)))
            if B(t) <= max(t):
                u = t + (pos(),)
                assert B(u) <= max(u)
                done += 1
        for _ in range(100):
            # a_k ~ k * U(1/2, 2) tends to infinity
            seq = [F(k) * F(rng.randint(500, 2000), 1000) for k in range(1, 301)]
            n = it.bessel_onset(seq, assume_divergent=False)
            assert n is not None
            flags = [_mean_like(B, tuple(seq[:k])) for k in range(2, len(seq) + 1)]
            assert flags == [k >= n for k in range(2, len(seq) + 1)]
        assert it.bessel_onset([1] + [2] * (10**4 - 1)) is None


def test_7_classification_matrix():
    extra = ["floor-arith?m=1", "floor-arith?m=2", "shifted-floor?m=1", "shifted-floor?m=2"]
    with Timer(60):
        reports = {i: classify(i, budget=10_000, seed=0, battery=False) for i in cat.instances() + extra}
        bad = {}
        for ident, r in reports.items():
            for row in r.matrix:
                if not row["agrees"]:
                    bad.setdefault(ident, []).append(row)
                if row["expected"] == FALSIFIED:
                    assert r.verdicts[row["property"]].witness is not None, (ident, row)
        assert not bad, bad
        for m in (0, 1, 2):
            r = reports[f"floor-arith?m={m}"]
            assert r.verdicts["right-continuous"].status == HOLDS
            point = r.verdicts["left-continuous"].witness[0]
            assert all((x * 10**m).denominator == 1 for x in point)
            w = reports[f"shifted-floor?m={m}"].verdicts["semi-reflexive"].witness
            assert w == (F(21, 10 ** (m + 1)),) * 2
        assert reports["positive-filter?M=arith"].verdicts["monotone"].witness == ((-1, 2, 3), (1, 2, 3))
        rng = random.Random(0)
        for _ in range(1000):
            v, u = sorted(rng.sample(range(1, 61), 2))
            v, u = F(v, 12), F(u, 12)
            a, b = F(rng.randint(10, 100), 10), F(rng.randint(10, 100), 10)
            Ku, Kv = cat.make(f"power-quasi?x={u}"), cat.make(f"power-quasi?x={v}")
            assert Ku((a, b)) < Kv((a, b)), (u, v, a, b)


def _random_ast(rng, depth=0):
    if depth >= 4 or rng.random() < 0.3:
        if rng.random() < 0.7:
            return D.Var(rng.randint(1, 3))
        return D.Const(F(rng.randint(-9, 9), rng.randint(1, 4)))
    kind = rng.randrange(6)
    if kind < 2:
        parts = tuple(_random_ast(rng, depth + 1) for _ in range(rng.randint(2, 3)))
        return D.Add(parts) if kind == 0 else D.Mul(parts)
    child = _random_ast(rng, depth + 1)
    if kind == 2:
        return D.DivN(child, rng.randint(1, 5))
    if kind == 3:
        return D.RootN(child, rng.randint(1, 5))
    x = F(rng.randint(-6, 6) or 1, rng.randint(1, 3))
    return D.PowX(child, x) if kind == 4 else D.ScaleX(child, x)


FORM_1 = ("root(3, root(2, (pow(2, a1) + pow(2, a2))/2) * root(2, (pow(2, a2) + pow(2, a3))/2)"
          " * root(2, (pow(2, a3) + pow(2, a1))/2))")
FORM_2 = "root(6, ((pow(2, a1) + pow(2, a2)) * (pow(2, a2) + pow(2, a3)) * (pow(2, a3) + pow(2, a1)))/8)"


def test_8_duality():
    rng = random.Random(0)
    with Timer(10):
        for _ in range(1000):
            e = _random_ast(rng)
            assert D.dualize(D.dualize(e)) == e
        one, two = D.parse(FORM_1), D.parse(FORM_2)
        for _ in range(1000):
            t = tuple(F(rng.randint(1, 10**4), 100) for _ in range(3))
            x, y = float(D.evaluate(one, t)), float(D.evaluate(two, t))
            assert abs(x - y) <= 1e-10 * max(1.0, abs(x))
        box = DomainBox(F(1, 10), 10, arity=3)
        assert check_mean(D.as_mean_function(D.dualize(one), box), box, budget=2000).status == HOLDS
        assert check_mean(D.as_mean_function(D.dualize(two), box), box, budget=2000).status == FALSIFIED
