"""Registry of concrete quasi-means, keyed by URL-style ids.

An id is a base name plus optional query parameters, e.g.
``floor-arith?m=2`` or ``conjugate-floor?f=square&m=0``.  Each entry knows
how to build its MeanFunction and what it claims about itself: a declared
class, properties that hold, properties that fail, claims that turned out
to be wrong ("contested"), a sensible default box and a few probe tuples
that exhibit known counterexamples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional
from urllib.parse import parse_qsl

import numpy as np

from . import core
from .core import (
    A_QUASI,
    INF,
    LEFT,
    M_QUASI,
    MEAN,
    NONE,
    RIGHT,
    DomainBox,
    MeanFunction,
    arithmetic_mean,
    generator,
    positive,
    real_root,
    truncate_to_mean,
)
from .errors import CatalogError
from .exact import (
    as_fraction, ceil_at_scale, exact_sum, floor_at_scale, is_exact, ratio_sum, tame, to_exact,
)

# property names shared with the classifier
LEFT_MEAN, RIGHT_MEAN, IS_MEAN = "left-mean", "right-mean", "mean"
STRICT, MONOTONE, SYMMETRIC = "strict", "monotone", "symmetric"
REFLEXIVE, SEMI_REFLEXIVE = "reflexive", "semi-reflexive"
CONTINUOUS, LEFT_CONT, RIGHT_CONT = "continuous", "left-continuous", "right-continuous"
MEAN_CONT, STRONG, QUASI_MONOTONE = "mean-continuous", "strong", "quasi-monotone"
RIGHT_INJ, LEFT_INJ = "right-injective", "left-injective"
IS_A_QUASI, IS_M_QUASI = "a-quasi", "m-quasi"

PROPERTIES = (
    LEFT_MEAN, RIGHT_MEAN, IS_MEAN, STRICT, MONOTONE, SYMMETRIC, REFLEXIVE, SEMI_REFLEXIVE,
    CONTINUOUS, LEFT_CONT, RIGHT_CONT, MEAN_CONT, STRONG, QUASI_MONOTONE, RIGHT_INJ, LEFT_INJ,
    IS_A_QUASI, IS_M_QUASI,
)


@dataclass(frozen=True)
class Param:
    name: str
    parse: Callable[[str], object]
    default: object = None
    required: bool = False
    choices: Optional[tuple] = None


@dataclass(frozen=True)
class Contested:
    """A published claim about an entry that the falsifier is expected to contradict."""

    property: str
    claimed: bool
    note: str


@dataclass(frozen=True)
class Claims:
    declared_class: str
    holds: frozenset
    fails: frozenset
    contested: tuple = ()
    box: DomainBox = field(default_factory=DomainBox)
    probes: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    summary: str
    params: tuple
    build: Callable[..., MeanFunction] = field(repr=False)
    claims: Callable[..., Claims] = field(repr=False)

    def resolve(self, query: dict) -> dict:
        known = {p.name: p for p in self.params}
        unknown = sorted(set(query) - set(known))
        if unknown:
            raise CatalogError(f"{self.name}: unknown parameter(s) {', '.join(unknown)}")
        out = {}
        for p in self.params:
            if p.name in query:
                try:
                    value = p.parse(query[p.name])
                except (ValueError, TypeError, ZeroDivisionError) as exc:
                    raise CatalogError(f"{self.name}: bad value for {p.name}: {exc}") from None
                if p.choices is not None and value not in p.choices:
                    raise CatalogError(f"{self.name}: {p.name} must be one of {', '.join(map(str, p.choices))}")
                out[p.name] = value
            elif p.required:
                raise CatalogError(f"{self.name}: missing required parameter {p.name}")
            else:
                out[p.name] = p.default
        return out


REGISTRY: dict = {}


def _register(name, summary, params=()):
    def deco(pair):
        build, claims = pair
        REGISTRY[name] = CatalogEntry(name, summary, tuple(params), build, claims)
        return pair

    return deco


def split_id(ident: str):
    base, _, query = ident.partition("?")
    pairs = parse_qsl(query, keep_blank_values=True, strict_parsing=False) if query else []
    q = {}
    for k, v in pairs:
        if k in q:
            raise CatalogError(f"parameter {k} given twice in {ident!r}")
        q[k] = v
    return base.strip(), q


def entry(ident: str) -> tuple:
    """(CatalogEntry, resolved parameters) for an id."""
    base, query = split_id(ident)
    if base not in REGISTRY:
        raise CatalogError(f"unknown catalog id {base!r}")
    e = REGISTRY[base]
    return e, e.resolve(query)


def make(ident: str) -> MeanFunction:
    e, params = entry(ident)
    return e.build(**params)


def claims(ident: str) -> Claims:
    e, params = entry(ident)
    return e.claims(**params)


def ids() -> list:
    return sorted(REGISTRY)


def canonical_id(name: str, params: dict) -> str:
    shown = [f"{k}={_show_param(v)}" for k, v in params.items() if v is not None]
    return name + ("?" + "&".join(shown) if shown else "")


def _show_param(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else str(v)
    return str(v)


# parameter parsers

def _int(text: str) -> int:
    return int(text)


def _flag(text: str) -> bool:
    if text.lower() in ("1", "true", "yes", ""):
        return True
    if text.lower() in ("0", "false", "no"):
        return False
    raise ValueError(f"not a flag: {text!r}")


def _rational(text: str) -> Fraction:
    return to_exact(text)


def _text(text: str) -> str:
    if not text:
        raise ValueError("empty value")
    return text


def _claims(cls, holds=(), fails=(), contested=(), box=None, probes=None) -> Claims:
    return Claims(cls, frozenset(holds), frozenset(fails), tuple(contested), box or DomainBox(), probes or {})


def _box(lo, hi, arity=2, variadic=False, lo_open=False, hi_open=False) -> DomainBox:
    lo = lo if isinstance(lo, float) else Fraction(lo)
    hi = hi if isinstance(hi, float) else Fraction(hi)
    return DomainBox(lo, hi, lo_open, hi_open, arity, variadic)


def _scaled(total: int, n: int, m: int) -> Fraction:
    """total / (n * 10**m) for any integer m."""
    if m >= 0:
        return Fraction(total, n * 10**m)
    return Fraction(total * 10 ** (-m), n)


def _unit(m: int) -> Fraction:
    return Fraction(1, 10**m) if m >= 0 else Fraction(10 ** (-m))


def _pt(*xs):
    return tuple(Fraction(x) if not isinstance(x, Fraction) else x for x in xs)


# --- the ordinary means -------------------------------------------------------------

_MEAN_HOLDS = (IS_MEAN, LEFT_MEAN, RIGHT_MEAN, STRICT, MONOTONE, SYMMETRIC, REFLEXIVE, SEMI_REFLEXIVE,
               CONTINUOUS, LEFT_CONT, RIGHT_CONT, MEAN_CONT, QUASI_MONOTONE, IS_A_QUASI)

_register("arith", "arithmetic mean")((
    lambda: core.ARITH,
    lambda: _claims(MEAN, _MEAN_HOLDS + (IS_M_QUASI,), box=_box(-10, 10, 2, True)),
))
_register("geometric", "geometric mean on positive tuples")((
    lambda: core.GEOMETRIC,
    lambda: _claims(MEAN, _MEAN_HOLDS + (IS_M_QUASI,), box=_box(0, 10, 2, True, lo_open=True)),
))
_register("harmonic", "harmonic mean on positive tuples")((
    lambda: core.HARMONIC,
    lambda: _claims(MEAN, _MEAN_HOLDS + (IS_M_QUASI,), box=_box(0, 10, 2, True, lo_open=True)),
))
_register("power", "power mean (sum a_i^x / n)^(1/x), geometric at x=0",
          [Param("x", _rational, required=True)])((
    lambda x: core.power_mean_function(x),
    lambda x: _claims(MEAN, _MEAN_HOLDS + (IS_M_QUASI,), box=_box(0, 10, 2, True, lo_open=True)),
))
_register("min", "minimum")((
    lambda: core.MIN,
    lambda: _claims(MEAN, (IS_MEAN, LEFT_MEAN, RIGHT_MEAN, MONOTONE, SYMMETRIC, REFLEXIVE, CONTINUOUS),
                    fails=(STRICT,), box=_box(-10, 10, 2, True)),
))
_register("max", "maximum")((
    lambda: core.MAX,
    lambda: _claims(MEAN, (IS_MEAN, LEFT_MEAN, RIGHT_MEAN, MONOTONE, SYMMETRIC, REFLEXIVE, CONTINUOUS),
                    fails=(STRICT,), box=_box(-10, 10, 2, True)),
))


def _quasi_arith(f):
    return core.quasi_arithmetic_function(generator(f))


def _quasi_arith_claims(f):
    return _claims(MEAN, (IS_MEAN, LEFT_MEAN, RIGHT_MEAN, STRICT, MONOTONE, SYMMETRIC, REFLEXIVE, CONTINUOUS),
                   box=_box(0, 10, 2, True, lo_open=True))


_register("quasi-arith", "quasi-arithmetic mean f^-1(sum f(a_i) / n)",
          [Param("f", _text, required=True)])((_quasi_arith, _quasi_arith_claims))


def _truncate(K):
    return truncate_to_mean(make(K))


def _truncate_claims(K):
    return _claims(MEAN, (IS_MEAN, LEFT_MEAN, RIGHT_MEAN), box=claims(K).box)


_register("truncate", "clamp a quasi-mean into [min, max]",
          [Param("K", _text, required=True)])((_truncate, _truncate_claims))


# --- Bessel-type expressions ---------------------------------------------------------

def _sum_over_n_minus_one(t):
    return tame(exact_sum(t) / (len(t) - 1)) if all(is_exact(x) for x in t) else math.fsum(t) / (len(t) - 1)


def _bessel_plus():
    return MeanFunction("bessel-plus", _sum_over_n_minus_one, arity=2, variadic=True, domain=positive,
                        kind=LEFT, batch=lambda x: x.sum(axis=1) / (x.shape[1] - 1))


def _bessel_minus():
    return MeanFunction("bessel-minus", _sum_over_n_minus_one, arity=2, variadic=True, domain=core.negative,
                        kind=RIGHT, batch=lambda x: x.sum(axis=1) / (x.shape[1] - 1))


def _bessel():
    return MeanFunction("bessel", _sum_over_n_minus_one, arity=2, variadic=True, kind=M_QUASI,
                        batch=lambda x: x.sum(axis=1) / (x.shape[1] - 1))


_BESSEL_HOLDS = (STRICT, MONOTONE, SYMMETRIC, CONTINUOUS, LEFT_CONT, RIGHT_CONT)

_register("bessel-plus", "sum a_i / (n-1) on positive tuples")((
    _bessel_plus,
    lambda: _claims(LEFT, _BESSEL_HOLDS + (LEFT_MEAN,), fails=(REFLEXIVE, IS_MEAN, RIGHT_MEAN),
                    box=_box(0, 10, 2, True, lo_open=True),
                    probes={RIGHT_MEAN: [_pt(1, 2)], REFLEXIVE: [_pt(1, 1)], IS_MEAN: [_pt(1, 2)]}),
))
_register("bessel-minus", "sum a_i / (n-1) on negative tuples")((
    _bessel_minus,
    lambda: _claims(RIGHT, _BESSEL_HOLDS + (RIGHT_MEAN,), fails=(REFLEXIVE, IS_MEAN, LEFT_MEAN),
                    box=_box(-10, 0, 2, True, hi_open=True),
                    probes={LEFT_MEAN: [_pt(-1, -2)], REFLEXIVE: [_pt(-1, -1)], IS_MEAN: [_pt(-1, -2)]}),
))
_register("bessel", "sum a_i / (n-1) on all real tuples")((
    _bessel,
    lambda: _claims(M_QUASI, (IS_M_QUASI, SYMMETRIC, CONTINUOUS), fails=(LEFT_MEAN, RIGHT_MEAN, IS_MEAN),
                    box=_box(-10, 10, 2, True),
                    probes={LEFT_MEAN: [_pt(-1, -2)], RIGHT_MEAN: [_pt(1, 2)]}),
))


def _unbiased_deviation():
    # quasi-arithmetic version of the positive Bessel expression with f(x) = x^2
    def func(t):
        n = len(t)
        if all(is_exact(x) for x in t):
            squares = ratio_sum([(x._numerator ** 2, x._denominator ** 2) for x in map(as_fraction, t)])
            return real_root(squares / (n - 1), 2)
        return math.sqrt(math.fsum(float(x) ** 2 for x in t) / (n - 1))

    return MeanFunction("unbiased-deviation", func, arity=2, variadic=True, domain=positive, kind=LEFT)


_register("unbiased-deviation", "sqrt(sum a_i^2 / (n-1)) on positive tuples")((
    _unbiased_deviation,
    lambda: _claims(LEFT, (LEFT_MEAN, STRICT, MONOTONE, SYMMETRIC, CONTINUOUS), fails=(REFLEXIVE, IS_MEAN),
                    box=_box(0, 10, 2, True, lo_open=True), probes={REFLEXIVE: [_pt(1, 1)], IS_MEAN: [_pt(1, 2)]}),
))


def _trimmed(k):
    # which sorted positions survive: k1 drops the smallest, k2 the largest, k3 both
    cut = {1: (1, None), 2: (0, -1), 3: (1, -1)}[k]

    def func(t):
        kept = sorted(t)[cut[0]:cut[1]]
        if all(is_exact(x) for x in t):
            return Fraction(sum(kept, Fraction(0)), len(t))
        return math.fsum(float(x) for x in kept) / len(t)

    return func


def _trimmed_entry(k):
    name = f"trimmed-k{k}"
    dropped = {1: "the smallest entry", 2: "the largest entry", 3: "the smallest and the largest entries"}[k]

    def build():
        return MeanFunction(name, _trimmed(k), arity=3, variadic=True, domain=positive, kind=RIGHT)

    def cl():
        return _claims(RIGHT, (RIGHT_MEAN, MONOTONE, SYMMETRIC, CONTINUOUS), fails=(IS_MEAN, REFLEXIVE, LEFT_MEAN),
                       box=_box(0, 20, 3, True, lo_open=True),
                       probes={IS_MEAN: [_pt(10, 11, 12)], LEFT_MEAN: [_pt(10, 11, 12)], REFLEXIVE: [_pt(1, 1, 1)]})

    _register(name, f"sum without {dropped}, divided by n, on positive tuples")((build, cl))


for _k in (1, 2, 3):
    _trimmed_entry(_k)


# --- decimal truncations -------------------------------------------------------------

def _floor_sum(t, m):
    return sum(floor_at_scale(x, m) for x in t)


def _ceil_sum(t, m):
    return sum(ceil_at_scale(x, m) for x in t)


def _np_scale(m):
    return 10.0**m


def floor_arith(m: int = 0, total: bool = False) -> MeanFunction:
    """Arithmetic mean of the entries truncated to m decimals.

    Defined where at least one truncated entry is non-zero, unless ``total``
    is set, in which case the formula is used everywhere.
    """

    def func(t):
        return _scaled(_floor_sum(t, m), len(t), m)

    def domain(t):
        return any(floor_at_scale(x, m) != 0 for x in t)

    s = _np_scale(m)
    return MeanFunction(canonical_id("floor-arith", {"m": m, "total": total or None}), func, arity=1, variadic=True,
                        domain=None if total else domain, kind=RIGHT,
                        batch=lambda x: np.floor(x * s).mean(axis=1) / s)


def ceil_arith(m: int = 0, total: bool = False) -> MeanFunction:
    def func(t):
        return _scaled(_ceil_sum(t, m), len(t), m)

    def domain(t):
        return any(ceil_at_scale(x, m) != 0 for x in t)

    s = _np_scale(m)
    return MeanFunction(canonical_id("ceil-arith", {"m": m, "total": total or None}), func, arity=1, variadic=True,
                        domain=None if total else domain, kind=LEFT,
                        batch=lambda x: np.ceil(x * s).mean(axis=1) / s)


def shifted_floor(m: int = 0) -> MeanFunction:
    """A_m^- plus one unit of the m-th decimal: a left-mean."""
    unit = _unit(m)

    def func(t):
        return _scaled(_floor_sum(t, m), len(t), m) + unit

    def domain(t):
        return any(floor_at_scale(x, m) != 0 for x in t)

    return MeanFunction(canonical_id("shifted-floor", {"m": m}), func, arity=1, variadic=True, domain=domain,
                        kind=LEFT)


def shifted_ceil(m: int = 0) -> MeanFunction:
    """A_m^+ minus one unit of the m-th decimal: a right-mean."""
    unit = _unit(m)

    def func(t):
        return _scaled(_ceil_sum(t, m), len(t), m) - unit

    def domain(t):
        return any(ceil_at_scale(x, m) != 0 for x in t)

    return MeanFunction(canonical_id("shifted-ceil", {"m": m}), func, arity=1, variadic=True, domain=domain,
                        kind=RIGHT)


def star_arith(m: int = 0) -> MeanFunction:
    """Average of the floor and ceiling versions."""

    def func(t):
        return (_scaled(_floor_sum(t, m), len(t), m) + _scaled(_ceil_sum(t, m), len(t), m)) / 2

    def domain(t):
        return any(floor_at_scale(x, m) != 0 for x in t) and any(ceil_at_scale(x, m) != 0 for x in t)

    s = _np_scale(m)
    return MeanFunction(canonical_id("star-arith", {"m": m}), func, arity=1, variadic=True, domain=domain,
                        kind=A_QUASI,
                        batch=lambda x: (np.floor(x * s).mean(axis=1) + np.ceil(x * s).mean(axis=1)) / (2 * s))


def floor_geometric(m: int = 0) -> MeanFunction:
    def func(t):
        return core.geometric_mean([_scaled(floor_at_scale(x, m), 1, m) for x in t])

    def domain(t):
        return all(x > 0 and floor_at_scale(x, m) != 0 for x in t)

    return MeanFunction(canonical_id("floor-geometric", {"m": m}), func, arity=1, variadic=True, domain=domain,
                        kind=RIGHT)


def _floor_arith_claims(m, total=False):
    u = _unit(m)
    holds = (RIGHT_MEAN, STRICT, MONOTONE, SYMMETRIC, RIGHT_CONT, SEMI_REFLEXIVE, IS_A_QUASI)
    fails = (REFLEXIVE, MEAN_CONT, LEFT_CONT, CONTINUOUS, IS_MEAN, LEFT_MEAN)
    probes = {
        REFLEXIVE: [(Fraction(21, 10) * u,) * 2],
        IS_MEAN: [(Fraction(19, 10) * u, Fraction(21, 10) * u)],
        LEFT_MEAN: [(Fraction(19, 10) * u, Fraction(21, 10) * u)],
        LEFT_CONT: [(2 * u, 2 * u)],
        CONTINUOUS: [(2 * u, 2 * u)],
        MEAN_CONT: [(Fraction(21, 10) * u,) * 2],
    }
    return _claims(RIGHT, holds, fails, box=_box(-3 * u, 5 * u, 2, True), probes=probes)


def _ceil_arith_claims(m, total=False):
    u = _unit(m)
    holds = (LEFT_MEAN, STRICT, MONOTONE, SYMMETRIC, LEFT_CONT, SEMI_REFLEXIVE, IS_A_QUASI)
    fails = (REFLEXIVE, MEAN_CONT, RIGHT_CONT, CONTINUOUS, IS_MEAN, RIGHT_MEAN)
    probes = {
        REFLEXIVE: [(Fraction(19, 10) * u,) * 2],
        IS_MEAN: [(Fraction(19, 10) * u, Fraction(21, 10) * u)],
        RIGHT_MEAN: [(Fraction(19, 10) * u, Fraction(21, 10) * u)],
        RIGHT_CONT: [(2 * u, 2 * u)],
        CONTINUOUS: [(2 * u, 2 * u)],
        MEAN_CONT: [(Fraction(19, 10) * u,) * 2],
    }
    return _claims(LEFT, holds, fails, box=_box(-3 * u, 5 * u, 2, True), probes=probes)


def _shifted_floor_claims(m):
    u = _unit(m)
    holds = (LEFT_MEAN, STRICT, MONOTONE, SYMMETRIC, RIGHT_CONT, IS_A_QUASI)
    fails = (REFLEXIVE, SEMI_REFLEXIVE, MEAN_CONT, LEFT_CONT, CONTINUOUS, IS_MEAN, RIGHT_MEAN)
    probes = {
        SEMI_REFLEXIVE: [(Fraction(21, 10) * u,) * 2],
        REFLEXIVE: [(Fraction(21, 10) * u,) * 2],
        IS_MEAN: [(2 * u, 2 * u)],
        RIGHT_MEAN: [(2 * u, 2 * u)],
        LEFT_CONT: [(2 * u, 2 * u)],
        CONTINUOUS: [(2 * u, 2 * u)],
        MEAN_CONT: [(Fraction(21, 10) * u,) * 2],
    }
    return _claims(LEFT, holds, fails, box=_box(-3 * u, 5 * u, 2, True), probes=probes)


def _shifted_ceil_claims(m):
    u = _unit(m)
    holds = (RIGHT_MEAN, STRICT, MONOTONE, SYMMETRIC, LEFT_CONT, IS_A_QUASI)
    fails = (REFLEXIVE, SEMI_REFLEXIVE, MEAN_CONT, RIGHT_CONT, CONTINUOUS, IS_MEAN, LEFT_MEAN)
    probes = {
        # 1.9 -> 1 -> 0 (at m = 0)
        SEMI_REFLEXIVE: [(Fraction(19, 10) * u,) * 2],
        REFLEXIVE: [(Fraction(19, 10) * u,) * 2],
        IS_MEAN: [(2 * u, 2 * u)],
        LEFT_MEAN: [(2 * u, 2 * u)],
        RIGHT_CONT: [(2 * u, 2 * u)],
        CONTINUOUS: [(2 * u, 2 * u)],
        MEAN_CONT: [(Fraction(19, 10) * u,) * 2],
    }
    return _claims(RIGHT, holds, fails, box=_box(-3 * u, 5 * u, 2, True), probes=probes)


def _star_claims(m):
    u = _unit(m)
    probes = {
        LEFT_MEAN: [(Fraction(19, 10) * u, 2 * u)],
        RIGHT_MEAN: [(2 * u, Fraction(21, 10) * u)],
    }
    return _claims(A_QUASI, (IS_A_QUASI, MONOTONE, SYMMETRIC), fails=(LEFT_MEAN, RIGHT_MEAN, IS_MEAN, REFLEXIVE),
                   box=_box(-3 * u, 5 * u, 2, True), probes=probes)


def _floor_geometric_claims(m):
    u = _unit(m)
    return _claims(RIGHT, (RIGHT_MEAN, MONOTONE, SYMMETRIC), box=_box(u, 50 * u, 2, True))


_M = Param("m", _int, default=0)
_TOTAL = Param("total", _flag, default=False)

_register("floor-arith", "mean of entries truncated down to m decimals", [_M, _TOTAL])((floor_arith, _floor_arith_claims))
_register("ceil-arith", "mean of entries rounded up at m decimals", [_M, _TOTAL])((ceil_arith, _ceil_arith_claims))
_register("shifted-floor", "floor version plus one unit of the m-th decimal", [_M])((shifted_floor, _shifted_floor_claims))
_register("shifted-ceil", "ceiling version minus one unit of the m-th decimal", [_M])((shifted_ceil, _shifted_ceil_claims))
_register("star-arith", "average of the floor and ceiling versions", [_M])((star_arith, _star_claims))
_register("floor-geometric", "geometric mean of entries truncated down to m decimals", [_M])((floor_geometric, _floor_geometric_claims))


def approx_mean(K: MeanFunction, m: int = 0, rule: str = "floor") -> MeanFunction:
    """K applied to the m-decimal approximations of the entries.

    With the floor rule and a mean K, the result is a right-mean.
    """
    if rule == "floor":
        approx = lambda x: _scaled(floor_at_scale(x, m), 1, m)  # noqa: E731
    elif rule == "ceil":
        approx = lambda x: _scaled(ceil_at_scale(x, m), 1, m)  # noqa: E731
    elif rule == "identity":
        approx = lambda x: x  # noqa: E731
    else:
        raise CatalogError(f"unknown approximation rule {rule!r}")
    def func(t):
        return K([approx(x) for x in t])

    def domain(t):
        return K.in_domain([approx(x) for x in t])

    return MeanFunction(f"approx({K.id};m={m};rule={rule})", func, arity=K.arity, variadic=K.variadic,
                        domain=domain, exact=True, kind=RIGHT if rule == "floor" else LEFT)


def _approx(K="arith", m=0, rule="floor"):
    return approx_mean(make(K), m, rule)


def _approx_claims(K="arith", m=0, rule="floor"):
    side = RIGHT_MEAN if rule == "floor" else LEFT_MEAN
    base = claims(K).box
    u = _unit(m)
    box = DomainBox(max(base.lower, u) if base.lower != -INF else u, base.upper if base.upper != INF else 50 * u,
                    False, base.upper_open, base.arity, base.variadic)
    return _claims(RIGHT if rule == "floor" else LEFT, (side,), box=box)


_register("approx", "a mean applied to m-decimal approximations of the entries",
          [Param("K", _text, default="arith"), _M, Param("rule", _text, default="floor", choices=("floor", "ceil", "identity"))])(
    (_approx, _approx_claims))


# --- conjugates and related constructions ---------------------------------------------

def conjugate(K: MeanFunction, f) -> MeanFunction:
    """f^-1(K(f(a_1), ..., f(a_n)))."""
    g = generator(f) if isinstance(f, str) else f
    # exact bounds, so the domain test never compares a Fraction with a float
    lo, hi = (to_exact(b) for b in g.bracket)

    def func(t):
        return g.inverse(K([g(x) for x in t]))

    def domain(t):
        if not all(lo <= x <= hi for x in t):
            return False
        return K.in_domain([g(x) for x in t])

    return MeanFunction(f"conjugate({K.id};f={g.name})", func, arity=K.arity, variadic=K.variadic,
                        domain=domain, exact=True, kind=K.kind)


def _conjugate(K="bessel-plus", f="square"):
    return conjugate(make(K), f)


def _conjugate_claims(K="bessel-plus", f="square"):
    inner = claims(K)
    keep = {STRICT, MONOTONE, SYMMETRIC, CONTINUOUS, REFLEXIVE, LEFT_MEAN, RIGHT_MEAN, IS_MEAN}
    g = generator(f)
    lo = max(float(g.bracket[0]), 0.0)
    return _claims(inner.declared_class, inner.holds & keep, inner.fails & keep,
                   box=_box(to_exact(lo), 10, 2, inner.box.variadic, lo_open=True))


_register("conjugate", "f^-1(K(f(a_1), ..., f(a_n))) for an increasing generator f",
          [Param("K", _text, default="bessel-plus"), Param("f", _text, default="square")])(
    (_conjugate, _conjugate_claims))


def power_quasi(x) -> MeanFunction:
    """(sum a_i^x / (n-1))^(1/x), and prod a_i^(1/(n-1)) at x = 0."""
    x = to_exact(x)

    def func(t):
        n = len(t)
        if x == 0:
            if all(is_exact(a) for a in t):
                prod = Fraction(1)
                for a in t:
                    prod *= a
                return real_root(tame(prod), n - 1)
            return math.exp(math.fsum(math.log(float(a)) for a in t) / (n - 1))
        if x.denominator == 1 and x > 0 and all(is_exact(a) for a in t):
            return real_root(Fraction(sum(a ** int(x) for a in t), n - 1), int(x))
        xf = float(x)
        return (math.fsum(float(a) ** xf for a in t) / (n - 1)) ** (1.0 / xf)

    kind = LEFT if x > 0 else RIGHT if x < 0 else NONE
    return MeanFunction(canonical_id("power-quasi", {"x": x}), func, arity=2, variadic=True, domain=positive,
                        kind=kind)


def _power_quasi_claims(x):
    x = to_exact(x)
    box = _box(0, 10, 2, True, lo_open=True)
    base = (STRICT, MONOTONE, SYMMETRIC, CONTINUOUS)
    if x > 0:
        return _claims(LEFT, base + (LEFT_MEAN,), fails=(REFLEXIVE, IS_MEAN), box=box,
                       probes={REFLEXIVE: [_pt(1, 1)]})
    note = "grouped with the left-mean family built from the positive Bessel expression"
    if x < 0:
        return _claims(RIGHT, base + (RIGHT_MEAN,), fails=(REFLEXIVE, IS_MEAN, LEFT_MEAN), box=box,
                       contested=(Contested(LEFT_MEAN, True, note),),
                       probes={LEFT_MEAN: [_pt(1, 1)], REFLEXIVE: [_pt(1, 1)], IS_MEAN: [_pt(1, 1)]})
    return _claims(NONE, (MONOTONE, SYMMETRIC, CONTINUOUS), fails=(LEFT_MEAN, RIGHT_MEAN, IS_MEAN, REFLEXIVE),
                   box=box, contested=(Contested(LEFT_MEAN, True, note),),
                   probes={LEFT_MEAN: [(Fraction(1, 2),) * 2], RIGHT_MEAN: [_pt(2, 2)], REFLEXIVE: [_pt(2, 2)]})


_register("power-quasi", "(sum a_i^x / (n-1))^(1/x) on positive tuples",
          [Param("x", _rational, required=True)])((power_quasi, _power_quasi_claims))


def parallel_resistance() -> MeanFunction:
    def func(t):
        if all(is_exact(x) for x in t):
            return 1 / ratio_sum([(x._denominator, x._numerator) for x in map(as_fraction, t)])
        return 1.0 / math.fsum(1.0 / float(x) for x in t)

    return MeanFunction("parallel-resistance", func, arity=2, variadic=True, domain=positive, kind=RIGHT,
                        batch=lambda x: 1.0 / (1.0 / x).sum(axis=1))


_register("parallel-resistance", "1 / sum(1/a_i), the resistance of resistors in parallel")((
    parallel_resistance,
    lambda: _claims(RIGHT, (RIGHT_MEAN, STRONG, SYMMETRIC, CONTINUOUS, MONOTONE, STRICT),
                    fails=(REFLEXIVE, IS_MEAN, LEFT_MEAN), box=_box(0, 10, 2, True, lo_open=True),
                    probes={REFLEXIVE: [_pt(1, 1)]}),
))


def conjugate_floor(f="square", m: int = 0) -> MeanFunction:
    """f^-1 of the floor mean of the images f(a_i)."""
    g = generator(f) if isinstance(f, str) else f

    def image(x):
        y = g(x)
        return y if is_exact(y) else Fraction(y)

    def func(t):
        ys = [image(x) for x in t]
        return g.inverse(_scaled(_floor_sum(ys, m), len(ys), m))

    def domain(t):
        if not all(g.bracket[0] <= x <= g.bracket[1] for x in t):
            return False
        return any(floor_at_scale(image(x), m) != 0 for x in t)

    return MeanFunction(canonical_id("conjugate-floor", {"f": g.name, "m": m}), func, arity=1, variadic=True,
                        domain=domain, kind=RIGHT)


def _conjugate_floor_claims(f="square", m=0):
    return _claims(RIGHT, (RIGHT_MEAN, STRICT, MONOTONE, SYMMETRIC, RIGHT_CONT), fails=(REFLEXIVE, LEFT_CONT, CONTINUOUS),
                   contested=(Contested(CONTINUOUS, True, "described as continuous"),),
                   box=_box(0, 5, 2, True),
                   probes={CONTINUOUS: [_pt(2, 2), _pt(1, 1)], LEFT_CONT: [_pt(2, 2)],
                           REFLEXIVE: [(Fraction(3, 2),) * 2]})


_register("conjugate-floor", "f^-1 of the floor mean of f(a_i)",
          [Param("f", _text, default="square"), _M])((conjugate_floor, _conjugate_floor_claims))


def positive_filter(K: MeanFunction) -> MeanFunction:
    """K applied to the positive entries only, and 0 when there are none."""

    def func(t):
        pos = [x for x in t if x > 0]
        if not pos:
            return Fraction(0) if all(is_exact(x) for x in t) else 0.0
        return K(pos)

    return MeanFunction(f"positive-filter?M={K.id}", func, arity=1, variadic=True, kind=LEFT)


def _positive_filter(M="arith"):
    return positive_filter(make(M))


def _positive_filter_claims(M="arith"):
    return _claims(LEFT, (LEFT_MEAN, SYMMETRIC, LEFT_CONT), fails=(MONOTONE, RIGHT_CONT, CONTINUOUS, IS_MEAN),
                   contested=(Contested(RIGHT_CONT, True, "described as right-continuous"),
                              Contested(LEFT_CONT, False, "described as not left-continuous")),
                   box=_box(-3, 3, 2, True),
                   probes={MONOTONE: [(_pt(-1, 2, 3), _pt(1, 2, 3))], RIGHT_CONT: [_pt(0, 2, 3), _pt(0, 1)],
                           CONTINUOUS: [_pt(0, 2, 3)], IS_MEAN: [_pt(-1, 2, 3)]})


_register("positive-filter", "a mean of the positive entries, 0 if there are none",
          [Param("M", _text, default="arith")])((_positive_filter, _positive_filter_claims))


def half_quadratic() -> MeanFunction:
    def func(t):
        a, b = t
        if is_exact(a) and is_exact(b):
            return real_root(a * a + b * b, 2) / 2
        return math.hypot(float(a), float(b)) / 2

    return MeanFunction("half-quadratic", func, arity=2, domain=positive, kind=RIGHT,
                        batch=lambda x: np.hypot(x[:, 0], x[:, 1]) / 2)


_register("half-quadratic", "sqrt(a^2 + b^2) / 2 on positive pairs")((
    half_quadratic,
    lambda: _claims(RIGHT, (RIGHT_MEAN, STRICT, MONOTONE, SYMMETRIC, CONTINUOUS), fails=(REFLEXIVE, IS_MEAN),
                    box=_box(0, 10, 2, lo_open=True), probes={REFLEXIVE: [_pt(1, 1)]}),
))


# --- product chains -------------------------------------------------------------------

def _chain_sum(t):
    total, prod = Fraction(0) if all(is_exact(x) for x in t) else 0.0, 1
    for x in t:
        prod = tame(prod * x)
        total = tame(total + prod)
    return total


def product_chain(part: str = "high", root: bool = False) -> MeanFunction:
    """(a1 + a1 a2 + ... + a1...an) / n, or its n-th root."""
    inside = (lambda t: all(x >= 1 for x in t)) if part == "high" else (lambda t: all(0 <= x <= 1 for x in t))

    def func(t):
        s = _chain_sum(t)
        v = s / len(t) if is_exact(s) else s / len(t)
        return real_root(v, len(t)) if root else v

    if root:
        kind = RIGHT if part == "high" else LEFT
    else:
        kind = LEFT if part == "high" else RIGHT
    name = "product-chain-root" if root else "product-chain"
    return MeanFunction(f"{name}?part={part}", func, arity=2, variadic=True, domain=inside, kind=kind)


def _chain_claims(part="high", root=False):
    box = _box(1, 10, 2, True) if part == "high" else _box(0, 1, 2, True)
    if root:
        side, other = (RIGHT_MEAN, LEFT_MEAN) if part == "high" else (LEFT_MEAN, RIGHT_MEAN)
    else:
        side, other = (LEFT_MEAN, RIGHT_MEAN) if part == "high" else (RIGHT_MEAN, LEFT_MEAN)
    witness = _pt(2, 2) if part == "high" else (Fraction(1, 2),) * 2
    cls = LEFT if side == LEFT_MEAN else RIGHT
    note = f"the {part} restriction is labelled a {other}"
    return _claims(cls, (side, MONOTONE), fails=(other, REFLEXIVE, IS_MEAN, SYMMETRIC),
                   contested=(Contested(other, True, note),), box=box,
                   probes={other: [witness], REFLEXIVE: [witness], IS_MEAN: [witness],
                           SYMMETRIC: [(_pt(1, 2), _pt(2, 1)) if part == "high" else
                                       ((Fraction(1, 2), Fraction(1)), (Fraction(1), Fraction(1, 2)))]})


_PART = Param("part", _text, required=True, choices=("high", "low"))
_register("product-chain", "(a1 + a1a2 + ... + a1...an)/n on [1,inf) (high) or [0,1] (low)", [_PART])((
    lambda part: product_chain(part, False), lambda part: _chain_claims(part, False)))
_register("product-chain-root", "n-th root of the product-chain expression", [_PART])((
    lambda part: product_chain(part, True), lambda part: _chain_claims(part, True)))


# --- means penalised by the spread ------------------------------------------------------

def _spread_penalized_a(t):
    a, b = t
    return (a + b) / (2 + max(a, b) - min(a, b))


def _spread_penalized_b(t):
    a, b = t
    if a == b:
        return a
    return (a + b) / (2 + 1 / (max(a, b) - min(a, b)))


_register("range-penalized-a", "(a + b)/(2 + max - min) on positive pairs")((
    lambda: MeanFunction("range-penalized-a", _spread_penalized_a, arity=2, domain=positive, kind=RIGHT),
    lambda: _claims(RIGHT, (RIGHT_MEAN, STRICT, SYMMETRIC, CONTINUOUS, REFLEXIVE, MEAN_CONT),
                    fails=(MONOTONE, IS_MEAN, LEFT_MEAN), box=_box(0, 10, 2, lo_open=True),
                    probes={MONOTONE: [(_pt(2, 3), _pt(2, 4))], IS_MEAN: [_pt(2, 4)], LEFT_MEAN: [_pt(2, 4)]}),
))
_register("range-penalized-b", "(a + b)/(2 + 1/(max - min)) for a != b, a on the diagonal")((
    lambda: MeanFunction("range-penalized-b", _spread_penalized_b, arity=2, domain=positive, kind=RIGHT),
    lambda: _claims(RIGHT, (RIGHT_MEAN, STRICT, SYMMETRIC, REFLEXIVE),
                    fails=(CONTINUOUS, MEAN_CONT, IS_MEAN, LEFT_MEAN), box=_box(0, 20, 2, lo_open=True),
                    probes={IS_MEAN: [_pt(10, 11)], LEFT_MEAN: [_pt(10, 11)], CONTINUOUS: [_pt(1, 1)],
                            MEAN_CONT: [_pt(1, 1)]}),
))


# --- two-variable examples ----------------------------------------------------------------

def _twovar(name, func, kind, domain=None, exact=True):
    return MeanFunction(name, func, arity=2, domain=domain, kind=kind, exact=exact)


def _qm_example(t):
    a, b = sorted(t)
    if b == 0:
        return b  # both branches vanish as b -> 0
    r = a / b
    if 2 * a <= b:
        return b * 2 * r * r
    return b * (1 - 2 * (1 - r) ** 2)


def _unit_square(t):
    return all(0 <= x <= 1 for x in t)


_register("quasi-monotone-example", "continuous symmetric right-mean on [0,1]^2 built from 2(a/b)^2")((
    lambda: _twovar("quasi-monotone-example", _qm_example, RIGHT, _unit_square),
    lambda: _claims(RIGHT, (RIGHT_MEAN, CONTINUOUS, QUASI_MONOTONE, SYMMETRIC, RIGHT_INJ),
                    fails=(MONOTONE, LEFT_INJ), box=_box(0, 1, 2),
                    probes={MONOTONE: [(_pt(Fraction(2, 10), Fraction(4, 10)), _pt(Fraction(2, 10), 1))],
                            LEFT_INJ: [_pt(0)]}),
))


def _fixed_point_example(t):
    a, b = t
    return a - a * b + a * a * b


_register("fixed-point-example", "a - ab + a^2 b on [0,1]^2")((
    lambda: _twovar("fixed-point-example", _fixed_point_example, RIGHT, _unit_square),
    lambda: _claims(RIGHT, (RIGHT_MEAN, CONTINUOUS, QUASI_MONOTONE), box=_box(0, 1, 2)),
))


def _is_dyadic_reciprocal(a) -> bool:
    # a = 1/2^k with k >= 1
    if not is_exact(a):
        return False
    a = Fraction(a)
    return 0 < a < 1 and a.numerator == 1 and a.denominator & (a.denominator - 1) == 0


def _dyadic_example(t):
    a, b = sorted(t)
    if b == 1 and _is_dyadic_reciprocal(a):
        return a / 2
    return b


_register("dyadic-example", "a/2 when max = 1 and min = 1/2^k, else the maximum, on [0,1]^2")((
    lambda: _twovar("dyadic-example", _dyadic_example, RIGHT, _unit_square),
    lambda: _claims(RIGHT, (RIGHT_MEAN, QUASI_MONOTONE, SYMMETRIC), fails=(MONOTONE, CONTINUOUS),
                    box=_box(0, 1, 2),
                    probes={MONOTONE: [(_pt(Fraction(4, 10), 1), _pt(Fraction(1, 2), 1))],
                            CONTINUOUS: [_pt(Fraction(1, 2), 1)]}),
))


def _square_min(t):
    a, b = sorted(t)
    return min(tame(a * a), b)


_register("square-min", "min(min^2, max) on [0,2]^2")((
    lambda: _twovar("square-min", _square_min, RIGHT, lambda t: all(0 <= x <= 2 for x in t)),
    lambda: _claims(RIGHT, (RIGHT_MEAN, CONTINUOUS, SYMMETRIC, MONOTONE), box=_box(0, 2, 2)),
))


def _arith_minus_one(t):
    return arithmetic_mean(t) - 1


_register("arith-minus-one", "(a + b)/2 - 1")((
    lambda: _twovar("arith-minus-one", _arith_minus_one, RIGHT),
    lambda: _claims(RIGHT, (RIGHT_MEAN, STRICT, CONTINUOUS, MONOTONE, SYMMETRIC), fails=(IS_MEAN, REFLEXIVE),
                    box=_box(-10, 10, 2)),
))


_register("max-plus-one", "max + 1")((
    lambda: _twovar("max-plus-one", lambda t: max(t) + 1, A_QUASI),
    lambda: _claims(A_QUASI, (IS_A_QUASI, MONOTONE, SYMMETRIC, CONTINUOUS), fails=(IS_M_QUASI, RIGHT_MEAN),
                    box=_box(-10, 10, 2), probes={IS_M_QUASI: [_pt(0, Fraction(1, 10**9))], RIGHT_MEAN: [_pt(0, 0)]}),
))
_register("twice-max", "2 max on [1, inf)^2")((
    lambda: _twovar("twice-max", lambda t: 2 * max(t), M_QUASI, lambda t: all(x >= 1 for x in t)),
    lambda: _claims(M_QUASI, (IS_M_QUASI, MONOTONE, SYMMETRIC, CONTINUOUS), fails=(IS_A_QUASI, RIGHT_MEAN),
                    box=_box(1, INF, 2), probes={IS_A_QUASI: [_pt(10**7, 10**7)], RIGHT_MEAN: [_pt(1, 1)]}),
))


def describe(ident: str) -> dict:
    e, params = entry(ident)
    c = e.claims(**params)
    return {
        "id": canonical_id(e.name, params) if params else e.name,
        "summary": e.summary,
        "params": [{"name": p.name, "required": p.required,
                    "default": None if p.default is None else _show_param(p.default)} for p in e.params],
        "class": c.declared_class,
        "holds": sorted(c.holds),
        "fails": sorted(c.fails),
        "contested": [{"property": x.property, "claimed": x.claimed, "note": x.note} for x in c.contested],
        "box": c.box.to_json(),
    }


# parameter choices that stand in for each family in the classification matrix
_INSTANCE_PARAMS = {
    "power": ["x=2", "x=-1", "x=0", "x=1/2"],
    "power-quasi": ["x=2", "x=1/2", "x=-1", "x=0"],
    "quasi-arith": ["f=square", "f=log", "f=exp"],
    "truncate": ["K=bessel-plus", "K=star-arith"],
    "product-chain": ["part=high", "part=low"],
    "product-chain-root": ["part=high", "part=low"],
    "floor-arith": ["m=0", "m=1", "m=-1"],
    "ceil-arith": ["m=0", "m=1"],
    "shifted-floor": ["m=0", "m=1"],
    "shifted-ceil": ["m=0", "m=1"],
    "star-arith": ["m=0", "m=2"],
    "floor-geometric": ["m=0", "m=1"],
    "approx": ["K=geometric&m=1", "K=arith&m=0&rule=ceil"],
    "conjugate": ["K=bessel-plus&f=square", "K=floor-arith&f=cube"],
    "conjugate-floor": ["f=square&m=0", "f=sqrt&m=1"],
    "positive-filter": ["M=arith", "M=geometric"],
}


def instances(all_params: bool = False) -> list:
    """Concrete ids: one per registered entry, or every listed parameter choice."""
    out = []
    for name in ids():
        choices = _INSTANCE_PARAMS.get(name)
        if choices is None:
            out.append(name)
        elif all_params:
            out.extend(f"{name}?{q}" for q in choices)
        else:
            out.append(f"{name}?{choices[0]}")
    return out
