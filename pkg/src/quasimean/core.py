"""Domains, the MeanFunction abstraction and the ordinary means."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ArityError, BracketError, DomainError, GeneratorError
from .exact import Number, as_fraction, compare_le, exact_sum, is_exact, ratio_sum, to_exact, to_float

INF = math.inf

# classes a MeanFunction can declare
LEFT, RIGHT, MEAN = "left-mean", "right-mean", "mean"
A_QUASI, M_QUASI, NONE = "a-quasi", "m-quasi", "none"


def _bound(text: str):
    text = text.strip()
    if text in ("inf", "+inf"):
        return INF
    if text == "-inf":
        return -INF
    return to_exact(text)


@dataclass(frozen=True)
class DomainBox:
    """A coordinate interval H (possibly open or unbounded) plus an arity.

    When ``variadic`` is set, ``arity`` is the minimum and tuples are drawn
    with lengths in ``arity..max_arity``.
    """

    lower: object = -INF
    upper: object = INF
    lower_open: bool = False
    upper_open: bool = False
    arity: int = 2
    variadic: bool = False
    max_arity: int = 6

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("box lower bound exceeds upper bound")
        if self.arity < 1:
            raise ValueError("arity must be positive")
        # exact bounds for the Fraction fast path, None when unbounded
        lo = None if isinstance(self.lower, float) and self.lower == -INF else to_exact(self.lower)
        hi = None if isinstance(self.upper, float) and self.upper == INF else to_exact(self.upper)
        object.__setattr__(self, "_bounds", (lo, hi))

    @classmethod
    def parse(cls, text: str, arity: int = 2, variadic: bool = False) -> "DomainBox":
        """Read ``lo:hi``; a leading ``(`` or trailing ``)`` marks an open end."""
        m = re.fullmatch(r"\s*([\[(]?)\s*([^:]+?)\s*:\s*([^:]+?)\s*([\])]?)\s*", text)
        if m is None:
            raise ValueError(f"bad box {text!r}; expected lo:hi")
        return cls(
            lower=_bound(m.group(2)),
            upper=_bound(m.group(3)),
            lower_open=m.group(1) == "(",
            upper_open=m.group(4) == ")",
            arity=arity,
            variadic=variadic,
        )

    def with_arity(self, n: int, variadic: bool = False) -> "DomainBox":
        return replace(self, arity=n, variadic=variadic)

    @property
    def degenerate(self) -> bool:
        return self.lower == self.upper

    def contains_value(self, x) -> bool:
        if type(x) is Fraction:
            return self._contains_fraction(x)
        if self.lower_open:
            if not x > self.lower:
                return False
        elif not x >= self.lower:
            return False
        if self.upper_open:
            return x < self.upper
        return x <= self.upper

    def _contains_fraction(self, x: Fraction) -> bool:
        # integer cross-multiplication; Fraction comparisons are slow
        lo, hi = self._bounds
        n, d = x._numerator, x._denominator
        if lo is not None:
            c = n * lo._denominator - lo._numerator * d
            if c < 0 or (c == 0 and self.lower_open):
                return False
        if hi is not None:
            c = hi._numerator * d - n * hi._denominator
            if c < 0 or (c == 0 and self.upper_open):
                return False
        return True

    def contains(self, t: Sequence) -> bool:
        if self.variadic:
            if len(t) < self.arity:
                return False
        elif len(t) != self.arity:
            return False
        return all(self.contains_value(x) for x in t)

    def describe(self) -> str:
        lo = "(" if self.lower_open else "["
        hi = ")" if self.upper_open else "]"
        n = f"n>={self.arity}" if self.variadic else f"n={self.arity}"
        return f"{lo}{_fmt(self.lower)}, {_fmt(self.upper)}{hi}^n, {n}"

    def to_json(self) -> dict:
        return {
            "lower": _fmt(self.lower),
            "upper": _fmt(self.upper),
            "lower_open": self.lower_open,
            "upper_open": self.upper_open,
            "arity": self.arity,
            "variadic": self.variadic,
        }


def _fmt(x) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else str(x.numerator)
    return str(x)


@dataclass(frozen=True)
class MeanFunction:
    """A named real function of tuples.

    ``func`` receives an already-coerced tuple: Fractions when ``exact`` is
    set, floats otherwise.  ``domain`` further restricts which tuples are
    accepted.  ``batch`` is an optional numpy evaluator over an (N, n) float
    array, used only by Monte Carlo estimators where binary rounding at
    measure-zero boundaries does not matter.
    """

    id: str
    func: Callable[[tuple], Number] = field(repr=False, compare=False)
    arity: int = 2
    variadic: bool = False
    domain: Optional[Callable[[tuple], bool]] = field(default=None, repr=False, compare=False)
    exact: bool = True
    kind: Optional[str] = None
    batch: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False, compare=False)

    def coerce(self, values) -> tuple:
        if self.exact:
            if type(values) is tuple and all(type(v) is Fraction for v in values):
                return values
            return tuple(to_exact(v) for v in values)
        return tuple(to_float(v) for v in values)

    def accepts_arity(self, n: int) -> bool:
        return n >= self.arity if self.variadic else n == self.arity

    def in_domain(self, values) -> bool:
        t = self.coerce(values)
        return self.accepts_arity(len(t)) and (self.domain is None or self.domain(t))

    def __call__(self, values) -> Number:
        t = self.coerce(values)
        if not self.accepts_arity(len(t)):
            raise DomainError(f"{self.id} does not take {len(t)} arguments")
        if self.domain is not None and not self.domain(t):
            raise DomainError(f"{self.id} is undefined at {_show(t)}")
        return self.func(t)

    def restrict(self, n: int) -> "MeanFunction":
        """K|_n, the fixed-arity version of a variadic function."""
        if not self.accepts_arity(n):
            raise ArityError(f"{self.id} has no {n}-variable restriction")
        if not self.variadic:
            return self
        return replace(self, arity=n, variadic=False)

    def __hash__(self):
        return hash((self.id, self.arity, self.variadic))


def _show(t) -> str:
    return "(" + ", ".join(str(x) for x in t) + ")"


def positive(t) -> bool:
    return all((x._numerator > 0) if type(x) is Fraction else x > 0 for x in t)


def negative(t) -> bool:
    return all((x._numerator < 0) if type(x) is Fraction else x < 0 for x in t)


def _all_positive(t) -> bool:
    return all((x._numerator > 0) if type(x) is Fraction else x > 0 for x in t)


def min_of(t: Sequence) -> Number:
    if not t:
        raise ValueError("empty tuple")
    return min(t)


def max_of(t: Sequence) -> Number:
    if not t:
        raise ValueError("empty tuple")
    return max(t)


def exact_root(q: Fraction, k: int) -> Optional[Fraction]:
    """The rational k-th root of q if there is one."""
    if k == 1:
        return q
    if q._numerator < 0:
        if k % 2 == 0:
            return None
        r = exact_root(-q, k)
        return None if r is None else -r
    p = _int_root(q.numerator, k)
    d = _int_root(q.denominator, k)
    if p is None or d is None:
        return None
    return Fraction(p, d)


def _int_root(n: int, k: int) -> Optional[int]:
    if n < 2:
        return n
    r = round(n ** (1.0 / k)) if n.bit_length() < 1000 else _newton_root(n, k)
    for c in (r - 1, r, r + 1):
        if c >= 0 and c**k == n:
            return c
    return None


def _newton_root(n: int, k: int) -> int:
    x = 1 << (n.bit_length() // k + 1)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            return x
        x = y


def real_root(x: Number, k: int) -> Number:
    """k-th root, exact when possible, real (odd k) for negatives."""
    if is_exact(x):
        r = exact_root(as_fraction(x), k)
        if r is not None:
            return r
    xf = float(x)
    if xf < 0:
        if k % 2 == 0:
            raise DomainError(f"even root of negative number {x}")
        return -((-xf) ** (1.0 / k))
    return xf ** (1.0 / k)


def arithmetic_mean(t: Sequence) -> Number:
    if not t:
        raise ValueError("empty tuple")
    if all(is_exact(x) for x in t):
        return exact_sum(t) / len(t)
    return math.fsum(float(x) for x in t) / len(t)


def geometric_mean(t: Sequence) -> Number:
    if not t:
        raise ValueError("empty tuple")
    if not _all_positive(t):
        raise DomainError("geometric mean needs positive entries")
    if all(is_exact(x) for x in t):
        p = q = 1
        for x in t:
            x = as_fraction(x)
            p *= x._numerator
            q *= x._denominator
        r = exact_root(Fraction(p, q), len(t))
        if r is not None:
            return r
    return math.exp(math.fsum(math.log(float(x)) for x in t) / len(t))


def harmonic_mean(t: Sequence) -> Number:
    if not t:
        raise ValueError("empty tuple")
    if not _all_positive(t):
        raise DomainError("harmonic mean needs positive entries")
    if all(is_exact(x) for x in t):
        recips = ratio_sum([(x._denominator, x._numerator) for x in map(as_fraction, t)])
        return len(t) / recips
    return len(t) / math.fsum(1.0 / float(x) for x in t)


def power_mean(t: Sequence, x) -> Number:
    """(sum a_i**x / n)**(1/x); x = 0 gives the geometric mean."""
    if not t:
        raise ValueError("empty tuple")
    if x == 0:
        return geometric_mean(t)
    if not _all_positive(t) and (x <= 0 or x != int(x)):
        raise DomainError("power mean with this exponent needs positive entries")
    if x == 1:
        return arithmetic_mean(t)
    if x == int(x) and x > 0 and all(is_exact(a) for a in t):
        k = int(x)
        s = ratio_sum([(a._numerator ** k, a._denominator ** k) for a in map(as_fraction, t)]) / len(t)
        return real_root(s, int(x))
    xf = float(x)
    s = math.fsum(float(a) ** xf for a in t) / len(t)
    return s ** (1.0 / xf)


@dataclass(frozen=True)
class GeneratorFunction:
    """A continuous, strictly increasing one-variable map with its inverse.

    If ``inverse_func`` is not given, the inverse is found by bisection on
    ``bracket``.
    """

    name: str
    func: Callable[[float], float] = field(repr=False, compare=False)
    bracket: tuple = (-1e12, 1e12)
    inverse_func: Optional[Callable[[float], float]] = field(default=None, repr=False, compare=False)
    probes: int = 513
    # optional exact versions on Fractions; fall back to the float maps
    exact_func: Optional[Callable] = field(default=None, repr=False, compare=False)
    exact_inverse: Optional[Callable] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        lo, hi = self.bracket
        if not lo < hi:
            raise GeneratorError(f"empty bracket for {self.name}")
        xs = _probe_grid(float(lo), float(hi), self.probes)
        ys = [self.func(x) for x in xs]
        for (x0, y0), (x1, y1) in zip(zip(xs, ys), zip(xs[1:], ys[1:])):
            if not y1 > y0:
                raise GeneratorError(
                    f"{self.name} is not strictly increasing on {self.bracket}: "
                    f"f({x0!r})={y0!r}, f({x1!r})={y1!r}"
                )

    def __call__(self, x) -> Number:
        if self.exact_func is not None and is_exact(x):
            return self.exact_func(Fraction(x))
        return self.func(float(x))

    def inverse(self, y) -> Number:
        if self.exact_inverse is not None and is_exact(y):
            return self.exact_inverse(Fraction(y))
        if self.inverse_func is not None:
            return self.inverse_func(float(y))
        return self.bisect_inverse(y)

    def bisect_inverse(self, y, tol: float = 1e-12, max_iter: int = 200) -> float:
        y = float(y)
        lo, hi = float(self.bracket[0]), float(self.bracket[1])
        flo, fhi = self.func(lo), self.func(hi)
        slack = 1e-12 * max(1.0, abs(y))
        if y < flo - slack or y > fhi + slack:
            raise BracketError(f"{y!r} is outside the range of {self.name} on {self.bracket}")
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if self.func(mid) < y:
                lo = mid
            else:
                hi = mid
            # run down to float resolution; tol only bounds how early we may stop
            if hi - lo <= tol * 1e-4 * max(1.0, abs(mid)):
                break
        return 0.5 * (lo + hi)

    @classmethod
    def from_expr(cls, text: str, bracket=(0.0, 1e6)) -> "GeneratorFunction":
        """Build a generator from a one-variable formula in ``a1``."""
        from .dual import arity_of, evaluate, parse

        expr = parse(text)
        if arity_of(expr) != 1:
            raise ArityError("a generator formula must use exactly the variable a1")
        return cls(text, lambda x: float(evaluate(expr, (x,))), tuple(bracket))


def _probe_grid(lo: float, hi: float, n: int) -> list:
    pts = set(np.linspace(lo, hi, n).tolist())
    if lo >= 0 and hi > 0:
        start = lo if lo > 0 else min(hi * 1e-12, 1e-12)
        pts.update(np.geomspace(start, hi, n).tolist())
    return sorted(p for p in pts if lo <= p <= hi)


def _safe_log(x: float) -> float:
    if x <= 0:
        return -math.inf if x == 0 else math.nan
    return math.log(x)


def _exact_sqrt(q: Fraction) -> Number:
    if q < 0:
        raise DomainError(f"square root of negative number {q}")
    return real_root(q, 2)


NAMED_GENERATORS = {
    "identity": lambda: GeneratorFunction(
        "identity", lambda x: x, (-1e12, 1e12), lambda y: y, exact_func=lambda x: x, exact_inverse=lambda y: y
    ),
    "square": lambda: GeneratorFunction(
        "square", lambda x: x * x, (0.0, 1e12), math.sqrt, exact_func=lambda x: x * x, exact_inverse=_exact_sqrt
    ),
    "cube": lambda: GeneratorFunction(
        "cube", lambda x: x**3, (-1e6, 1e6), lambda y: real_root(y, 3),
        exact_func=lambda x: x**3, exact_inverse=lambda y: real_root(y, 3),
    ),
    "sqrt": lambda: GeneratorFunction(
        "sqrt", math.sqrt, (0.0, 1e12), lambda y: y * y, exact_func=_exact_sqrt, exact_inverse=lambda y: y * y
    ),
    "log": lambda: GeneratorFunction("log", _safe_log, (1e-12, 1e12), math.exp),
    "exp": lambda: GeneratorFunction("exp", math.exp, (-700.0, 700.0), _safe_log),
    "reciprocal": lambda: GeneratorFunction("reciprocal", lambda x: 1.0 / x, (1e-6, 1e6), lambda y: 1.0 / y),
}


def generator(spec: str, bracket=None) -> GeneratorFunction:
    """A named generator ("square", "log", ...) or a formula in a1."""
    if spec in NAMED_GENERATORS:
        g = NAMED_GENERATORS[spec]()
        return g if bracket is None else replace_bracket(g, bracket)
    return GeneratorFunction.from_expr(spec, bracket or (0.0, 1e6))


def replace_bracket(g: GeneratorFunction, bracket) -> GeneratorFunction:
    return replace(g, bracket=tuple(bracket))


def quasi_arithmetic_mean(t: Sequence, f: GeneratorFunction) -> float:
    images = [f(x) for x in t]
    return f.inverse(math.fsum(images) / len(images))


def is_mean_like(K: MeanFunction, t: Sequence) -> bool:
    """min(t) <= K(t) <= max(t) at this one tuple."""
    t = K.coerce(t)
    v = K(t)
    return compare_le(min(t), v) and compare_le(v, max(t))


def truncate_to_mean(K: MeanFunction) -> MeanFunction:
    """Clamp K into [min, max]; the result is always a mean."""

    def clamped(t):
        v = K.func(t)
        lo, hi = min(t), max(t)
        if not compare_le(lo, v):
            return lo
        if not compare_le(v, hi):
            return hi
        return v

    return MeanFunction(
        id=f"truncate({K.id})",
        func=clamped,
        arity=K.arity,
        variadic=K.variadic,
        domain=K.domain,
        exact=K.exact,
        kind=MEAN,
    )


# the ordinary means as MeanFunctions

def _batch_arith(x):
    return x.mean(axis=1)


ARITH = MeanFunction("arith", arithmetic_mean, arity=1, variadic=True, kind=MEAN, batch=_batch_arith)
GEOMETRIC = MeanFunction("geometric", geometric_mean, arity=1, variadic=True, domain=positive, kind=MEAN)
HARMONIC = MeanFunction("harmonic", harmonic_mean, arity=1, variadic=True, domain=positive, kind=MEAN)
MIN = MeanFunction("min", min, arity=1, variadic=True, kind=MEAN, batch=lambda x: x.min(axis=1))
MAX = MeanFunction("max", max, arity=1, variadic=True, kind=MEAN, batch=lambda x: x.max(axis=1))


def power_mean_function(x) -> MeanFunction:
    x = to_exact(x)
    return MeanFunction(
        f"power?x={x}",
        lambda t: power_mean(t, x),
        arity=1,
        variadic=True,
        domain=positive,
        kind=MEAN,
    )


def quasi_arithmetic_function(f: GeneratorFunction) -> MeanFunction:
    return MeanFunction(
        f"quasi-arith?f={f.name}",
        lambda t: quasi_arithmetic_mean(t, f),
        arity=1,
        variadic=True,
        domain=lambda t: all(f.bracket[0] <= x <= f.bracket[1] for x in t),
        exact=False,
        kind=MEAN,
    )
