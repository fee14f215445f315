"""Exact base-10 numbers and the scalar conventions used across the package.

Every value handled by a mean is either exact (``fractions.Fraction``) or
inexact (``float``).  Decimal inputs are parsed into :class:`ExactDecimal`
and turned into fractions, so truncating at a decimal digit never suffers
from binary rounding.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Union

Number = Union[Fraction, float]

_DECIMAL_RE = re.compile(
    r"""^\s*
    (?P<sign>[+-])?
    (?:(?P<int>\d+)(?:\.(?P<frac>\d*))?|\.(?P<frac_only>\d+))
    (?:[eE](?P<exp>[+-]?\d+))?
    \s*$""",
    re.VERBOSE,
)

RENDER_DIGITS = 18
INEXACT_MARK = "≈"


class DecimalSyntaxError(ValueError):
    pass


@dataclass(frozen=True, order=False)
class ExactDecimal:
    """sign * mantissa * 10**exponent, always kept in canonical form."""

    sign: int
    mantissa: int
    exponent: int

    def __post_init__(self):
        if self.sign not in (-1, 0, 1) or self.mantissa < 0:
            raise ValueError("bad ExactDecimal components")
        if (self.mantissa == 0) != (self.sign == 0):
            raise ValueError("sign must be 0 exactly when mantissa is 0")
        if self.mantissa == 0 and self.exponent != 0:
            raise ValueError("zero must have exponent 0")
        if self.mantissa and self.mantissa % 10 == 0:
            raise ValueError("mantissa has trailing zeros; use ExactDecimal.make")

    @classmethod
    def make(cls, signed_mantissa: int, exponent: int = 0) -> "ExactDecimal":
        if signed_mantissa == 0:
            return cls(0, 0, 0)
        sign = 1 if signed_mantissa > 0 else -1
        mant = abs(signed_mantissa)
        while mant % 10 == 0:
            mant //= 10
            exponent += 1
        return cls(sign, mant, exponent)

    @classmethod
    def parse(cls, text: str) -> "ExactDecimal":
        m = _DECIMAL_RE.match(text)
        if m is None:
            raise DecimalSyntaxError(f"not a decimal number: {text!r}")
        int_part = m.group("int") or ""
        frac = m.group("frac") if m.group("int") is not None else m.group("frac_only")
        frac = frac or ""
        exp = int(m.group("exp") or 0)
        digits = int(int_part + frac or "0")
        if m.group("sign") == "-":
            digits = -digits
        return cls.make(digits, exp - len(frac))

    @classmethod
    def from_fraction(cls, q: Rational) -> "ExactDecimal":
        q = Fraction(q)
        den = q.denominator
        twos = fives = 0
        while den % 2 == 0:
            den //= 2
            twos += 1
        while den % 5 == 0:
            den //= 5
            fives += 1
        if den != 1:
            raise ValueError(f"{q} has no terminating decimal expansion")
        k = max(twos, fives)
        return cls.make(q.numerator * 10**k // q.denominator, -k)

    @classmethod
    def from_float(cls, x: float) -> "ExactDecimal":
        # shortest repr, i.e. the decimal the float was written as
        if not math.isfinite(x):
            raise ValueError("non-finite float")
        return cls.parse(repr(x))

    def to_fraction(self) -> Fraction:
        if self.exponent >= 0:
            return Fraction(self.sign * self.mantissa * 10**self.exponent)
        return Fraction(self.sign * self.mantissa, 10 ** (-self.exponent))

    def floor_at_scale(self, m: int) -> int:
        """The exact integer floor(10**m * value)."""
        return floor_at_scale(self.to_fraction(), m)

    def ceil_at_scale(self, m: int) -> int:
        return ceil_at_scale(self.to_fraction(), m)

    def render(self) -> str:
        if self.sign == 0:
            return "0"
        digits = str(self.mantissa)
        if self.exponent >= 0:
            body = digits + "0" * self.exponent
        else:
            k = -self.exponent
            if len(digits) <= k:
                digits = "0" * (k - len(digits) + 1) + digits
            body = digits[:-k] + "." + digits[-k:]
        return ("-" if self.sign < 0 else "") + body

    def __str__(self) -> str:
        return self.render()

    def __add__(self, other: "ExactDecimal") -> "ExactDecimal":
        e = min(self.exponent, other.exponent)
        a = self.sign * self.mantissa * 10 ** (self.exponent - e)
        b = other.sign * other.mantissa * 10 ** (other.exponent - e)
        return ExactDecimal.make(a + b, e)

    def __neg__(self) -> "ExactDecimal":
        return ExactDecimal(-self.sign, self.mantissa, self.exponent)

    def __sub__(self, other: "ExactDecimal") -> "ExactDecimal":
        return self + (-other)

    def __mul__(self, other: "ExactDecimal") -> "ExactDecimal":
        return ExactDecimal.make(
            self.sign * other.sign * self.mantissa * other.mantissa,
            self.exponent + other.exponent,
        )

    def __lt__(self, other: "ExactDecimal") -> bool:
        return self.to_fraction() < other.to_fraction()

    def __le__(self, other: "ExactDecimal") -> bool:
        return self.to_fraction() <= other.to_fraction()


def floor_at_scale(x: Fraction, m: int) -> int:
    """floor(10**m * x) computed with integers only."""
    if m >= 0:
        return (x.numerator * 10**m) // x.denominator
    return x.numerator // (x.denominator * 10 ** (-m))


def ceil_at_scale(x: Fraction, m: int) -> int:
    return -floor_at_scale(-x, m)


def to_exact(x) -> Fraction:
    """Coerce an input value to a Fraction.

    Floats are read as the decimal they print as, so ``2.1`` means 21/10
    rather than the nearest binary double.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, ExactDecimal):
        return x.to_fraction()
    if isinstance(x, str):
        x = x.strip()
        if "/" in x:
            return Fraction(x)
        return ExactDecimal.parse(x).to_fraction()
    if isinstance(x, float):
        return ExactDecimal.from_float(x).to_fraction()
    if isinstance(x, Rational):
        return Fraction(x)
    return ExactDecimal.from_float(float(x)).to_fraction()


def to_float(x) -> float:
    if isinstance(x, str):
        return float(to_exact(x))
    return float(x)


def is_exact(x) -> bool:
    t = type(x)
    if t is Fraction or t is int:
        return True
    return isinstance(x, (Fraction, int)) and not isinstance(x, bool)


def tame(x: Number, max_den_bits: int = 256) -> Number:
    """Drop to float once a fraction's denominator stops being small.

    Iterating a rational map can double the digit count every step; past
    ``max_den_bits`` the exact value buys nothing.
    """
    if isinstance(x, Fraction) and x.denominator.bit_length() > max_den_bits:
        return float(x)
    return x


def render(x: Number, digits: int = RENDER_DIGITS) -> str:
    """Plain decimal when exact and terminating, else ``≈`` + 18 significant digits."""
    if isinstance(x, (Fraction, int)) and not isinstance(x, bool):
        try:
            return ExactDecimal.from_fraction(Fraction(x)).render()
        except ValueError:
            return INEXACT_MARK + _sig_digits(Fraction(x), digits)
    if isinstance(x, float):
        if math.isnan(x) or math.isinf(x):
            return repr(x)
        return INEXACT_MARK + _sig_digits(Fraction(x), digits)
    raise TypeError(f"cannot render {type(x).__name__}")


def _sig_digits(q: Fraction, digits: int) -> str:
    if q == 0:
        return "0"
    neg = q < 0
    q = abs(q)
    # exponent e with 10**e <= q < 10**(e+1)
    e = len(str(q.numerator)) - len(str(q.denominator))
    if Fraction(10) ** e > q:
        e -= 1
    scale = digits - 1 - e
    n = round(q * Fraction(10) ** scale)
    if n >= 10**digits:  # rounding carried into a new digit
        scale -= 1
        n = round(q * Fraction(10) ** scale)
    text = ExactDecimal.make(n, -scale).render()
    return ("-" if neg else "") + text


def compare_le(a: Number, b: Number, tol: float = 1e-12) -> bool:
    """a <= b, exactly when both sides are exact, else with a relative slack."""
    if type(a) is Fraction and type(b) is Fraction:
        # denominators are positive, so cross-multiplying keeps the order
        return a._numerator * b._denominator <= b._numerator * a._denominator
    if is_exact(a) and is_exact(b):
        return a <= b
    fa, fb = float(a), float(b)
    return fa <= fb + tol * max(1.0, abs(fa), abs(fb))


def close(a: Number, b: Number, tol: float = 1e-12) -> bool:
    if is_exact(a) and is_exact(b):
        return a == b
    fa, fb = float(a), float(b)
    return abs(fa - fb) <= tol * max(1.0, abs(fa), abs(fb))


def exact_sum(xs) -> Fraction:
    """Sum of rationals with a single normalisation at the end."""
    return ratio_sum([(x._numerator, x._denominator) for x in
                      (x if type(x) is Fraction else Fraction(x) for x in xs)])


def ratio_sum(pairs) -> Fraction:
    """Sum of p/q over integer pairs (q != 0), normalised once."""
    den = 1
    for _, q in pairs:
        den = den * q // math.gcd(den, q)
    return Fraction(sum(p * (den // q) for p, q in pairs), den)


def _less(a, b) -> bool:
    if type(a) is Fraction and type(b) is Fraction:
        return a._numerator * b._denominator < b._numerator * a._denominator
    return a < b


def tmin(t):
    """min() for tuples of rationals without Fraction's slow rich comparison."""
    best = t[0]
    for x in t:
        if _less(x, best):
            best = x
    return best


def tmax(t):
    best = t[0]
    for x in t:
        if _less(best, x):
            best = x
    return best


def as_fraction(x) -> Fraction:
    return x if type(x) is Fraction else Fraction(x)
