"""Seeded generators of exact decimal tuples inside a DomainBox.

Uniform draws alone almost never land on the places where quasi-means
misbehave (decimal lattices, the diagonal, the neighbourhood of zero), so
the sampler mixes several structured modes.  Everything is driven by one
``random.Random`` so a seed fixes the whole stream.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import Optional

from .core import DomainBox

DIGIT_CHOICES = (0, 1, 2, 3, 6)


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


class TupleSampler:
    def __init__(
        self,
        box: DomainBox,
        seed: int = 0,
        diagonal: float = 0.08,
        near_diagonal: float = 0.12,
        digits=DIGIT_CHOICES,
    ):
        self.box = box
        self.rng = random.Random(seed)
        self.p_diag = diagonal
        self.p_near = near_diagonal
        self.digits = tuple(digits)
        lo, hi = box.lower, box.upper
        self._inf = (isinstance(lo, float) and math.isinf(lo), isinstance(hi, float) and math.isinf(hi))
        self._lo = None if self._inf[0] else Fraction(lo)
        self._hi = None if self._inf[1] else Fraction(hi)

    # coordinate-level draws

    def _span(self):
        """Finite bounds for one draw; infinite ends get a heavy-tailed stand-in."""
        lo_inf, hi_inf = self._inf
        if not (lo_inf or hi_inf):
            return self._lo, self._hi
        reach = Fraction(10) ** self.rng.randint(0, 7)
        if lo_inf and hi_inf:
            return -reach, reach
        if lo_inf:
            return self._hi - reach, self._hi
        return self._lo, self._lo + reach

    def _grid_value(self, lo: Fraction, hi: Fraction, d: int) -> Optional[Fraction]:
        scale = 10**d
        k_lo = _ceil_div(lo.numerator * scale, lo.denominator)
        k_hi = (hi.numerator * scale) // hi.denominator
        if k_lo > k_hi:
            return None
        return Fraction(self.rng.randint(k_lo, k_hi), scale)

    def value(self) -> Fraction:
        for _ in range(1000):
            x = self._draw()
            if x is not None and self.box.contains_value(x):
                return x
        raise RuntimeError(f"could not sample inside {self.box.describe()}")

    def _draw(self) -> Optional[Fraction]:
        lo, hi = self._span()
        u = self.rng.random()
        if u < 0.7:
            for d in (self.rng.choice(self.digits), 3, 6, 9, 12):
                x = self._grid_value(lo, hi, d)
                if x is not None:
                    return x
            return lo
        if u < 0.85:
            # just beside a decimal lattice point
            d = self.rng.choice((0, 1, 2))
            base = self._grid_value(lo, hi, d)
            if base is None:
                return None
            # kept coarser than the finest continuity probe (1e-9)
            eps = Fraction(1, 10 ** self.rng.randint(3, 7))
            return base + eps if self.rng.random() < 0.5 else base - eps
        # log-scale towards zero or towards the lower end
        j = self.rng.randint(1, 9)
        small = Fraction(self.rng.randint(1, 9), 10**j)
        if lo <= 0 <= hi:
            return small if self.rng.random() < 0.5 or lo == 0 else -small
        return lo + small * (hi - lo)

    # tuple-level draws

    def arity(self) -> int:
        if self.box.variadic:
            return self.rng.randint(max(2, self.box.arity), max(2, self.box.arity, self.box.max_arity))
        return self.box.arity

    def tuple(self, n: Optional[int] = None) -> tuple:
        n = n or self.arity()
        u = self.rng.random()
        if u < self.p_diag:
            return (self.value(),) * n
        if u < self.p_diag + self.p_near:
            return self.near_diagonal(n)
        return tuple(self.value() for _ in range(n))

    def near_diagonal(self, n: Optional[int] = None) -> tuple:
        """A base point plus spreads between 1e-1 and 1e-9 (log-uniform)."""
        n = n or self.arity()
        base = self.value()
        out = [base]
        for _ in range(n - 1):
            for _ in range(50):
                j = self.rng.randint(1, 9)
                step = Fraction(self.rng.randint(1, 9), 10**j)
                x = base + step if self.rng.random() < 0.5 else base - step
                if self.box.contains_value(x):
                    out.append(x)
                    break
            else:
                out.append(base)
        self.rng.shuffle(out)
        return tuple(out)

    def ordered_pair(self) -> tuple:
        a, b = self.value(), self.value()
        return (a, b) if a <= b else (b, a)


_STREAMS: dict = {}


def _shared(box: DomainBox, seed: int, count: int, near_diagonal: float) -> list:
    key = (box, seed, near_diagonal)
    if key not in _STREAMS:
        if len(_STREAMS) > 64:
            _STREAMS.clear()
        _STREAMS[key] = (TupleSampler(box, seed=seed, near_diagonal=near_diagonal), [])
    sampler, tuples = _STREAMS[key]
    while len(tuples) < count:
        tuples.append(sampler.tuple())
    return tuples


def sample_tuples(box: DomainBox, seed: int, count: int, near_diagonal: float = 0.12) -> list:
    """The first ``count`` tuples of the seeded stream, shared between callers."""
    return _shared(box, seed, count, near_diagonal)[:count]


def sample_tuple(box: DomainBox, seed: int, index: int, near_diagonal: float = 0.12) -> tuple:
    """Tuple number ``index`` of the same shared stream."""
    return _shared(box, seed, index + 1, near_diagonal)[index]
