"""How far a quasi-mean strays from the min/max envelope.

Three distances are estimated:

* ``mdist``  -- sup of (K - max)+ plus sup of (min - K)+,
* ``mdistp`` -- the same with each defect divided by max - min,
* ``mdista`` -- the volume fraction of a box where K leaves the envelope.

Suprema can only be bounded from below by sampling, so the estimators
return the best witness found and flag runs whose running sup passes
``DIVERGENCE``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .core import DomainBox, MeanFunction
from .errors import DomainError, EmptyDomain
from .exact import Number, is_exact, render, tmax, tmin, to_exact
from .sampling import sample_tuples

DIVERGENCE = 1e6
GOLDEN = (math.sqrt(5) - 1) / 2
CLIMB_STEPS = 64
Z95 = 1.96


def tuple_json(t) -> list:
    return [render(x) for x in t]


def number_json(x) -> dict:
    return {"text": render(x), "float": float(x)}


@dataclass
class SupEstimate:
    measure: str
    lower_bound: Number
    witness: Optional[tuple]
    budget: int
    seed: int
    diverging: bool
    # per-part best values, e.g. {"upper": (value, witness), "lower": (value, witness)}
    parts: dict = field(default_factory=dict)
    rejected: int = 0

    def to_json(self) -> dict:
        out = {
            "measure": self.measure,
            "value": number_json(self.lower_bound),
            "witness": None if self.witness is None else tuple_json(self.witness),
            "samples": self.budget,
            "seed": self.seed,
            "diverging": self.diverging,
            "rejected": self.rejected,
            "parts": {
                name: {"value": number_json(v), "witness": None if w is None else tuple_json(w)}
                for name, (v, w) in sorted(self.parts.items())
            },
        }
        return out


@dataclass
class MeasureEstimate:
    measure: str
    value: float
    half_width: float
    samples: int
    seed: int
    above: int = 0
    below: int = 0
    rejected: int = 0

    def to_json(self) -> dict:
        return {
            "measure": self.measure,
            "value": self.value,
            "half_width": self.half_width,
            "samples": self.samples,
            "seed": self.seed,
            "above": self.above,
            "below": self.below,
            "rejected": self.rejected,
            "diverging": False,
        }


# --- defect scores -------------------------------------------------------------

def _sub(a, b):
    if is_exact(a) and is_exact(b):
        return a - b
    return float(a) - float(b)


def _div(a, b):
    if is_exact(a) and is_exact(b):
        return Fraction(a) / b
    return float(a) / float(b)


def _pos(x):
    if type(x) is Fraction:
        return x if x._numerator > 0 else Fraction(0)
    return x if x > 0 else (Fraction(0) if is_exact(x) else 0.0)


def upper_defect(t, v):
    """(v - max t)+"""
    return _pos(_sub(v, tmax(t)))


def lower_defect(t, v):
    """(min t - v)+"""
    return _pos(_sub(tmin(t), v))


def _scores_mdist(t, v):
    return {"upper": upper_defect(t, v), "lower": lower_defect(t, v)}


def _scores_mdistp(t, v):
    spread = _sub(tmax(t), tmin(t))
    if spread == 0:
        return None
    return {"upper": _div(upper_defect(t, v), spread), "lower": _div(lower_defect(t, v), spread)}


def _scores_a_quasi(t, v):
    return {"envelope": max(upper_defect(t, v), lower_defect(t, v))}


def _scores_m_quasi(t, v):
    scale = max(abs(x) for x in t)
    if scale == 0:
        return None
    return {"envelope": _div(max(upper_defect(t, v), lower_defect(t, v)), scale)}


# --- search ------------------------------------------------------------------------

class _Search:
    """Running per-part suprema with replayable witnesses."""

    def __init__(self, K: MeanFunction, box: DomainBox, scores: Callable):
        self.K = K
        self.box = box
        self.scores = scores
        self.best: dict = {}
        self.rejected = 0
        self.evaluated = 0

    def score(self, t) -> Optional[dict]:
        try:
            t = self.K.coerce(t)
            if not self.box.contains(t):
                return None
            v = self.K(t)
        except (DomainError, ZeroDivisionError, OverflowError, ValueError):
            return None
        if isinstance(v, float) and not math.isfinite(v):
            return None
        self.evaluated += 1
        return self.scores(t, v)

    def score_value(self, t, v) -> Optional[dict]:
        """Score a tuple whose value is already known (None when outside the domain)."""
        if v is None or not self.box.contains(t):
            return None
        if isinstance(v, float) and not math.isfinite(v):
            return None
        self.evaluated += 1
        return self.scores(t, v)

    def offer(self, t, scores=None) -> list:
        """Record t; returns the parts it improved."""
        s = self.score(t) if scores is None else scores
        if s is None:
            self.rejected += 1
            return []
        improved = []
        for name, value in s.items():
            cur = self.best.get(name)
            if cur is None or value > cur[0]:
                self.best[name] = (value, self.K.coerce(t))
                improved.append(name)
        return improved

    def probe(self, name, t):
        """Score t, keep it if it is a record, and return the value of one part."""
        s = self.score(t)
        self.offer(t, s)
        return None if s is None else s[name]

    def total(self):
        return sum((v for v, _ in self.best.values()), Fraction(0)) if self.best else Fraction(0)


def _clip(box: DomainBox, x: float) -> float:
    lo, hi = box.lower, box.upper
    if not (isinstance(lo, float) and math.isinf(lo)):
        x = max(x, float(lo))
    if not (isinstance(hi, float) and math.isinf(hi)):
        x = min(x, float(hi))
    return x


def _golden_max(f: Callable[[float], Optional[object]], lo: float, hi: float, steps: int):
    """Golden-section search for a max of f on [lo, hi]; f records its own evaluations."""

    def g(x):
        v = f(x)
        return -math.inf if v is None else float(v)

    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = g(c), g(d)
    for _ in range(steps):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = g(d)


def _refine(search: _Search, name: str, steps: int = CLIMB_STEPS):
    """Coordinate-wise golden-section climb around the best witness of one part."""
    value, t = search.best[name]
    if float(value) > DIVERGENCE:
        return
    box = search.box
    for radius_scale in (1e-1, 1e-3, 1e-5):
        _, t = search.best[name]
        n = len(t)
        # each coordinate alone, then all coordinates shifted together
        for axis in list(range(n)) + [None]:
            _, t = search.best[name]
            base = [float(x) for x in t]
            center = base[axis] if axis is not None else max(base)
            r = radius_scale * max(1.0, abs(center))

            def moved(x, axis=axis, base=base, center=center):
                if axis is None:
                    shift = x - center
                    return tuple(to_exact(_clip(box, b + shift)) for b in base)
                p = list(base)
                p[axis] = _clip(box, x)
                return tuple(to_exact(c) for c in p)

            def f(x, moved=moved):
                return search.probe(name, moved(x))

            _golden_max(f, center - r, center + r, steps)


def _sup(measure, K, box, budget, seed, scores, near_diagonal=0.12, refine=True, probes=(),
         evaluated=None) -> SupEstimate:
    if budget < 1:
        raise ValueError("budget must be positive")
    search = _Search(K, box, scores)
    queue = [tuple(p) for p in probes if K.accepts_arity(len(p))]
    # ``evaluated`` lets a caller supply (t, K(t)) pairs it has already computed
    stream = iter(evaluated if evaluated is not None else sample_tuples(box, seed, budget, near_diagonal))
    for _ in range(budget):
        if queue:
            improved = search.offer(queue.pop(0))
        else:
            item = next(stream, None)
            if item is None:
                break
            if evaluated is None:
                improved = search.offer(item)
            else:
                t, v = item
                improved = search.offer(t, search.score_value(t, v))
        if refine:
            for name in improved:
                _refine(search, name)
        if search.best and float(search.total()) > DIVERGENCE:
            break
    if not search.best:
        raise EmptyDomain(f"no sampled tuple of {box.describe()} lies in the domain of {K.id}")
    total = search.total()
    top = max(search.best.items(), key=lambda kv: kv[1][0])
    witness = top[1][1] if top[1][0] > 0 else None
    return SupEstimate(
        measure=measure,
        lower_bound=total,
        witness=witness,
        budget=budget,
        seed=seed,
        diverging=float(total) > DIVERGENCE,
        parts=dict(search.best),
        rejected=search.rejected,
    )


def mdist(K: MeanFunction, box: DomainBox, budget: int = 10_000, seed: int = 0, refine: bool = True,
          probes=()) -> SupEstimate:
    """sup (K - max)+ + sup (min - K)+ over the box."""
    return _sup("mdist", K, box, budget, seed, _scores_mdist, refine=refine, probes=probes)


def mdistp(K: MeanFunction, box: DomainBox, budget: int = 10_000, seed: int = 0, refine: bool = True,
           probes=()) -> SupEstimate:
    """Like mdist with defects divided by max - min; near-diagonal tuples are drawn often."""
    return _sup("mdistp", K, box, budget, seed, _scores_mdistp, near_diagonal=0.4, refine=refine, probes=probes)


def a_quasi_constant(K: MeanFunction, box: DomainBox, budget: int = 10_000, seed: int = 0,
                     refine: bool = True, probes=(), evaluated=None) -> SupEstimate:
    """Smallest witnessed c with min - c <= K <= max + c."""
    return _sup("a-quasi", K, box, budget, seed, _scores_a_quasi, refine=refine, probes=probes, evaluated=evaluated)


def m_quasi_constant(K: MeanFunction, box: DomainBox, budget: int = 10_000, seed: int = 0,
                     refine: bool = True, probes=(), evaluated=None) -> SupEstimate:
    """Smallest witnessed c with min - c*max|a_i| <= K <= max + c*max|a_i|."""
    return _sup("m-quasi", K, box, budget, seed, _scores_m_quasi, near_diagonal=0.25, refine=refine, probes=probes,
                evaluated=evaluated)


# --- volume of the violation set ---------------------------------------------------------

def mdista(K: MeanFunction, box: DomainBox, samples: int = 1_000_000, seed: int = 0,
           chunk: int = 1 << 17) -> MeasureEstimate:
    """Monte Carlo share of the box where K > max plus the share where K < min.

    The two sets are disjoint, so the sum is itself a proportion and the
    95% half-width comes from the binomial normal approximation.
    """
    lo, hi = box.lower, box.upper
    if any(isinstance(x, float) and math.isinf(x) for x in (lo, hi)):
        raise ValueError("mdista needs a finite box")
    n = box.arity
    rng = np.random.Generator(np.random.PCG64(seed))
    above = below = rejected = 0
    done = 0
    flo, fhi = float(lo), float(hi)
    while done < samples:
        c = min(chunk, samples - done)
        x = rng.uniform(flo, fhi, size=(c, n))
        mx, mn = x.max(axis=1), x.min(axis=1)
        if K.batch is not None:
            v = np.asarray(K.batch(x), dtype=float)
            ok = np.isfinite(v)
            rejected += int((~ok).sum())
        else:
            v = np.empty(c)
            ok = np.ones(c, dtype=bool)
            for i, row in enumerate(x.tolist()):
                try:
                    v[i] = float(K(row))
                except DomainError:
                    ok[i] = False
            rejected += int((~ok).sum())
        above += int(((v > mx) & ok).sum())
        below += int(((v < mn) & ok).sum())
        done += c
    p = (above + below) / samples
    return MeasureEstimate("mdista", p, Z95 * math.sqrt(p * (1 - p) / samples), samples, seed, above, below, rejected)


def mdista_exact_floor(m: int, n: int = 2, box=(1, 2)) -> Fraction:
    """Exact violation share of the floor mean (and of the ceiling mean) on a lattice-aligned square.

    With C lattice cells of width 10**-m per side, the floor mean drops below
    the minimum on every same-cell pair and on half of every adjacent-cell
    pair; cells two or more apart never violate.  That leaves (2C - 1)/C**2.
    """
    if n != 2:
        raise ValueError("only the two-variable case has a closed form here")
    lo, hi = (Fraction(b) for b in box)
    scale = Fraction(10) ** m
    cells = (hi - lo) * scale
    if cells.denominator != 1 or (lo * scale).denominator != 1 or cells <= 0:
        raise ValueError("box ends must lie on the 10**-m lattice")
    c = cells.numerator
    return Fraction(2 * c - 1, c * c)

