"""Iterating two-variable quasi-means: compounding, closures, 2 -> 3 extension.

Every procedure returns an ``IterationTrace``.  Row 0 is the starting point
and row k the state after k steps, so a trace that ends ``constant-after N``
has rows N and N+1 identical.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .core import LEFT, MEAN, RIGHT, MeanFunction
from .errors import ArityError, ContractViolation, Diverged
from .exact import ExactDecimal, Number, compare_le, is_exact, render, tame, tmax, tmin, to_exact

CONVERGED = "converged"
CONSTANT_AFTER = "constant-after"
DIVERGED = "diverged"
EXHAUSTED = "budget-exhausted"

TOL = 1e-12
MAX_STEPS = 10_000
FLOOR = -1e9


def _cell(x) -> str:
    # terminating decimals stay exact, everything else is a plain float
    if is_exact(x):
        try:
            return ExactDecimal.from_fraction(Fraction(x)).render()
        except ValueError:
            pass
    return repr(float(x))


@dataclass
class IterationTrace:
    rows: list
    verdict: str
    limit: Optional[Number]
    tolerance: float
    max_steps: int
    columns: tuple = ("a", "b")
    # N for constant-after, the step count otherwise
    steps: int = 0
    procedure: str = ""
    notes: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.verdict in (CONVERGED, CONSTANT_AFTER)

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(("step",) + self.columns)
        for i, row in enumerate(self.rows):
            w.writerow([i] + [_cell(x) for x in row])
        return out.getvalue()

    def to_json(self) -> dict:
        return {
            "procedure": self.procedure,
            "verdict": self.verdict,
            "limit": None if self.limit is None else {"text": render(self.limit), "float": float(self.limit)},
            "steps": self.steps,
            "tolerance": self.tolerance,
            "max_steps": self.max_steps,
            "columns": list(self.columns),
            "rows": [[render(x) for x in row] for row in self.rows],
            "notes": dict(self.notes),
        }


def _within(x, y, tol) -> bool:
    # a tolerance test even for rationals; exact equality is checked separately
    fx, fy = float(x), float(y)
    return abs(fx - fy) <= tol * max(1.0, abs(fx), abs(fy))


def _near(r, s, tol) -> bool:
    return all(_within(x, y, tol) for x, y in zip(r, s))


def _spread_ok(row, tol) -> bool:
    return _within(tmin(row), tmax(row), tol)


def _run(procedure, columns, start, step, tol, max_steps, joint=True, floor=None) -> IterationTrace:
    """Iterate ``step`` from ``start``.

    ``joint`` asks for every coordinate to meet a common limit; otherwise only
    the first coordinate has to settle.
    """
    rows = [start]

    def done(verdict, limit, steps):
        return IterationTrace(rows, verdict, limit, tol, max_steps, columns, steps, procedure)

    for n in range(max_steps):
        cur = rows[-1]
        nxt = tuple(tame(x) for x in step(cur))
        if any(isinstance(x, float) for x in nxt):
            # a half-rounded row would be compared exactly against rounding error
            nxt = tuple(float(x) for x in nxt)
        rows.append(nxt)
        if nxt == cur and all(is_exact(x) for x in nxt):
            return done(CONSTANT_AFTER, nxt[0], n)
        if floor is not None and compare_le(tmin(nxt), floor, 0.0) and tmin(nxt) != floor:
            return done(DIVERGED, None, n + 1)
        if _near(cur, nxt, tol) and (not joint or _spread_ok(nxt, tol)):
            return done(CONVERGED, nxt[0], n + 1)
    return done(EXHAUSTED, None, max_steps)


def _two(K: MeanFunction, a, b):
    return K((a, b))


# --- composition -----------------------------------------------------------------

def _side(kinds) -> str:
    sides = {k for k in kinds if k != MEAN}
    if not sides <= {LEFT, RIGHT}:
        raise ContractViolation("only left-means, right-means and means compose: " + ", ".join(sorted(sides)))
    if len(sides) > 1:
        raise ContractViolation("cannot compose a left-mean with a right-mean")
    return sides.pop() if sides else MEAN


def compose(K0: MeanFunction, Ks: Sequence[MeanFunction]) -> MeanFunction:
    """t -> K0(K1(t), ..., Kn(t)), which keeps the side the parts share."""
    Ks = tuple(Ks)
    n = len(Ks)
    if n < 1:
        raise ArityError("compose needs at least one inner function")
    for K in (K0,) + Ks:
        if not K.accepts_arity(n):
            raise ArityError(f"{K.id} does not take {n} arguments")
    kind = _side([K0.kind] + [K.kind for K in Ks])

    def inner(t):
        return tuple(K(t) for K in Ks)

    def func(t):
        return K0(inner(t))

    def domain(t):
        if not all(K.in_domain(t) for K in Ks):
            return False
        return K0.in_domain(inner(t))

    name = f"compose({K0.id}; " + ", ".join(K.id for K in Ks) + ")"
    return MeanFunction(name, func, arity=n, domain=domain, exact=K0.exact and all(K.exact for K in Ks), kind=kind)


# --- compounding -------------------------------------------------------------------

def compound(K: MeanFunction, M: MeanFunction, a, b, tol: float = TOL, max_steps: int = MAX_STEPS) -> IterationTrace:
    """a' = K(a, b), b' = M(a, b) until both sides meet; the limit is N(a, b).

    K <= M is checked at every step of the trace, and b may never grow.
    """
    a, b = to_exact(a), to_exact(b)
    if not compare_le(a, b):
        raise ContractViolation(f"compound needs a <= b, got {render(a)} > {render(b)}")

    def step(row):
        x, y = row
        nx, ny = _two(K, x, y), _two(M, x, y)
        if not compare_le(nx, ny):
            raise ContractViolation(f"{K.id}({render(x)}, {render(y)}) = {render(nx)} exceeds "
                                    f"{M.id}({render(x)}, {render(y)}) = {render(ny)}")
        if not compare_le(ny, y):
            raise Diverged(f"b grew from {render(y)} to {render(ny)}")
        return (nx, ny)

    return _run("compound", ("a", "b"), (a, b), step, tol, max_steps)


# --- right-idempotent closure -------------------------------------------------------

def iterated(K: MeanFunction, n: int, a, b) -> Number:
    """K^(n)(a, b) with K^(0) = K and K^(k+1)(a, b) = K(K^(k)(a, b), b)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    x = _two(K, a, b)
    for _ in range(n):
        x = _two(K, x, b)
    return x


def idempotent_closure(K: MeanFunction, a, b, tol: float = TOL, max_steps: int = MAX_STEPS) -> IterationTrace:
    """Limit of K^(n)(a, b); row k holds (K^(k-1)(a, b), b).

    A settled limit y must satisfy K(y, b) = y, which is checked afterwards.
    """
    a, b = to_exact(a), to_exact(b)
    trace = _run("closure", ("a", "b"), (a, b), lambda row: (_two(K, row[0], b), b), tol, max_steps, joint=False)
    if trace.converged:
        y = trace.limit
        fy = _two(K, y, b)
        trace.notes["fixed_point"] = render(fy)
        if not (fy == y or _within(fy, y, max(tol, 1e-9))):
            raise ContractViolation(f"K({render(y)}, {render(b)}) = {render(fy)} is not the limit itself")
    return trace


# --- three variables from two -------------------------------------------------------------

def extend3(K: MeanFunction, a, b, c, tol: float = TOL, max_steps: int = MAX_STEPS,
            floor: float = FLOOR) -> IterationTrace:
    """a' = K(a, b), b' = K(a, c), c' = K(b, c) from the sorted triple.

    The common limit is the three-variable extension.  Runs whose smallest
    coordinate drops below ``floor`` end as diverged.
    """
    a, b, c = sorted(to_exact(x) for x in (a, b, c))

    def step(row):
        x, y, z = row
        nxt = (_two(K, x, y), _two(K, x, z), _two(K, y, z))
        if not (compare_le(nxt[0], nxt[1]) and compare_le(nxt[1], nxt[2])):
            raise ContractViolation("iterates left the order a <= b <= c: " + ", ".join(render(v) for v in nxt))
        if not compare_le(nxt[2], z):
            raise ContractViolation(f"c grew from {render(z)} to {render(nxt[2])}")
        return nxt

    return _run("extend3", ("a", "b", "c"), (a, b, c), step, tol, max_steps, floor=floor)


# --- Bessel onset ----------------------------------------------------------------------

def bessel_onset(seq: Sequence, assume_divergent: bool = True) -> Optional[int]:
    """Smallest N with min <= (a_1 + ... + a_N)/(N - 1) <= max over the first N terms.

    Once reached this persists for a divergent positive sequence, which
    ``assume_divergent`` takes on trust.  Without it, N must also hold for
    every longer prefix of the data.  None when no prefix qualifies.
    """
    xs = [to_exact(x) for x in seq]
    if any(x <= 0 for x in xs):
        raise ValueError("bessel_onset needs positive terms")
    found = None
    total = xs[0] if xs else Fraction(0)
    lo = hi = total
    for n in range(2, len(xs) + 1):
        x = xs[n - 1]
        total += x
        lo, hi = min(lo, x), max(hi, x)
        v = total / (n - 1)
        if lo <= v <= hi:
            if found is None:
                found = n
                if assume_divergent:
                    return found
        else:
            found = None
    return found
