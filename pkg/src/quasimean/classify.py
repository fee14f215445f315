"""Sampling-based falsifiers for the structural properties of quasi-means.

A check either finds a witness that violates the property (``falsified``),
finds nothing within its budget (``holds-on-sample``) or cannot run at all
(``inconclusive``).  Nothing here proves a property.  Witnesses are stored
as exact tuples so that a violation can be replayed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Optional

from . import catalog as cat
from . import measures
from .core import LEFT, MEAN, RIGHT, DomainBox, MeanFunction
from .errors import ArityError, DomainError
from .exact import close, compare_le, floor_at_scale, render, tame, tmax, tmin, to_exact
from .sampling import TupleSampler, sample_tuple, sample_tuples

HOLDS, FALSIFIED, INCONCLUSIVE = "holds-on-sample", "falsified", "inconclusive"

SCALES = tuple(Fraction(1, 10**k) for k in range(1, 10))
CONTINUITY_TOL = 1e-6
QM_TOL = 1e-12
# continuity base points are snapped to this many decimals so that the
# finest probes (1e-8, 1e-9) never straddle a decimal lattice by accident
SNAP_DIGITS = 7


@dataclass
class PropertyVerdict:
    property: str
    status: str
    witness: Optional[tuple] = None
    samples: int = 0
    seed: int = 0
    detail: str = ""

    @property
    def falsified(self) -> bool:
        return self.status == FALSIFIED

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    def to_json(self) -> dict:
        return {
            "property": self.property,
            "status": self.status,
            "witness": _witness_json(self.witness),
            "samples": self.samples,
            "seed": self.seed,
            "detail": self.detail,
        }


def _witness_json(w):
    if w is None:
        return None
    if isinstance(w, tuple) and w and isinstance(w[0], tuple):
        return [_witness_json(x) for x in w]
    if isinstance(w, tuple):
        return [render(x) for x in w]
    return render(w)


def _show(t) -> str:
    return "(" + ", ".join(render(x) for x in t) + ")"


def _eval(K: MeanFunction, t):
    try:
        v = K(t)
    except (DomainError, ZeroDivisionError, OverflowError):
        return None
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _fit(K: MeanFunction, box: DomainBox) -> DomainBox:
    """Make the box's arity agree with what K accepts."""
    if K.variadic:
        if box.variadic:
            return box if box.arity >= K.arity else box.with_arity(K.arity, True)
        if not K.accepts_arity(box.arity):
            raise ArityError(f"{K.id} does not take {box.arity} arguments")
        return box
    if box.variadic or box.arity != K.arity:
        return box.with_arity(K.arity, False)
    return box


_EVALUATED: dict = {}


def _evaluated(K, box, count, seed) -> list:
    """(t, K(t)) over the shared seeded stream; K(t) is None outside the domain.

    Cached per function object so the envelope checks of one run share a single pass.
    """
    key = (id(K), box, seed)
    hit = _EVALUATED.get(key)
    if hit is None or hit[0] is not K:
        if len(_EVALUATED) > 8:
            _EVALUATED.clear()
        hit = _EVALUATED[key] = (K, [])
    done = hit[1]
    if len(done) < count:
        for t in sample_tuples(box, seed, count)[len(done):]:
            t = K.coerce(t)
            done.append((t, _eval(K, t)))
    return done[:count]


def _stream(K, box, budget, seed, probes=()) -> Iterable[tuple]:
    """(t, K(t)) for probe tuples first, then the shared stream; at most ``budget`` in total."""
    count = 0
    for p in probes:
        if count >= budget:
            return
        t = K.coerce(p)
        if K.accepts_arity(len(t)):
            count += 1
            yield t, _eval(K, t)
    yield from _evaluated(K, box, budget - count, seed)


def _degenerate(prop, box, seed) -> Optional[PropertyVerdict]:
    if box.degenerate:
        return PropertyVerdict(prop, INCONCLUSIVE, seed=seed, detail="degenerate box has no non-constant tuples")
    return None


def _sided(K: MeanFunction, side: Optional[str]) -> Optional[str]:
    if side is not None:
        return side
    return {LEFT: "left", RIGHT: "right", MEAN: "both"}.get(K.kind)


# --- envelope checks ------------------------------------------------------------

def _envelope_check(prop, K, box, budget, seed, probes, test):
    box = _fit(K, box)
    if (v := _degenerate(prop, box, seed)) is not None:
        return v
    used = 0
    for t, v in _stream(K, box, budget, seed, probes):
        if v is None:
            continue
        used += 1
        msg = test(t, v)
        if msg:
            return PropertyVerdict(prop, FALSIFIED, t, used, seed, f"K{_show(t)} = {render(v)}: {msg}")
    if used == 0:
        return PropertyVerdict(prop, INCONCLUSIVE, None, 0, seed, "no sampled tuple was in the domain")
    return PropertyVerdict(prop, HOLDS, None, used, seed)


def check_left_mean(K, box, budget=10_000, seed=0, probes=()) -> PropertyVerdict:
    """Search for min(t) > K(t)."""
    return _envelope_check(cat.LEFT_MEAN, K, box, budget, seed, probes,
                           lambda t, v: None if compare_le(tmin(t), v) else "below the minimum")


def check_right_mean(K, box, budget=10_000, seed=0, probes=()) -> PropertyVerdict:
    """Search for K(t) > max(t)."""
    return _envelope_check(cat.RIGHT_MEAN, K, box, budget, seed, probes,
                           lambda t, v: None if compare_le(v, tmax(t)) else "above the maximum")


def check_mean(K, box, budget=10_000, seed=0, probes=()) -> PropertyVerdict:
    left = check_left_mean(K, box, budget, seed, probes)
    if left.falsified:
        return PropertyVerdict(cat.IS_MEAN, FALSIFIED, left.witness, left.samples, seed, left.detail)
    right = check_right_mean(K, box, budget, seed, probes)
    if right.falsified:
        return PropertyVerdict(cat.IS_MEAN, FALSIFIED, right.witness, right.samples, seed, right.detail)
    if left.status == INCONCLUSIVE or right.status == INCONCLUSIVE:
        return PropertyVerdict(cat.IS_MEAN, INCONCLUSIVE, None, 0, seed, left.detail or right.detail)
    return PropertyVerdict(cat.IS_MEAN, HOLDS, None, left.samples, seed)


def check_strict(K, box, budget=10_000, seed=0, probes=(), side=None) -> PropertyVerdict:
    """On non-constant tuples: K < max (right), K > min (left), or both."""
    side = _sided(K, side)
    if side is None:
        return PropertyVerdict(cat.STRICT, INCONCLUSIVE, seed=seed, detail=f"strictness is undefined for class {K.kind}")

    def test(t, v):
        if tmin(t) == tmax(t):
            return None
        if side in ("right", "both") and compare_le(tmax(t), v):
            return "not strictly below the maximum"
        if side in ("left", "both") and compare_le(v, tmin(t)):
            return "not strictly above the minimum"
        return None

    return _envelope_check(cat.STRICT, K, box, budget, seed, probes, test)


def check_strong(K, box, budget=10_000, seed=0, probes=(), side=None) -> PropertyVerdict:
    """Right version: K <= min everywhere; left version: K >= max."""
    side = _sided(K, side)
    side = "left" if side == "left" else "right"

    def test(t, v):
        if side == "right" and not compare_le(v, tmin(t)):
            return "above the minimum"
        if side == "left" and not compare_le(tmax(t), v):
            return "below the maximum"
        return None

    return _envelope_check(cat.STRONG, K, box, budget, seed, probes, test)


# --- order and symmetry ---------------------------------------------------------------

def _pair_check(prop, K, box, budget, seed, probes, make_pair, test):
    box = _fit(K, box)
    if (v := _degenerate(prop, box, seed)) is not None:
        return v
    rng = random.Random(seed)
    # partners draw from a separate pool so the base tuples match the other checks
    pool = [x for t in sample_tuples(box, seed + 1, 1000) for x in K.coerce(t)]
    pairs = [tuple(K.coerce(x) for x in p) for p in probes]
    # every pair costs two evaluations of K
    rounds = max(1, budget // 2)
    base = iter(_evaluated(K, box, max(0, rounds - len(pairs)), seed))
    used = 0
    tries = 0
    while tries < rounds:
        tries += 1
        if pairs:
            s, t = pairs.pop(0)
            vs, vt = _eval(K, s), _eval(K, t)
        else:
            s, vs = next(base)
            t = make_pair(s, pool, rng, box)
            if t is None or vs is None:
                continue
            t = K.coerce(t)
            vt = _eval(K, t)
        if vs is None or vt is None:
            continue
        used += 1
        msg = test(s, t, vs, vt)
        if msg:
            return PropertyVerdict(prop, FALSIFIED, (s, t), used, seed,
                                   f"K{_show(s)} = {render(vs)}, K{_show(t)} = {render(vt)}: {msg}")
    if used == 0:
        return PropertyVerdict(prop, INCONCLUSIVE, None, 0, seed, "no sampled pair was in the domain")
    return PropertyVerdict(prop, HOLDS, None, used, seed)


_STEPS = tuple(Fraction(k, 10**j) for j in range(1, 10) for k in range(1, 10))


def _raise_some(s, pool, rng, box):
    out = []
    for x in s:
        u = rng.random()
        if u < 1 / 3:
            out.append(x)
        elif u < 2 / 3:
            y = rng.choice(pool)
            out.append(y if compare_le(x, y) else x)
        else:
            y = x + rng.choice(_STEPS)
            out.append(y if box.contains_value(y) else x)
    return tuple(out)


def check_monotone(K, box, budget=10_000, seed=0, probes=()) -> PropertyVerdict:
    """Search for s <= t coordinate-wise with K(s) > K(t)."""
    return _pair_check(cat.MONOTONE, K, box, budget, seed, probes, _raise_some,
                       lambda s, t, vs, vt: None if compare_le(vs, vt) else "order not preserved")


def _permute(s, pool, rng, box):
    if len(set(s)) < 2:
        return None
    idx = list(range(len(s)))
    while idx == sorted(idx):
        rng.shuffle(idx)
    return tuple(s[i] for i in idx)


def check_symmetric(K, box, budget=10_000, seed=0, probes=()) -> PropertyVerdict:
    return _pair_check(cat.SYMMETRIC, K, box, budget, seed, probes, _permute,
                       lambda s, t, vs, vt: None if close(vs, vt) else "value changes under permutation")


# --- diagonal checks --------------------------------------------------------------------

def _diagonals(K, box, budget, seed, probes):
    box = _fit(K, box)
    count = 0
    for p in probes:
        t = K.coerce(p)
        if len(set(t)) == 1 and K.accepts_arity(len(t)):
            count += 1
            yield t
    # the diagonal through the first coordinate of each shared sample
    for s in sample_tuples(box, seed, max(0, budget - count)):
        yield K.coerce((s[0],) * len(s))


def check_reflexive(K, box, budget=10_000, seed=0, probes=()) -> PropertyVerdict:
    box = _fit(K, box)
    used = 0
    for t in _diagonals(K, box, budget, seed, probes):
        v = _eval(K, t)
        if v is None:
            continue
        used += 1
        if not close(v, t[0]):
            return PropertyVerdict(cat.REFLEXIVE, FALSIFIED, t, used, seed, f"K{_show(t)} = {render(v)}")
    if used == 0:
        return PropertyVerdict(cat.REFLEXIVE, INCONCLUSIVE, None, 0, seed, "no diagonal point in the domain")
    return PropertyVerdict(cat.REFLEXIVE, HOLDS, None, used, seed)


def check_semi_reflexive(K, box, budget=10_000, seed=0, probes=()) -> PropertyVerdict:
    """b = K(a,...,a) must satisfy K(b,...,b) = b."""
    box = _fit(K, box)
    used = 0
    for t in _diagonals(K, box, budget, seed, probes):
        b = _eval(K, t)
        if b is None:
            continue
        diag = K.coerce((b,) * len(t))
        c = _eval(K, diag)
        if c is None:
            continue
        used += 1
        if not close(c, b):
            return PropertyVerdict(cat.SEMI_REFLEXIVE, FALSIFIED, t, used, seed,
                                   f"K{_show(t)} = {render(b)} but K at ({render(b)}, ...) = {render(c)}")
    if used == 0:
        return PropertyVerdict(cat.SEMI_REFLEXIVE, INCONCLUSIVE, None, 0, seed, "no diagonal point in the domain")
    return PropertyVerdict(cat.SEMI_REFLEXIVE, HOLDS, None, used, seed)


# --- continuity -------------------------------------------------------------------------

def _directions(n: int, side: str, rng: random.Random) -> list:
    half = Fraction(1, 2)

    def rand_vec(sign=None):
        out = []
        for _ in range(n):
            c = Fraction(rng.randint(25, 75), 100)
            s = sign if sign is not None else rng.choice((-1, 1))
            out.append(s * c)
        return tuple(out)

    dirs = []
    signs = {"left": (-1,), "right": (1,), "full": (-1, 1)}[side]
    for s in signs:
        dirs.append((s * half,) * n)
        for i in range(n):
            dirs.append(tuple(s * half if j == i else Fraction(0) for j in range(n)))
        dirs.append(rand_vec(s))
    if side == "full":
        dirs.append(rand_vec())
        dirs.append(rand_vec())
    return dirs


def _jump(v1, v2, target) -> bool:
    """Both finest probes miss the target, and the miss is not shrinking."""
    tol = CONTINUITY_TOL * max(1.0, abs(float(target)))
    m1, m2 = abs(float(v1) - float(target)), abs(float(v2) - float(target))
    return m1 > tol and m2 > tol and m2 > 0.5 * m1


_SIDE_PROP = {"full": cat.CONTINUOUS, "left": cat.LEFT_CONT, "right": cat.RIGHT_CONT}


def _serves(d, sides) -> set:
    """Which of the requested continuity checks a probing direction belongs to."""
    out = {"full"} & sides
    if "left" in sides and all(c <= 0 for c in d):
        out.add("left")
    if "right" in sides and all(c >= 0 for c in d):
        out.add("right")
    return out


def _shift(t, sc, d) -> tuple:
    """t + sc*d, with one normalisation per coordinate for rationals."""
    out = []
    for x, c in zip(t, d):
        if type(x) is Fraction and type(c) is Fraction:
            on, od = sc._numerator * c._numerator, sc._denominator * c._denominator
            out.append(Fraction(x._numerator * od + on * x._denominator, x._denominator * od))
        else:
            out.append(x + sc * c)
    return tuple(out)


def _continuity_scan(K, t, sides, scales, box, seed):
    """Probe the rays of every requested side once; returns per-side (status, witness, detail, used)."""
    base = _eval(K, t)
    if base is None:
        return {sd: (INCONCLUSIVE, t, "base point outside the domain", 0) for sd in sides}
    rng = random.Random(seed)
    if "full" in sides:
        dirs = _directions(len(t), "full", rng)
    else:
        dirs = [d for sd in ("left", "right") if sd in sides for d in _directions(len(t), sd, rng)]
    used = dict.fromkeys(sides, 1)
    usable = set()
    found = {}
    for d in dirs:
        serves = _serves(d, sides) - set(found)
        if not serves:
            continue
        values = []
        for sc in scales:
            p = K.coerce(_shift(t, sc, d))
            if box is not None and not box.contains(p):
                continue
            v = _eval(K, p)
            for sd in serves:
                used[sd] += 1
            if v is not None:
                values.append((p, v))
        if len(values) < 2:
            continue
        usable |= serves
        (_, v1), (p2, v2) = values[-2], values[-1]
        if _jump(v1, v2, base):
            for sd in serves:
                found[sd] = ((t, p2), f"K{_show(t)} = {render(base)} but K{_show(p2)} = {render(v2)}")
    out = {}
    for sd in sides:
        if sd in found:
            out[sd] = (FALSIFIED, found[sd][0], found[sd][1], used[sd])
        elif sd not in usable:
            out[sd] = (INCONCLUSIVE, t, "no ray stays inside the domain", used[sd])
        else:
            out[sd] = (HOLDS, None, "", used[sd])
    return out


def check_continuity_at(K: MeanFunction, t, side: str = "full", scales=SCALES, box: Optional[DomainBox] = None,
                        seed: int = 0) -> PropertyVerdict:
    """Probe K along one-sided rays t + s*d for shrinking s.

    Falsified when, along some ray, the values at the two finest usable
    scales both miss K(t) by more than 1e-6 and the second miss is at
    least half the first (a converging ray shrinks it tenfold).
    """
    t = K.coerce(t)
    status, witness, detail, used = _continuity_scan(K, t, {side}, sorted(scales, reverse=True), box, seed)[side]
    return PropertyVerdict(_SIDE_PROP[side], status, witness, used, seed, detail)


def _snap(box: DomainBox, t) -> Optional[tuple]:
    out = []
    for x in t:
        y = Fraction(floor_at_scale(to_exact(x), SNAP_DIGITS), 10**SNAP_DIGITS)
        if not box.contains_value(y):
            y = to_exact(x)
        out.append(y)
    return tuple(out)


def check_continuity(K, box, budget=10_000, seed=0, probes=None, sides=("full", "left", "right")) -> dict:
    """Continuity checks for several sides sharing one set of probe evaluations.

    ``probes`` maps a side to its probe points.  Each side keeps going until it
    has spent ``budget`` evaluations of its own or is falsified.
    """
    box = _fit(K, box)
    sides = set(sides)
    probes = probes or {}
    if box.degenerate:
        return {sd: _degenerate(_SIDE_PROP[sd], box, seed) for sd in sides}
    spent = dict.fromkeys(sides, 0)
    points = dict.fromkeys(sides, 0)
    done = {}
    queue = []
    for sd in ("full", "left", "right"):
        for p in probes.get(sd, ()):
            t = K.coerce(p)
            if t not in queue:
                queue.append(t)
    scales = sorted(SCALES, reverse=True)
    n = 0
    while True:
        active = {sd for sd in sides if sd not in done and spent[sd] < budget}
        if not active:
            break
        t = queue.pop(0) if queue else _snap(box, sample_tuple(box, seed, n))
        n += 1
        if not K.accepts_arity(len(t)):
            continue
        for sd, (status, witness, detail, used) in _continuity_scan(K, t, active, scales, box, seed + n).items():
            spent[sd] += max(1, used)
            points[sd] += 1
            if status == FALSIFIED:
                done[sd] = PropertyVerdict(_SIDE_PROP[sd], FALSIFIED, witness, spent[sd], seed, detail)
    for sd in sides:
        if sd not in done:
            done[sd] = PropertyVerdict(_SIDE_PROP[sd], HOLDS, None, spent[sd], seed, f"{points[sd]} base points")
    return done


def check_continuous(K, box, budget=10_000, seed=0, probes=(), side="full") -> PropertyVerdict:
    """Run check_continuity_at on probe points and sampled points until the budget is spent."""
    return check_continuity(K, box, budget, seed, {side: probes}, (side,))[side]


def check_mean_continuity_at(K: MeanFunction, a, n: int = 2, scales=SCALES, box: Optional[DomainBox] = None,
                             seed: int = 0) -> PropertyVerdict:
    """Does K(t) tend to a as t approaches (a, ..., a) from any direction?"""
    a = K.coerce((a,))[0]
    rng = random.Random(seed)
    scales = sorted(scales, reverse=True)
    used = 0
    usable = False
    for d in _directions(n, "full", rng):
        values = []
        for s in scales:
            p = K.coerce(_shift((a,) * n, s, d))
            if box is not None and not box.contains(p):
                continue
            v = _eval(K, p)
            used += 1
            if v is not None:
                values.append((p, v))
        if len(values) < 2:
            continue
        usable = True
        (_, v1), (p2, v2) = values[-2], values[-1]
        if _jump(v1, v2, a):
            return PropertyVerdict(cat.MEAN_CONT, FALSIFIED, (((a,) * n), p2), used, seed,
                                   f"K{_show(p2)} = {render(v2)} stays away from {render(a)}")
    if not usable:
        return PropertyVerdict(cat.MEAN_CONT, INCONCLUSIVE, None, used, seed, "no probe inside the domain")
    return PropertyVerdict(cat.MEAN_CONT, HOLDS, None, used, seed)


def check_mean_continuous(K, box, budget=10_000, seed=0, probes=()) -> PropertyVerdict:
    box = _fit(K, box)
    if (v := _degenerate(cat.MEAN_CONT, box, seed)) is not None:
        return v
    sampler = TupleSampler(box, seed=seed)
    queue = [K.coerce(p) for p in probes]
    spent = points = 0
    while spent < budget:
        if queue:
            t = queue.pop(0)
            a, n = t[0], len(t)
        else:
            a, n = _snap(box, (sampler.value(),))[0], sampler.arity()
        r = check_mean_continuity_at(K, a, n, box=box, seed=seed + points)
        spent += max(1, r.samples)
        points += 1
        if r.falsified:
            return PropertyVerdict(cat.MEAN_CONT, FALSIFIED, r.witness, spent, seed, r.detail)
    return PropertyVerdict(cat.MEAN_CONT, HOLDS, None, spent, seed, f"{points} diagonal points")


# --- two-variable dynamics -----------------------------------------------------------------

def _two(K: MeanFunction) -> Optional[MeanFunction]:
    if not K.accepts_arity(2):
        return None
    return K.restrict(2)


def _monotone_sequence(xs) -> bool:
    up = down = False
    for x, y in zip(xs, xs[1:]):
        d = float(y) - float(x)
        if d > QM_TOL:
            up = True
        elif d < -QM_TOL:
            down = True
    return not (up and down)


def _orbit(K2, start, other, side, box, max_iter):
    xs = [start]
    x = start
    for _ in range(max_iter):
        t = (x, other) if side == "right" else (other, x)
        v = _eval(K2, t)
        if v is None or not box.contains_value(v):
            break
        v = tame(v)
        xs.append(v)
        if v == x or abs(float(v) - float(x)) < 1e-15:
            break
        x = v
    return xs


def check_quasi_monotone(K, box, budget=10_000, seed=0, probes=(), max_iter=200, side=None) -> PropertyVerdict:
    """For a <= b the orbit a, K(a,b), K(K(a,b),b), ... must be monotone (left version iterates b)."""
    side = _sided(K, side)
    K2 = _two(K)
    if K2 is None or side is None:
        return PropertyVerdict(cat.QUASI_MONOTONE, INCONCLUSIVE, seed=seed,
                               detail="needs a two-variable left- or right-mean")
    box = _fit(K2, box)
    if (v := _degenerate(cat.QUASI_MONOTONE, box, seed)) is not None:
        return v
    sides = ("right", "left") if side == "both" else (side,)
    sampler = TupleSampler(box, seed=seed)
    queue = [tuple(sorted(K2.coerce(p))) for p in probes if len(p) == 2]
    spent = conclusive = 0
    while spent < budget:
        a, b = queue.pop(0) if queue else K2.coerce(sampler.ordered_pair())
        for sd in sides:
            xs = _orbit(K2, a, b, "right", box, max_iter) if sd == "right" else _orbit(K2, b, a, "left", box, max_iter)
            spent += len(xs)
            if len(xs) < 3:
                continue
            conclusive += 1
            if not _monotone_sequence(xs):
                shown = ", ".join(render(x) for x in xs[:6])
                return PropertyVerdict(cat.QUASI_MONOTONE, FALSIFIED, (a, b), spent, seed,
                                       f"{sd} orbit {shown}, ... is not monotone")
    if conclusive == 0:
        return PropertyVerdict(cat.QUASI_MONOTONE, INCONCLUSIVE, None, spent, seed, "every orbit was too short")
    return PropertyVerdict(cat.QUASI_MONOTONE, HOLDS, None, spent, seed, f"{conclusive} orbits")


def _grid(lo, hi, count):
    lo, hi = to_exact(lo), to_exact(hi)
    if count < 2 or lo == hi:
        return [lo]
    return [lo + (hi - lo) * Fraction(i, count - 1) for i in range(count)]


def _injective(prop, K2, fixed, xs, make):
    vals = []
    for x in xs:
        v = _eval(K2, make(x))
        if v is not None:
            vals.append((v, x))
    vals.sort(key=lambda p: float(p[0]))
    for (v1, x1), (v2, x2) in zip(vals, vals[1:]):
        if x1 != x2 and close(v1, v2):
            return PropertyVerdict(prop, FALSIFIED, (make(x1), make(x2)), len(vals), 0,
                                   f"K{_show(make(x1))} = K{_show(make(x2))} = {render(v1)}")
    if len(vals) < 2:
        return PropertyVerdict(prop, INCONCLUSIVE, None, len(vals), 0, "grid too small")
    return PropertyVerdict(prop, HOLDS, None, len(vals), 0)


def check_right_injective(K, b, grid: int = 200, lower=0) -> PropertyVerdict:
    """x -> K(x, b) on [lower, b] must be injective."""
    K2 = _two(K)
    b = K2.coerce((b,))[0]
    return _injective(cat.RIGHT_INJ, K2, b, _grid(lower, b, grid), lambda x: (x, b))


def check_left_injective(K, a, grid: int = 200, upper=1) -> PropertyVerdict:
    """x -> K(a, x) on [a, upper] must be injective."""
    K2 = _two(K)
    a = K2.coerce((a,))[0]
    return _injective(cat.LEFT_INJ, K2, a, _grid(a, upper, grid), lambda x: (a, x))


def check_injective(K, box, budget=10_000, seed=0, probes=(), side="right", grid=200) -> PropertyVerdict:
    prop = cat.RIGHT_INJ if side == "right" else cat.LEFT_INJ
    K2 = _two(K)
    if K2 is None:
        return PropertyVerdict(prop, INCONCLUSIVE, seed=seed, detail="needs a two-variable function")
    box = _fit(K2, box)
    if (v := _degenerate(prop, box, seed)) is not None:
        return v
    sampler = TupleSampler(box, seed=seed)
    queue = [K2.coerce(p)[0] for p in probes]
    spent = 0
    while spent < budget:
        c = queue.pop(0) if queue else K2.coerce((sampler.value(),))[0]
        if side == "right":
            r = check_right_injective(K2, c, grid, lower=box.lower)
        else:
            r = check_left_injective(K2, c, grid, upper=box.upper)
        spent += max(1, r.samples)
        if r.falsified:
            return PropertyVerdict(prop, FALSIFIED, r.witness, spent, seed, r.detail)
    return PropertyVerdict(prop, HOLDS, None, spent, seed)


# --- envelope constants -----------------------------------------------------------------------

def check_a_quasi(K, box, budget=10_000, seed=0, probes=()) -> PropertyVerdict:
    box = _fit(K, box)
    est = measures.a_quasi_constant(K, box, budget, seed, refine=False, probes=probes,
                                    evaluated=_evaluated(K, box, budget, seed))
    if est.diverging:
        return PropertyVerdict(cat.IS_A_QUASI, FALSIFIED, est.witness, budget, seed,
                               f"envelope defect {render(est.lower_bound)} passed the divergence threshold")
    return PropertyVerdict(cat.IS_A_QUASI, HOLDS, None, budget, seed, f"constant >= {render(est.lower_bound)}")


def check_m_quasi(K, box, budget=10_000, seed=0, probes=()) -> PropertyVerdict:
    box = _fit(K, box)
    est = measures.m_quasi_constant(K, box, budget, seed, refine=False, probes=probes,
                                    evaluated=_evaluated(K, box, budget, seed))
    if est.diverging:
        return PropertyVerdict(cat.IS_M_QUASI, FALSIFIED, est.witness, budget, seed,
                               f"relative defect {render(est.lower_bound)} passed the divergence threshold")
    return PropertyVerdict(cat.IS_M_QUASI, HOLDS, None, budget, seed, f"constant >= {render(est.lower_bound)}")


# --- fixed points of x -> K(x, b) ----------------------------------------------------------------

@dataclass
class FixedPointDecomposition:
    b: float
    lower: float
    upper: float
    # closed pieces of Z_b as (lo, hi); lo == hi for an isolated point
    fixed_points: list = field(default_factory=list)
    # complementary open gaps as (lo, hi, sign) with sign = +1 when f(x) > x
    gaps: list = field(default_factory=list)
    consistent: bool = True
    violations: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "b": self.b,
            "lower": self.lower,
            "upper": self.upper,
            "fixed_points": [[lo, hi] for lo, hi in self.fixed_points],
            "gaps": [{"lo": lo, "hi": hi, "sign": s} for lo, hi, s in self.gaps],
            "consistent": self.consistent,
            "violations": self.violations,
        }


def fixed_point_decomposition(K: MeanFunction, b, grid: int = 1000, lower=0, upper=None,
                              tol: float = 1e-12, xtol: float = 1e-10) -> FixedPointDecomposition:
    """Split [lower, upper] into the fixed set Z_b of f(x) = K(x, b) and the gaps where f(x) - x keeps a sign."""
    K2 = _two(K)
    b = float(b)
    upper = b if upper is None else float(upper)
    lower = float(lower)

    def f(x):
        return float(K2((x, b)))

    def g(x):
        return f(x) - x

    def zero(v):
        return abs(v) <= tol

    xs = [lower + (upper - lower) * i / grid for i in range(grid + 1)] if upper > lower else [lower]
    gs = [g(x) for x in xs]

    # fixed components: runs of zero grid values, plus bisected sign changes
    pieces = []
    i = 0
    while i < len(xs):
        if zero(gs[i]):
            j = i
            while j + 1 < len(xs) and zero(gs[j + 1]):
                j += 1
            pieces.append((xs[i], xs[j]))
            i = j + 1
            continue
        if i + 1 < len(xs) and not zero(gs[i + 1]) and (gs[i] > 0) != (gs[i + 1] > 0):
            lo, hi = xs[i], xs[i + 1]
            glo = gs[i]
            while hi - lo > xtol:
                mid = 0.5 * (lo + hi)
                gm = g(mid)
                if zero(gm):
                    lo = hi = mid
                    break
                if (gm > 0) == (glo > 0):
                    lo, glo = mid, gm
                else:
                    hi = mid
            root = 0.5 * (lo + hi)
            pieces.append((root, root))
        i += 1

    gaps = []
    cursor = lower
    for lo, hi in pieces:
        if lo > cursor:
            gaps.append((cursor, lo))
        cursor = max(cursor, hi)
    if cursor < upper:
        gaps.append((cursor, upper))

    tagged = []
    violations = []
    for lo, hi in gaps:
        signs = {1 if g(lo + (hi - lo) * q) > 0 else -1 for q in (0.25, 0.5, 0.75)}
        if len(signs) > 1:
            violations.append(f"sign of f(x) - x changes inside ({lo!r}, {hi!r})")
        tagged.append((lo, hi, signs.pop() if len(signs) == 1 else 0))

    # if f maps part of one gap into another, both gaps must carry the same sign
    for i, (lo, hi, s) in enumerate(tagged):
        for q in (0.1, 0.3, 0.5, 0.7, 0.9):
            y = f(lo + (hi - lo) * q)
            for j, (lo2, hi2, s2) in enumerate(tagged):
                if j != i and lo2 < y < hi2 and s2 != s:
                    violations.append(f"f maps gap {i} into gap {j} with a different sign")
    return FixedPointDecomposition(b, lower, upper, pieces, tagged, not violations, violations)


# --- the whole battery ---------------------------------------------------------------------------

def run_check(prop: str, K: MeanFunction, box: DomainBox, budget: int = 10_000, seed: int = 0,
              probes=()) -> PropertyVerdict:
    probes = tuple(probes)
    dispatch = {
        cat.LEFT_MEAN: lambda: check_left_mean(K, box, budget, seed, probes),
        cat.RIGHT_MEAN: lambda: check_right_mean(K, box, budget, seed, probes),
        cat.IS_MEAN: lambda: check_mean(K, box, budget, seed, probes),
        cat.STRICT: lambda: check_strict(K, box, budget, seed, probes),
        cat.STRONG: lambda: check_strong(K, box, budget, seed, probes),
        cat.MONOTONE: lambda: check_monotone(K, box, budget, seed, probes),
        cat.SYMMETRIC: lambda: check_symmetric(K, box, budget, seed, probes),
        cat.REFLEXIVE: lambda: check_reflexive(K, box, budget, seed, probes),
        cat.SEMI_REFLEXIVE: lambda: check_semi_reflexive(K, box, budget, seed, probes),
        cat.CONTINUOUS: lambda: check_continuous(K, box, budget, seed, probes, "full"),
        cat.LEFT_CONT: lambda: check_continuous(K, box, budget, seed, probes, "left"),
        cat.RIGHT_CONT: lambda: check_continuous(K, box, budget, seed, probes, "right"),
        cat.MEAN_CONT: lambda: check_mean_continuous(K, box, budget, seed, probes),
        cat.QUASI_MONOTONE: lambda: check_quasi_monotone(K, box, budget, seed, probes),
        cat.RIGHT_INJ: lambda: check_injective(K, box, budget, seed, probes, "right"),
        cat.LEFT_INJ: lambda: check_injective(K, box, budget, seed, probes, "left"),
        cat.IS_A_QUASI: lambda: check_a_quasi(K, box, budget, seed, probes),
        cat.IS_M_QUASI: lambda: check_m_quasi(K, box, budget, seed, probes),
    }
    if prop not in dispatch:
        raise KeyError(f"unknown property {prop!r}")
    return dispatch[prop]()


@dataclass
class ClassificationReport:
    id: str
    declared_class: str
    box: DomainBox
    budget: int
    seed: int
    verdicts: dict
    matrix: list
    contested: list

    @property
    def declared_falsified(self) -> list:
        return [row["property"] for row in self.matrix if row["expected"] == HOLDS and row["status"] == FALSIFIED]

    @property
    def ok(self) -> bool:
        return all(row["agrees"] for row in self.matrix)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "declared_class": self.declared_class,
            "box": self.box.to_json(),
            "budget": self.budget,
            "seed": self.seed,
            "verdicts": [self.verdicts[k].to_json() for k in sorted(self.verdicts)],
            "matrix": self.matrix,
            "contested": self.contested,
            "declared_falsified": self.declared_falsified,
            "ok": self.ok,
        }


def _key(t) -> tuple:
    # hashing a Fraction costs a modular inverse; integer pairs are cheap
    return tuple((x._numerator, x._denominator) if type(x) is Fraction else x for x in t)


def memoized(K: MeanFunction, limit: int = 500_000) -> MeanFunction:
    """K with its values and domain tests cached by tuple."""
    values: dict = {}
    inside: dict = {}
    # __call__ tests the domain and then evaluates the same tuple; reuse its key
    last = [None, None]

    def key(t):
        if t is not last[0]:
            last[0], last[1] = t, _key(t)
        return last[1]

    def func(t):
        k = key(t)
        if k not in values:
            if len(values) > limit:
                values.clear()
            values[k] = K.func(t)
        return values[k]

    def domain(t):
        k = key(t)
        if k not in inside:
            if len(inside) > limit:
                inside.clear()
            inside[k] = K.domain(t)
        return inside[k]

    return replace(K, func=func, domain=None if K.domain is None else domain)


def classify(ident: str, box: Optional[DomainBox] = None, budget: int = 10_000, seed: int = 0,
             battery: bool = True) -> ClassificationReport:
    """Test a catalog entry against its own claims, plus (with ``battery``) every other property."""
    K = memoized(cat.make(ident))
    claims = cat.claims(ident)
    box = box or claims.box
    props = set(claims.holds) | set(claims.fails) | {c.property for c in claims.contested}
    if battery:
        props |= set(cat.PROPERTIES)
    verdicts = {}
    sides = {sd for sd, prop in _SIDE_PROP.items() if prop in props}
    if sides and not box.degenerate:
        shared = check_continuity(K, box, budget, seed,
                                  {sd: claims.probes.get(_SIDE_PROP[sd], ()) for sd in sides}, sides)
        verdicts.update({_SIDE_PROP[sd]: v for sd, v in shared.items()})
    for prop in sorted(props):
        if box.degenerate:
            verdicts[prop] = PropertyVerdict(prop, INCONCLUSIVE, seed=seed, detail="degenerate box")
            continue
        if prop not in verdicts:
            verdicts[prop] = run_check(prop, K, box, budget, seed, claims.probes.get(prop, ()))
    matrix = []
    for prop in sorted(claims.holds):
        st = verdicts[prop].status
        matrix.append({"property": prop, "expected": HOLDS, "status": st, "agrees": st == HOLDS})
    for prop in sorted(claims.fails):
        st = verdicts[prop].status
        matrix.append({"property": prop, "expected": FALSIFIED, "status": st, "agrees": st == FALSIFIED})
    contested = []
    for c in claims.contested:
        st = verdicts[c.property].status
        refuted = (st == FALSIFIED) if c.claimed else (st == HOLDS)
        contested.append({"property": c.property, "claimed": c.claimed, "note": c.note, "status": st,
                          "contradicted": refuted})
    return ClassificationReport(ident, claims.declared_class, box, budget, seed, verdicts, matrix, contested)
