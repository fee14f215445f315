"""Formulas over a1..an, their dual formulas, and a conservative simplifier.

The grammar is small on purpose::

    expr    := term ('+' term)*
    term    := primary ('*' primary | '/' INT)*
    primary := VAR | RATIONAL | '(' expr ')'
             | 'root' '(' INT ',' expr ')'
             | 'pow' '(' RATIONAL ',' expr ')'
             | 'scale' '(' RATIONAL ',' expr ')'

``/ n`` is always division by a positive integer constant.  The dual of a
formula swaps + with *, ``/n`` with ``root(n, .)`` and ``pow(x, .)`` with
``scale(x, .)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .core import DomainBox, MeanFunction, NONE, exact_root, real_root
from .errors import ArityError, DomainError, ParseError
from .exact import Number, is_exact, tame


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Add:
    terms: tuple

    def __post_init__(self):
        if len(self.terms) < 2:
            raise ValueError("Add needs at least two terms")


@dataclass(frozen=True)
class Mul:
    factors: tuple

    def __post_init__(self):
        if len(self.factors) < 2:
            raise ValueError("Mul needs at least two factors")


@dataclass(frozen=True)
class DivN:
    expr: "Expr"
    n: int


@dataclass(frozen=True)
class RootN:
    expr: "Expr"
    n: int


@dataclass(frozen=True)
class PowX:
    expr: "Expr"
    x: Fraction


@dataclass(frozen=True)
class ScaleX:
    expr: "Expr"
    x: Fraction


Expr = Union[Var, Const, Add, Mul, DivN, RootN, PowX, ScaleX]

# --- parsing ---------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(\d+(?:\.\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m.end() == pos:
            break
        start = m.start(m.lastindex) if m.lastindex else m.end()
        if m.group(1):
            tokens.append(("num", m.group(1), start))
        elif m.group(2):
            tokens.append(("name", m.group(2), start))
        elif m.group(3):
            if m.group(3) not in "+*/(),-":
                raise ParseError(f"unexpected character {m.group(3)!r}", start)
            tokens.append(("op", m.group(3), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value or kind == "num":
            raise ParseError(f"expected {value!r}, found {text or 'end of input'!r}", pos)

    def parse(self) -> Expr:
        e = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {text!r}", pos)
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while self.peek()[1] == "+" and self.peek()[0] == "op":
            self.take()
            terms.append(self.term())
        return terms[0] if len(terms) == 1 else Add(tuple(terms))

    def term(self) -> Expr:
        factors = [self.primary()]
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            _, op, _ = self.take()
            if op == "*":
                factors.append(self.primary())
            else:
                n = self.integer()
                factors.append(DivN(factors.pop(), n))
        if len(factors) == 1:
            return factors[0]
        return Mul(tuple(factors))

    def integer(self) -> int:
        kind, text, pos = self.take()
        if kind != "num" or "." in text:
            raise ParseError(f"expected a positive integer, found {text or 'end of input'!r}", pos)
        n = int(text)
        if n < 1:
            raise ParseError("integer index must be positive", pos)
        return n

    def rational(self) -> Fraction:
        neg = False
        if self.peek()[1] == "-" and self.peek()[0] == "op":
            self.take()
            neg = True
        kind, text, pos = self.take()
        if kind != "num":
            raise ParseError(f"expected a number, found {text or 'end of input'!r}", pos)
        value = Fraction(text)
        if self.peek()[1] == "/" and self.tokens[self.i + 1][0] == "num":
            self.take()
            _, den, dpos = self.take()
            if "." in den or Fraction(den) == 0:
                raise ParseError("bad denominator", dpos)
            value /= Fraction(den)
        return -value if neg else value

    def primary(self) -> Expr:
        kind, text, pos = self.peek()
        if kind == "num" or (kind == "op" and text == "-"):
            return Const(self.rational())
        if kind == "op" and text == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        if kind == "name":
            self.take()
            m = re.fullmatch(r"a([1-9])", text)
            if m:
                return Var(int(m.group(1)))
            if text in ("root", "pow", "scale"):
                self.expect("(")
                if text == "root":
                    param = self.integer()
                else:
                    param = self.rational()
                self.expect(",")
                inner = self.expr()
                self.expect(")")
                if text == "root":
                    return RootN(inner, param)
                if text == "pow":
                    return PowX(inner, param)
                return ScaleX(inner, param)
            raise ParseError(f"unknown name {text!r}", pos)
        raise ParseError(f"unexpected {text or 'end of input'!r}", pos)


def parse(text: str) -> Expr:
    e = _Parser(text).parse()
    arity_of(e)  # rejects gaps in the variable numbering
    return e


# --- rendering ----------------------------------------------------------------

def _rat(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def render(e: Expr) -> str:
    """Canonical text; ``parse(render(e)) == e`` for every AST."""
    if isinstance(e, Var):
        return f"a{e.index}"
    if isinstance(e, Const):
        return _rat(e.value)
    if isinstance(e, Add):
        return "(" + " + ".join(render(t) for t in e.terms) + ")"
    if isinstance(e, Mul):
        return "(" + " * ".join(_operand(f) for f in e.factors) + ")"
    if isinstance(e, DivN):
        return f"{_operand(e.expr)}/{e.n}"
    if isinstance(e, RootN):
        return f"root({e.n}, {render(e.expr)})"
    if isinstance(e, PowX):
        return f"pow({_rat(e.x)}, {render(e.expr)})"
    if isinstance(e, ScaleX):
        return f"scale({_rat(e.x)}, {render(e.expr)})"
    raise TypeError(f"not an expression: {e!r}")


def _operand(e: Expr) -> str:
    # constants and quotients need brackets to stay one factor
    if isinstance(e, (Const, DivN)):
        return f"({render(e)})"
    return render(e)


# --- structure ----------------------------------------------------------------

def children(e: Expr) -> tuple:
    if isinstance(e, Add):
        return e.terms
    if isinstance(e, Mul):
        return e.factors
    if isinstance(e, (DivN, RootN, PowX, ScaleX)):
        return (e.expr,)
    return ()


def variables(e: Expr) -> set:
    if isinstance(e, Var):
        return {e.index}
    out = set()
    for c in children(e):
        out |= variables(c)
    return out


def arity_of(e: Expr) -> int:
    """Largest variable index; the indices used must be exactly 1..n."""
    used = variables(e)
    if not used:
        return 0
    n = max(used)
    if used != set(range(1, n + 1)):
        missing = sorted(set(range(1, n + 1)) - used)
        raise ArityError(f"variables must be a1..a{n} without gaps; missing " + ", ".join(f"a{i}" for i in missing))
    return n


def to_json(e: Expr) -> dict:
    if isinstance(e, Var):
        return {"node": "var", "params": {"index": e.index}, "children": []}
    if isinstance(e, Const):
        return {"node": "const", "params": {"value": _rat(e.value)}, "children": []}
    name = {Add: "add", Mul: "mul", DivN: "div", RootN: "root", PowX: "pow", ScaleX: "scale"}[type(e)]
    params = {}
    if isinstance(e, (DivN, RootN)):
        params["n"] = e.n
    elif isinstance(e, (PowX, ScaleX)):
        params["x"] = _rat(e.x)
    return {"node": name, "params": params, "children": [to_json(c) for c in children(e)]}


# --- evaluation -----------------------------------------------------------------

def _power(v: Number, x: Fraction) -> Number:
    if x.denominator == 1:
        k = x.numerator
        if v == 0 and k < 0:
            raise DomainError("zero raised to a negative power")
        if is_exact(v):
            return tame(Fraction(v) ** k)
        return float(v) ** k
    if v < 0:
        raise DomainError(f"non-integer power of negative number {v}")
    if v == 0:
        if x < 0:
            raise DomainError("zero raised to a negative power")
        return Fraction(0) if is_exact(v) else 0.0
    if is_exact(v):
        r = exact_root(Fraction(v), x.denominator)
        if r is not None:
            return tame(r**x.numerator)
    return float(v) ** float(x)


def evaluate(e: Expr, t) -> Number:
    """Value at t (1-based variables); exact as long as every step is exact."""
    if isinstance(e, Var):
        if e.index > len(t):
            raise ArityError(f"a{e.index} needs at least {e.index} arguments")
        return t[e.index - 1]
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Add):
        vals = [evaluate(c, t) for c in e.terms]
        if all(is_exact(v) for v in vals):
            return tame(sum(vals, Fraction(0)))
        return math.fsum(float(v) for v in vals)
    if isinstance(e, Mul):
        out = Fraction(1)
        for c in e.factors:
            v = evaluate(c, t)
            out = tame(out * v) if is_exact(v) and is_exact(out) else float(out) * float(v)
        return out
    if isinstance(e, DivN):
        v = evaluate(e.expr, t)
        return tame(Fraction(v) / e.n) if is_exact(v) else float(v) / e.n
    if isinstance(e, RootN):
        return real_root(evaluate(e.expr, t), e.n)
    if isinstance(e, PowX):
        return _power(evaluate(e.expr, t), e.x)
    if isinstance(e, ScaleX):
        v = evaluate(e.expr, t)
        return tame(e.x * v) if is_exact(v) else float(e.x) * float(v)
    raise TypeError(f"not an expression: {e!r}")


# --- duality ----------------------------------------------------------------------

def dualize(e: Expr) -> Expr:
    if isinstance(e, (Var, Const)):
        return e
    if isinstance(e, Add):
        return Mul(tuple(dualize(c) for c in e.terms))
    if isinstance(e, Mul):
        return Add(tuple(dualize(c) for c in e.factors))
    if isinstance(e, DivN):
        return RootN(dualize(e.expr), e.n)
    if isinstance(e, RootN):
        return DivN(dualize(e.expr), e.n)
    if isinstance(e, PowX):
        return ScaleX(dualize(e.expr), e.x)
    if isinstance(e, ScaleX):
        return PowX(dualize(e.expr), e.x)
    raise TypeError(f"not an expression: {e!r}")


# --- simplification ------------------------------------------------------------------

def simplify(e: Expr, max_passes: int = 100) -> Expr:
    """Apply value-preserving rewrites until nothing changes."""
    for _ in range(max_passes):
        nxt = _pass(e)
        if nxt == e:
            return e
        e = nxt
    return e


def _pass(e: Expr) -> Expr:
    if isinstance(e, (Var, Const)):
        return e
    if isinstance(e, Add):
        return _simplify_add([_pass(c) for c in e.terms])
    if isinstance(e, Mul):
        return _simplify_mul([_pass(c) for c in e.factors])
    if isinstance(e, DivN):
        inner = _pass(e.expr)
        if e.n == 1:
            return inner
        if isinstance(inner, Const):
            return Const(inner.value / e.n)
        if isinstance(inner, ScaleX):
            return ScaleX(inner.expr, inner.x / e.n)
        return DivN(inner, e.n)
    if isinstance(e, RootN):
        inner = _pass(e.expr)
        if e.n == 1:
            return inner
        if isinstance(inner, Const):
            r = exact_root(inner.value, e.n)
            return Const(r) if r is not None else RootN(inner, e.n)
        if isinstance(inner, ScaleX) and inner.x > 0:
            r = exact_root(inner.x, e.n)
            if r is not None:
                return ScaleX(RootN(inner.expr, e.n), r)
        return RootN(inner, e.n)
    if isinstance(e, PowX):
        inner = _pass(e.expr)
        if e.x == 1:
            return inner
        if isinstance(inner, Const):
            try:
                v = _power(inner.value, e.x)
            except DomainError:
                return PowX(inner, e.x)
            if is_exact(v):
                return Const(Fraction(v))
        return PowX(inner, e.x)
    if isinstance(e, ScaleX):
        inner = _pass(e.expr)
        if e.x == 1:
            return inner
        if isinstance(inner, Const):
            return Const(e.x * inner.value)
        if isinstance(inner, ScaleX):
            return ScaleX(inner.expr, e.x * inner.x)
        return ScaleX(inner, e.x)
    raise TypeError(f"not an expression: {e!r}")


def _simplify_add(terms: list) -> Expr:
    flat = []
    for t in terms:
        flat.extend(t.terms if isinstance(t, Add) else [t])
    consts = [t.value for t in flat if isinstance(t, Const)]
    rest = [t for t in flat if not isinstance(t, Const)]
    c = sum(consts, Fraction(0))
    if len(consts) > 1 or (consts and c == 0 and rest):
        flat = rest + ([Const(c)] if c != 0 or not rest else [])
    if len(flat) == 1:
        return flat[0]
    return Add(tuple(flat))


def _simplify_mul(factors: list) -> Expr:
    flat = []
    for f in factors:
        flat.extend(f.factors if isinstance(f, Mul) else [f])
    scale = Fraction(1)
    pulled = False
    rest = []
    for f in flat:
        if isinstance(f, Const):
            scale *= f.value
            pulled = True
        elif isinstance(f, ScaleX):
            scale *= f.x
            rest.append(f.expr)
            pulled = True
        else:
            rest.append(f)
    if not pulled:
        return Mul(tuple(flat))
    if not rest:
        return Const(scale)
    body = rest[0] if len(rest) == 1 else Mul(tuple(rest))
    return body if scale == 1 else ScaleX(body, scale)


# --- bridging to MeanFunction ------------------------------------------------------

def as_mean_function(e: Expr, box: DomainBox | None = None, name: str | None = None) -> MeanFunction:
    n = arity_of(e)
    if n < 1:
        raise ArityError("a formula without variables is not a function of a tuple")
    box = box or DomainBox(arity=n)

    def domain(t):
        return all(box.contains_value(x) for x in t)

    return MeanFunction(
        id=name or "expr:" + render(e),
        func=lambda t: evaluate(e, t),
        arity=n,
        domain=domain,
        exact=True,
        kind=NONE,
    )
