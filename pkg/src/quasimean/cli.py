"""Command line front end.

Exit codes: 0 success, 1 a declared property (or an iteration hypothesis)
was falsified, 2 domain error or bad data, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from . import catalog as cat
from . import dual, iterate, measures
from .classify import check_mean, classify
from .core import DomainBox, is_mean_like
from .errors import (ArityError, CatalogError, ContractViolation, Diverged, DomainError, EmptyDomain,
                     ParseError)
from .exact import render, to_exact

SCHEMA = "quasimean/1"
EXIT_OK, EXIT_FALSIFIED, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _number(x) -> dict:
    return {"text": render(x), "float": float(x)}


def _box(args, ident=None, arity=None) -> DomainBox:
    """--box and --arity, falling back on the catalog entry's own box."""
    base = cat.claims(ident).box if ident else DomainBox(arity=arity or 2)
    if args.box:
        try:
            box = DomainBox.parse(args.box, arity=base.arity, variadic=base.variadic)
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(str(exc)) from None
    else:
        box = base
    if args.arity:
        box = box.with_arity(args.arity)
    return box


def _values(texts) -> tuple:
    try:
        return tuple(to_exact(t) for t in texts)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a number: {exc}") from None


# --- commands ---------------------------------------------------------------------

def cmd_eval(args):
    K = cat.make(args.mean)
    t = _values(args.values)
    v = K(t)
    return EXIT_OK, {"command": "eval", "id": K.id, "input": [render(x) for x in t], "value": _number(v)}, render(v)


def cmd_classify(args):
    box = _box(args, args.mean)
    report = classify(args.mean, box=box, budget=args.budget, seed=args.seed)
    out = {"command": "classify", **report.to_json()}
    lines = [f"{report.id}: declared {report.declared_class}"]
    for k in sorted(report.verdicts):
        v = report.verdicts[k]
        lines.append(f"  {k:18s} {v.status}" + (f"  {v.detail}" if v.falsified else ""))
    code = EXIT_FALSIFIED if report.declared_falsified else EXIT_OK
    return code, out, "\n".join(lines)


def cmd_measure(args):
    K = cat.make(args.mean)
    box = _box(args, args.mean)
    if not box.variadic:
        K = K.restrict(box.arity) if K.variadic else K
    else:
        K = K.restrict(box.arity)
        box = box.with_arity(box.arity)
    if args.measure == "mdista":
        est = measures.mdista(K, box, samples=args.samples, seed=args.seed)
    else:
        fn = {"mdist": measures.mdist, "mdistp": measures.mdistp,
              "a-quasi": measures.a_quasi_constant, "m-quasi": measures.m_quasi_constant}[args.measure]
        est = fn(K, box, budget=args.budget, seed=args.seed)
    out = {"command": "measure", "id": K.id, "box": box.to_json(), **est.to_json()}
    if args.measure == "mdista":
        text = f"{args.measure} {K.id}: {est.value:.6g} +- {est.half_width:.2g}"
    else:
        text = f"{args.measure} {K.id}: >= {render(est.lower_bound)}" + (" (diverging)" if est.diverging else "")
    return EXIT_OK, out, text


def cmd_iterate(args):
    nums = _values(args.values)
    need = {"compound": 2, "closure": 2, "extend3": 3}
    if args.procedure == "bessel-onset":
        n = iterate.bessel_onset(nums, assume_divergent=args.assume_divergent)
        out = {"command": "iterate", "procedure": "bessel-onset", "terms": len(nums),
               "assume_divergent": args.assume_divergent, "onset": n}
        return EXIT_OK, out, "not found" if n is None else str(n)
    means = args.mean or []
    if len(nums) != need[args.procedure]:
        raise UsageError(f"{args.procedure} takes {need[args.procedure]} values, got {len(nums)}")
    wanted = 2 if args.procedure == "compound" else 1
    if len(means) != wanted:
        raise UsageError(f"{args.procedure} takes {wanted} --mean option(s)")
    Ks = [cat.make(m) for m in means]
    kw = {"tol": args.tol, "max_steps": args.max_steps}
    if args.procedure == "compound":
        trace = iterate.compound(Ks[0], Ks[1], *nums, **kw)
    elif args.procedure == "closure":
        trace = iterate.idempotent_closure(Ks[0], *nums, **kw)
    else:
        trace = iterate.extend3(Ks[0], *nums, floor=args.floor, **kw)
    out = {"command": "iterate", "means": [K.id for K in Ks], **trace.to_json()}
    return EXIT_OK, out, trace


def cmd_dualize(args):
    e = dual.parse(args.formula)
    d = dual.dualize(e)
    if args.simplify:
        d = dual.simplify(d)
    out = {"command": "dualize", "source": dual.render(e), "dual": dual.render(d), "ast": dual.to_json(d),
           "simplified": args.simplify}
    text = dual.render(d)
    if args.check_mean:
        n = dual.arity_of(d)
        if n < 2:
            raise UsageError("checking a formula as a mean needs at least two variables")
        box = _box(args, arity=n).with_arity(n)
        v = check_mean(dual.as_mean_function(d, box), box, args.budget, args.seed)
        out["check_mean"] = v.to_json()
        text += f"\nmean: {v.status}" + (f"  {v.detail}" if v.falsified else "")
    return EXIT_OK, out, text


class DataError(Exception):
    pass


def _column(path, name) -> list:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty file, a header row is required")
        if name not in reader.fieldnames:
            raise UsageError(f"no column {name!r}; have " + ", ".join(reader.fieldnames))
        out = []
        # row 1 is the header
        for row_no, row in enumerate(reader, start=2):
            cell = row[name]
            try:
                out.append(to_exact(cell))
            except (ValueError, ZeroDivisionError, TypeError, AttributeError):
                raise DataError(f"{path}: row {row_no}: {cell!r} is not a number") from None
    return out


def _estimator(name: str, precision: int):
    e, _ = cat.entry(name)
    if "?" not in name and any(p.name == "m" for p in e.params):
        name = f"{name}?m={precision}"
    return cat.make(name)


def cmd_stats(args):
    data = _column(args.csv, args.column)
    if not data:
        raise DataError(f"{args.csv}: column {args.column!r} has no values")
    rows = []
    lines = []
    for name in args.estimators.split(","):
        K = _estimator(name.strip(), args.precision)
        t = K.coerce(data)
        v = K(t)
        ml = is_mean_like(K, t)
        rows.append({"id": K.id, "value": _number(v), "mean_like": ml, "n": len(t),
                     "min": render(min(t)), "max": render(max(t))})
        lines.append(f"{K.id}: {render(v)}" + ("" if ml else "  (not mean-like)"))
    out = {"command": "stats", "file": args.csv, "column": args.column, "precision": args.precision,
           "estimators": rows}
    return EXIT_OK, out, "\n".join(lines)


def cmd_catalog(args):
    names = [args.mean] if args.mean else cat.instances()
    items = [cat.describe(n) for n in names]
    text = "\n".join(f"{d['id']:28s} {d['class']:10s} {cat.REGISTRY[cat.split_id(d['id'])[0]].summary}"
                     for d in items)
    return EXIT_OK, {"command": "catalog", "entries": items}, text


# --- plumbing ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--box", help="coordinate interval lo:hi; ( or ) marks an open end")
    common.add_argument("--arity", type=int, help="tuple length")
    common.add_argument("--budget", type=int, default=10_000, help="evaluations per check (default 10000)")
    common.add_argument("--samples", type=int, default=1_000_000, help="Monte Carlo samples for mdista")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=iterate.TOL)
    common.add_argument("--format", choices=("json", "csv", "pretty"), default=None)
    common.add_argument("--out", help="write the report here instead of stdout")

    p = _Parser(prog="quasimean", description="Means, quasi-means and their properties.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("eval", parents=[common], help="evaluate a catalog mean")
    s.add_argument("mean")
    s.add_argument("values", nargs="+")
    s.set_defaults(run=cmd_eval, default_format="pretty")

    s = sub.add_parser("classify", parents=[common], help="test a mean against its declared properties")
    s.add_argument("mean")
    s.set_defaults(run=cmd_classify, default_format="json")

    s = sub.add_parser("measure", parents=[common], help="distance from the min/max envelope")
    s.add_argument("measure", choices=("mdist", "mdistp", "mdista", "a-quasi", "m-quasi"))
    s.add_argument("mean")
    s.set_defaults(run=cmd_measure, default_format="json")

    s = sub.add_parser("iterate", parents=[common], help="compound, closure, extend3 or bessel-onset")
    s.add_argument("procedure", choices=("compound", "closure", "extend3", "bessel-onset"))
    s.add_argument("values", nargs="+")
    s.add_argument("--mean", action="append", help="catalog id; give it twice for compound (K then M)")
    s.add_argument("--max-steps", type=int, default=iterate.MAX_STEPS)
    s.add_argument("--floor", type=float, default=iterate.FLOOR)
    s.add_argument("--assume-divergent", action="store_true")
    s.set_defaults(run=cmd_iterate, default_format="json")

    s = sub.add_parser("dualize", parents=[common], help="dual of a formula over a1..an")
    s.add_argument("formula")
    s.add_argument("--simplify", action="store_true")
    s.add_argument("--check-mean", action="store_true", help="test the dual as a mean on --box")
    s.set_defaults(run=cmd_dualize, default_format="pretty")

    s = sub.add_parser("stats", parents=[common], help="apply estimators to a CSV column")
    s.add_argument("csv")
    s.add_argument("column")
    s.add_argument("--estimators", default="arith,bessel-plus")
    s.add_argument("--precision", type=int, default=0, help="m for estimators that round to m decimals")
    s.set_defaults(run=cmd_stats, default_format="json")

    s = sub.add_parser("catalog", parents=[common], help="list catalog entries")
    s.add_argument("mean", nargs="?")
    s.set_defaults(run=cmd_catalog, default_format="pretty")
    return p


def _emit(args, payload, pretty) -> str:
    fmt = args.format or args.default_format
    if fmt == "json":
        return json.dumps({"schema": SCHEMA, "seed": args.seed, **payload}, sort_keys=True, indent=2,
                          ensure_ascii=False) + "\n"
    if fmt == "csv":
        if isinstance(pretty, iterate.IterationTrace):
            return pretty.to_csv()
        raise UsageError(f"{args.command} has no CSV output")
    if isinstance(pretty, iterate.IterationTrace):
        return f"{pretty.verdict}: " + ("none" if pretty.limit is None else render(pretty.limit)) + "\n"
    return str(pretty) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, payload, pretty = args.run(args)
        text = _emit(args, payload, pretty)
    except UsageError as exc:
        print(f"quasimean: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CatalogError, ParseError, ArityError) as exc:
        print(f"quasimean: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, EmptyDomain, DataError, ZeroDivisionError) as exc:
        print(f"quasimean: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ContractViolation, Diverged) as exc:
        print(f"quasimean: {exc}", file=sys.stderr)
        return EXIT_FALSIFIED
    except OSError as exc:
        print(f"quasimean: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
