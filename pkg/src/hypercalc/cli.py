"""The hypercalc command line.

Subcommands route straight to the library: classify/st/cmp work on
hyperreal terms, seq/series on sequences, deriv/lhospital on functions,
integrate on [a, b], filter on finite families, and repl runs the same
commands interactively with `let` bindings. Output is plain text or
schema-stable JSON (--json); module errors become diagnostics with source
spans and exit code 1, usage problems exit 2.
"""

import argparse
import json
import math
import re
import shlex
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import filters as flt
from . import integration as intg
from . import jets
from . import sequences as seq
from .errors import HypercalcError, ParseError
from .expressions import render as render_expr
from .hyperfield import (
    HyperExp,
    HyperRat,
    classify,
    compare,
    growth_classify_st,
    standard_part,
)
from .parser import FUNCTION, HYPER_TERM, SEQUENCE, parse

SCHEMA = "hypercalc/1"

PLUS_INF_TEXT = "+inf"
MINUS_INF_TEXT = "-inf"


@dataclass
class CommandResult:
    status: str  # ok | error
    payload: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)  # (span | None, message)
    exit_code: int = 0
    text: str = ""


def fraction_text(value) -> str:
    if isinstance(value, Fraction):
        return (
            str(value.numerator)
            if value.denominator == 1
            else f"{value.numerator}/{value.denominator}"
        )
    if isinstance(value, float):
        if math.isinf(value):
            return PLUS_INF_TEXT if value > 0 else MINUS_INF_TEXT
        if value == int(value) and abs(value) < 1e15:
            return str(int(value))
        return repr(value)
    if isinstance(value, str):
        return value
    return str(value)


def render(result: CommandResult, fmt: str) -> bytes:
    """Deterministic bytes for a command result."""
    if fmt == "json":
        body = dict(result.payload)
        body["schema"] = SCHEMA
        if result.status == "error":
            body["status"] = "error"
            body["diagnostics"] = [
                {"span": list(span) if span else None, "message": msg}
                for span, msg in result.diagnostics
            ]
        return (json.dumps(body, sort_keys=True) + "\n").encode()
    if result.status == "error":
        lines = []
        for span, msg in result.diagnostics:
            where = f" (at {span[0]}..{span[1]})" if span else ""
            lines.append(f"error: {msg}{where}")
        return ("\n".join(lines) + "\n").encode()
    return (result.text + "\n").encode()


# -- value helpers -------------------------------------------------------------

_PI_FORM = re.compile(
    r"^\s*(?P<sign>-)?\s*(?:(?P<num>\d+)\s*\*\s*)?pi\s*(?:/\s*(?P<den>\d+))?\s*$"
)


def _parse_point(text):
    """A rational endpoint/point; multiples of `pi` are admitted and
    rationalized to the dyadic of their double value, flagged inexact."""
    text = text.strip()
    try:
        return Fraction(text), True
    except (ValueError, ZeroDivisionError):
        pass
    m = _PI_FORM.match(text)
    if m is None:
        raise ParseError(f"cannot read {text!r} as a number")
    value = math.pi * int(m.group("num") or 1) / int(m.group("den") or 1)
    if m.group("sign"):
        value = -value
    return Fraction(value), False


def _parse_tol(text):
    if text is None:
        return Fraction(1, 10 ** 9)
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        try:
            return Fraction(float(text))
        except (ValueError, OverflowError):
            raise ParseError(f"cannot read tolerance {text!r}")


def _hyper_value(text, env=None):
    env = env or {}
    parsed = parse(HYPER_TERM, text, env_names=env.keys())
    return _eval_hyper(parsed.ast, env), parsed


def _eval_hyper(node, env):
    from .expressions import Add, Const, Div, Mul, Neg, Pow, Sub, Var

    if isinstance(node, Const):
        return HyperRat.from_rational(node.value)
    if isinstance(node, Var):
        if node.name == "W":
            from .hyperfield import OMEGA

            return OMEGA
        return env[node.name]
    if isinstance(node, Add):
        return _eval_hyper(node.left, env) + _eval_hyper(node.right, env)
    if isinstance(node, Sub):
        return _eval_hyper(node.left, env) - _eval_hyper(node.right, env)
    if isinstance(node, Mul):
        return _eval_hyper(node.left, env) * _eval_hyper(node.right, env)
    if isinstance(node, Div):
        return _eval_hyper(node.left, env) / _eval_hyper(node.right, env)
    if isinstance(node, Neg):
        return -_eval_hyper(node.operand, env)
    if isinstance(node, Pow):
        return _eval_hyper(node.base, env) ** node.exponent
    raise HypercalcError(f"{type(node).__name__} in a hyperreal term")


def _element_text(value):
    if isinstance(value, (HyperRat, HyperExp)):
        return str(value)
    return fraction_text(value)


def element_json(value):
    """Structured encoding: rational-function elements as ascending
    coefficient arrays of "p/q" strings, growth elements as term lists."""
    if isinstance(value, HyperRat):
        return {
            "num": [fraction_text(c) for c in value.num],
            "den": [fraction_text(c) for c in value.den],
        }
    if isinstance(value, HyperExp):
        return {
            "terms": [
                {"base": fraction_text(base), "body": element_json(body)}
                for base, body in value.terms
            ]
        }
    return fraction_text(value)


def _classification_of(value):
    if isinstance(value, HyperExp):
        cls, _st = growth_classify_st(value)
        return cls
    return classify(value)


def _standard_part_of(value):
    if isinstance(value, HyperExp):
        from .hyperfield import growth_st

        return growth_st(value)
    return standard_part(value)


# -- subcommand handlers --------------------------------------------------------

def _cmd_classify(args, env=None):
    value, _ = _hyper_value(args.term, env)
    cls = _classification_of(value)
    payload = {"tag": cls.tag, "sign": cls.sign, "element": element_json(value)}
    return CommandResult("ok", payload, text=f"{cls.tag}, {cls.sign}")


def _cmd_st(args, env=None):
    value, _ = _hyper_value(args.term, env)
    st = _standard_part_of(value)
    payload = {"value": fraction_text(st), "element": element_json(value)}
    return CommandResult("ok", payload, text=fraction_text(st))


def _cmd_cmp(args, env=None):
    a, _ = _hyper_value(args.left, env)
    b, _ = _hyper_value(args.right, env)
    if isinstance(a, HyperExp) or isinstance(b, HyperExp):
        a, b = HyperExp.coerce(a), HyperExp.coerce(b)
        diff = a - b
        s = diff._sign()
        rel = "equal" if s == 0 else ("greater" if s > 0 else "less")
    else:
        rel = compare(a, b)
    return CommandResult("ok", {"relation": rel}, text=rel)


def _cmd_seq(args, env=None):
    parsed = parse(SEQUENCE, args.expr)
    report = seq.analyze(parsed.ast)
    analysis = {
        "bounded": report.bounded,
        "limit_points": [fraction_text(p) for p in report.limit_points],
        "converges_to": (
            fraction_text(report.converges_to)
            if report.converges_to is not None
            else None
        ),
        "diverges_to": report.diverges_to,
        "liminf": fraction_text(report.liminf),
        "limsup": fraction_text(report.limsup),
        "cauchy": report.cauchy,
    }
    try:
        element = seq.to_hyper(parsed.ast)
        payload = {
            "verdict": "ok",
            "hyper": _element_text(element),
            "element": element_json(element),
            "witness_classes": None,
            "analysis": analysis,
        }
        lines = [f"hyperreal: {payload['hyper']}"]
    except seq.DependenceError as exc:
        witnesses = {
            name: _element_text(v) for name, v in sorted(exc.candidates.items())
        }
        payload = {
            "verdict": "ultrafilter_dependent",
            "hyper": None,
            "witness_classes": witnesses,
            "analysis": analysis,
        }
        lines = [
            "verdict: ultrafilter_dependent",
            f"candidates: even={witnesses['even']} odd={witnesses['odd']}",
        ]
    if report.converges_to is not None:
        lines.append(f"converges to {fraction_text(report.converges_to)}")
    elif report.diverges_to is not None:
        lines.append(f"diverges to {report.diverges_to}")
    else:
        lines.append(
            "limit points: "
            + ", ".join(fraction_text(p) for p in report.limit_points)
        )
    lines.append(
        f"liminf {fraction_text(report.liminf)}, "
        f"limsup {fraction_text(report.limsup)}, "
        f"bounded {str(report.bounded).lower()}, cauchy {str(report.cauchy).lower()}"
    )
    return CommandResult("ok", payload, text="\n".join(lines))


def _cmd_series(args, env=None):
    term = parse(SEQUENCE, args.term).ast
    anti = parse(SEQUENCE, args.antidiff).ast if args.antidiff else None
    report = seq.series_analyze(term, antidifference=anti)
    payload = {
        "verdict": report.verdict,
        "sum": fraction_text(report.sum) if report.sum is not None else None,
        "direction": report.direction,
        "method": report.method,
        "partial_sum": (
            render_expr(report.partial_sum)
            if report.partial_sum is not None
            else None
        ),
    }
    if report.verdict == "converges":
        text = (
            f"converges to {fraction_text(report.sum)}"
            if report.sum is not None
            else "converges (sum not determined)"
        )
    elif report.verdict == "diverges":
        text = "diverges" + (f" to {report.direction}" if report.direction else "")
    else:
        text = "inconclusive"
    return CommandResult("ok", payload, text=f"{text} [{report.method}]")


def _cmd_deriv(args, env=None):
    f = parse(FUNCTION, args.func).ast
    p, exact = _parse_point(args.at)
    point = p if exact else float(p)
    order = args.order
    if order == 1:
        value = jets.derivative(f, point)
    else:
        value = jets.nth_derivative_via_increments(f, point, order)
    return CommandResult(
        "ok", {"value": fraction_text(value), "order": order},
        text=fraction_text(value),
    )


def _cmd_lhospital(args, env=None):
    f = parse(FUNCTION, args.func).ast
    g = parse(FUNCTION, args.denom).ast
    p, exact = _parse_point(args.at)
    point = p if exact else float(p)
    value = jets.lhospital(f, g, point, max_order=args.max_depth)
    return CommandResult("ok", {"value": fraction_text(value)}, text=fraction_text(value))


def _cmd_integrate(args, env=None):
    f = parse(FUNCTION, args.func).ast
    a, a_exact = _parse_point(getattr(args, "from"))
    b, b_exact = _parse_point(args.to)
    tol = _parse_tol(args.tol)
    ic = intg.classify_integrand(f, min(a, b), max(a, b))
    result = intg.integrate(ic, a, b, tol=tol, mode=args.mode)
    notes = list(result.notes)
    if not (a_exact and b_exact):
        notes.append("irrational endpoint rationalized to the dyadic of its double")
    payload = {
        "value": fraction_text(result.value),
        "tag": result.tag,
        "gap": fraction_text(result.gap),
        "cells": result.cells,
        "mode": result.mode,
        "integrand_class": ic.kind,
        "notes": notes,
    }
    text = (
        f"{fraction_text(result.value)} [{result.tag}; gap {fraction_text(result.gap)};"
        f" {result.cells} cells; {result.mode}]"
    )
    return CommandResult("ok", payload, text=text)


def _family_from_json(text, universe):
    try:
        sets = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"family is not valid JSON: {exc}")
    if not isinstance(sets, list) or not all(isinstance(s, list) for s in sets):
        raise ParseError("a family is a JSON array of arrays of naturals")
    return flt.FiniteFamily.from_sets(universe, sets)


def _family_payload(fam):
    return {"universe": fam.universe_size, "members": fam.to_sets()}


def _cmd_filter(args, env=None):
    sub = args.filter_cmd
    if sub == "check":
        fam = _family_from_json(args.family, args.universe)
        payload = {
            "filter": flt.is_filter(fam),
            "ultrafilter": flt.is_ultrafilter(fam),
        }
        text = (
            f"filter: {str(payload['filter']).lower()}, "
            f"ultrafilter: {str(payload['ultrafilter']).lower()}"
        )
        return CommandResult("ok", payload, text=text)
    if sub == "principal":
        mask = 0
        for i in json.loads(args.set):
            mask |= 1 << int(i)
        fam = flt.principal_filter(args.universe, mask)
        payload = _family_payload(fam)
        return CommandResult("ok", payload, text=json.dumps(payload["members"]))
    if sub == "generate":
        base = _family_from_json(args.family, args.universe)
        fam = flt.generate_from_base(args.universe, base)
        payload = _family_payload(fam)
        return CommandResult("ok", payload, text=json.dumps(payload["members"]))
    if sub == "extend":
        base = _family_from_json(args.family, args.universe)
        fam = flt.extend_to_ultrafilter(base)
        payload = _family_payload(fam)
        return CommandResult("ok", payload, text=json.dumps(payload["members"]))
    if sub == "cofinite":
        exceptions = json.loads(args.exceptions) if args.exceptions else []
        polarity = flt.COFINITE if args.polarity == "cofinite" else flt.FINITE
        s = flt.CofiniteSet(frozenset(int(i) for i in exceptions), polarity)
        member = flt.cofinite_contains(s)
        return CommandResult(
            "ok", {"in_cofinite_filter": member}, text=str(member).lower()
        )
    raise HypercalcError(f"unknown filter subcommand {sub!r}")


# -- REPL -----------------------------------------------------------------------

_REPL_HELP = """commands:
  let NAME = TERM        bind a hyperreal term
  classify TERM | st TERM | cmp A B
  seq EXPR | series EXPR [--antidiff EXPR]
  deriv F --at P | lhospital F G --at A
  integrate F --from A --to B [--tol T] [--mode M]
  filter check FAMILY --universe U   (and principal/generate/extend/cofinite)
  help | quit"""


def _cmd_repl(args, env=None):
    env = {}
    stdin = sys.stdin
    interactive = stdin.isatty()
    while True:
        if interactive:
            try:
                line = input("hypercalc> ")
            except EOFError:
                break
        else:
            line = stdin.readline()
            if not line:
                break
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line in ("quit", "exit"):
            break
        if line == "help":
            print(_REPL_HELP)
            continue
        if line.startswith("let "):
            try:
                name, _eq, rhs = line[4:].partition("=")
                name = name.strip()
                if not name.isidentifier():
                    raise ParseError(f"bad binding name {name!r}")
                if not rhs.strip():
                    raise ParseError("expected: let NAME = TERM")
                value, _ = _hyper_value(rhs.strip(), env)
                env[name] = value
                print(f"{name} = {_element_text(value)}")
            except HypercalcError as exc:
                print(f"error: {exc}")
            continue
        code = run(shlex.split(line), env=env, repl=True)
        if code == 2:
            print(_REPL_HELP)
    return CommandResult("ok", {"repl": "done"}, text="")


# -- argument surface -------------------------------------------------------------

class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


class _UsageError(Exception):
    pass


import functools


@functools.lru_cache(maxsize=1)
def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--json", action="store_true", default=argparse.SUPPRESS, help="emit JSON"
    )
    common.add_argument(
        "--tol", default=argparse.SUPPRESS, help="tolerance (rational or float)"
    )
    common.add_argument(
        "--mode",
        default=argparse.SUPPRESS,
        choices=["auto", "symbolic", "refine"],
    )
    common.add_argument(
        "--max-depth", type=int, default=argparse.SUPPRESS, dest="max_depth"
    )

    top = _ArgumentParser(prog="hypercalc", parents=[common])
    subs = top.add_subparsers(dest="command", required=True)

    p = subs.add_parser("classify", parents=[common])
    p.add_argument("term")
    p = subs.add_parser("st", parents=[common])
    p.add_argument("term")
    p = subs.add_parser("cmp", parents=[common])
    p.add_argument("left")
    p.add_argument("right")
    p = subs.add_parser("seq", parents=[common])
    p.add_argument("expr")
    p = subs.add_parser("series", parents=[common])
    p.add_argument("term")
    p.add_argument("--antidiff", default=None)
    p = subs.add_parser("deriv", parents=[common])
    p.add_argument("func")
    p.add_argument("--at", required=True)
    p.add_argument("--order", type=int, default=1)
    p = subs.add_parser("lhospital", parents=[common])
    p.add_argument("func")
    p.add_argument("denom")
    p.add_argument("--at", required=True)
    p = subs.add_parser("integrate", parents=[common])
    p.add_argument("func")
    p.add_argument("--from", required=True)
    p.add_argument("--to", required=True)
    subs.add_parser("repl", parents=[common])

    pf = subs.add_parser("filter", parents=[common])
    fsubs = pf.add_subparsers(dest="filter_cmd", required=True)
    p = fsubs.add_parser("check", parents=[common])
    p.add_argument("family")
    p.add_argument("--universe", type=int, required=True)
    p = fsubs.add_parser("principal", parents=[common])
    p.add_argument("--universe", type=int, required=True)
    p.add_argument("--set", required=True, help="JSON array of elements")
    p = fsubs.add_parser("generate", parents=[common])
    p.add_argument("family")
    p.add_argument("--universe", type=int, required=True)
    p = fsubs.add_parser("extend", parents=[common])
    p.add_argument("family")
    p.add_argument("--universe", type=int, required=True)
    p = fsubs.add_parser("cofinite", parents=[common])
    p.add_argument("--exceptions", default="[]", help="JSON array of naturals")
    p.add_argument(
        "--polarity", choices=["cofinite", "finite"], default="cofinite"
    )
    return top


_HANDLERS = {
    "classify": _cmd_classify,
    "st": _cmd_st,
    "cmp": _cmd_cmp,
    "seq": _cmd_seq,
    "series": _cmd_series,
    "deriv": _cmd_deriv,
    "lhospital": _cmd_lhospital,
    "integrate": _cmd_integrate,
    "filter": _cmd_filter,
    "repl": _cmd_repl,
}


def run(argv, stdout=None, env=None, repl=False) -> int:
    """Execute one command line; returns the process exit code."""
    import os

    stdout = stdout if stdout is not None else sys.stdout.buffer
    default_mode = os.environ.get("HYPERCALC_MODE", "auto")
    if default_mode not in ("auto", "symbolic", "refine"):
        default_mode = "auto"
    try:
        args = _build_parser().parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 2
    except SystemExit:  # argparse -h
        return 0
    args.json = getattr(args, "json", False)
    args.tol = getattr(args, "tol", None)
    args.mode = getattr(args, "mode", default_mode)
    args.max_depth = getattr(args, "max_depth", 16)
    try:
        result = _HANDLERS[args.command](args, env=env)
    except HypercalcError as exc:
        result = CommandResult(
            "error",
            diagnostics=[(exc.span, str(exc))],
            exit_code=1,
        )
    except ZeroDivisionError as exc:
        result = CommandResult(
            "error", diagnostics=[(None, f"division by zero: {exc}")], exit_code=1
        )
    except (ValueError, OverflowError, KeyError) as exc:
        result = CommandResult(
            "error", diagnostics=[(None, str(exc) or type(exc).__name__)], exit_code=1
        )
    fmt = "json" if args.json else "text"
    if repl:
        sys.stdout.write(render(result, fmt).decode())
    else:
        stdout.write(render(result, fmt))
        try:
            stdout.flush()
        except Exception:
            pass
    return result.exit_code


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
