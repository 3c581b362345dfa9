"""Shared expression ASTs.

One node set serves the three surface grammars: hyperreal terms (variable
`W`, sugar `eps`), closed-form sequences (variable `n`, plus `geom`,
`altsign`, `patch`), and real functions (variable `x`, plus the transcendental
calls). Which leaves are legal for which grammar is the parser's concern;
evaluators here simply reject nodes they do not support.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, SingularError, UnsupportedFormError


@dataclass(frozen=True)
class Node:
    pass


@dataclass(frozen=True)
class Const(Node):
    value: Fraction


@dataclass(frozen=True)
class Var(Node):
    name: str  # "x", "n", or "W"


@dataclass(frozen=True)
class Add(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Sub(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Mul(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Div(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Neg(Node):
    operand: Node


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: int


@dataclass(frozen=True)
class Call(Node):
    func: str  # exp ln sin cos sqrt abs
    arg: Node


@dataclass(frozen=True)
class Geom(Node):
    ratio: Fraction  # r**n for rational r > 0


@dataclass(frozen=True)
class AltSign(Node):
    pass


@dataclass(frozen=True)
class Patch(Node):
    entries: tuple  # ((index, value), ...) sorted, duplicate-free
    base: Node


FUNCTIONS = ("exp", "ln", "sin", "cos", "sqrt", "abs")

_FLOAT_FUNCS = {
    "exp": math.exp,
    "ln": math.log,
    "sin": math.sin,
    "cos": math.cos,
    "sqrt": math.sqrt,
    "abs": abs,
}


def const(c):
    return Const(Fraction(c))


def patch(entries, base):
    seen = {}
    for idx, val in entries:
        idx = int(idx)
        if idx < 0:
            raise ValueError("patch indices must be natural numbers")
        if idx in seen:
            raise ValueError(f"duplicate patch index {idx}")
        seen[idx] = Fraction(val)
    return Patch(tuple(sorted(seen.items())), base)


def compose(outer, inner):
    """outer with its variable leaf replaced by inner."""
    if isinstance(outer, Var):
        return inner
    if isinstance(outer, (Const, Geom, AltSign)):
        return outer
    if isinstance(outer, (Add, Sub, Mul, Div)):
        return type(outer)(compose(outer.left, inner), compose(outer.right, inner))
    if isinstance(outer, Neg):
        return Neg(compose(outer.operand, inner))
    if isinstance(outer, Pow):
        return Pow(compose(outer.base, inner), outer.exponent)
    if isinstance(outer, Call):
        return Call(outer.func, compose(outer.arg, inner))
    raise UnsupportedFormError(f"cannot compose through {type(outer).__name__}")


def is_rational_expr(node):
    """True when the expression uses field operations and integer powers only."""
    if isinstance(node, (Const, Var)):
        return True
    if isinstance(node, (Add, Sub, Mul, Div)):
        return is_rational_expr(node.left) and is_rational_expr(node.right)
    if isinstance(node, Neg):
        return is_rational_expr(node.operand)
    if isinstance(node, Pow):
        return is_rational_expr(node.base)
    return False


def differentiate(node):
    """Symbolic derivative of a function expression (variable `x`)."""
    if isinstance(node, Const):
        return Const(Fraction(0))
    if isinstance(node, Var):
        return Const(Fraction(1))
    if isinstance(node, Add):
        return Add(differentiate(node.left), differentiate(node.right))
    if isinstance(node, Sub):
        return Sub(differentiate(node.left), differentiate(node.right))
    if isinstance(node, Neg):
        return Neg(differentiate(node.operand))
    if isinstance(node, Mul):
        return Add(
            Mul(differentiate(node.left), node.right),
            Mul(node.left, differentiate(node.right)),
        )
    if isinstance(node, Div):
        num = Sub(
            Mul(differentiate(node.left), node.right),
            Mul(node.left, differentiate(node.right)),
        )
        return Div(num, Pow(node.right, 2))
    if isinstance(node, Pow):
        k = node.exponent
        return Mul(
            Mul(Const(Fraction(k)), Pow(node.base, k - 1)),
            differentiate(node.base),
        )
    if isinstance(node, Call):
        u, du = node.arg, differentiate(node.arg)
        table = {
            "exp": lambda: Call("exp", u),
            "ln": lambda: Div(Const(Fraction(1)), u),
            "sin": lambda: Call("cos", u),
            "cos": lambda: Neg(Call("sin", u)),
            "sqrt": lambda: Div(
                Const(Fraction(1)), Mul(Const(Fraction(2)), Call("sqrt", u))
            ),
        }
        if node.func == "abs":
            raise DomainError("abs has no global derivative expression")
        return Mul(table[node.func](), du)
    raise UnsupportedFormError(f"cannot differentiate {type(node).__name__}")


def to_polynomial(node):
    """Coefficients (ascending) when the expression is syntactically a
    polynomial in its variable; None otherwise."""
    try:
        return _to_poly(node)
    except _NotPoly:
        return None


class _NotPoly(Exception):
    pass


def _to_poly(node):
    from . import polys as P

    if isinstance(node, Const):
        return P.pconst(node.value)
    if isinstance(node, Var):
        return (Fraction(0), Fraction(1))
    if isinstance(node, Add):
        return P.padd(_to_poly(node.left), _to_poly(node.right))
    if isinstance(node, Sub):
        return P.psub(_to_poly(node.left), _to_poly(node.right))
    if isinstance(node, Mul):
        return P.pmul(_to_poly(node.left), _to_poly(node.right))
    if isinstance(node, Neg):
        return P.pneg(_to_poly(node.operand))
    if isinstance(node, Pow):
        if node.exponent < 0:
            raise _NotPoly()
        return P.ppow(_to_poly(node.base), node.exponent)
    if isinstance(node, Div):
        den = _to_poly(node.right)
        if len(den) == 1:  # constant divisor keeps us polynomial
            return P.pscale(_to_poly(node.left), 1 / den[0])
        raise _NotPoly()
    raise _NotPoly()


# -- evaluators -------------------------------------------------------------

def evaluate_float(node, x):
    """IEEE double evaluation with explicit domain errors."""
    if isinstance(node, Const):
        return float(node.value)
    if isinstance(node, Var):
        return float(x)
    if isinstance(node, Add):
        return evaluate_float(node.left, x) + evaluate_float(node.right, x)
    if isinstance(node, Sub):
        return evaluate_float(node.left, x) - evaluate_float(node.right, x)
    if isinstance(node, Mul):
        return evaluate_float(node.left, x) * evaluate_float(node.right, x)
    if isinstance(node, Div):
        den = evaluate_float(node.right, x)
        if den == 0.0:
            raise DomainError("division by zero")
        return evaluate_float(node.left, x) / den
    if isinstance(node, Neg):
        return -evaluate_float(node.operand, x)
    if isinstance(node, Pow):
        base = evaluate_float(node.base, x)
        if node.exponent < 0 and base == 0.0:
            raise DomainError("zero raised to a negative power")
        return base ** node.exponent
    if isinstance(node, Call):
        v = evaluate_float(node.arg, x)
        if node.func == "ln" and v <= 0.0:
            raise DomainError("ln of a non-positive value")
        if node.func == "sqrt" and v < 0.0:
            raise DomainError("sqrt of a negative value")
        return _FLOAT_FUNCS[node.func](v)
    raise UnsupportedFormError(f"{type(node).__name__} in function context")


def evaluate_exact(node, x):
    """Exact Fraction evaluation; transcendental calls are rejected."""
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return Fraction(x)
    if isinstance(node, Add):
        return evaluate_exact(node.left, x) + evaluate_exact(node.right, x)
    if isinstance(node, Sub):
        return evaluate_exact(node.left, x) - evaluate_exact(node.right, x)
    if isinstance(node, Mul):
        return evaluate_exact(node.left, x) * evaluate_exact(node.right, x)
    if isinstance(node, Div):
        den = evaluate_exact(node.right, x)
        if den == 0:
            raise DomainError("division by zero")
        return evaluate_exact(node.left, x) / den
    if isinstance(node, Neg):
        return -evaluate_exact(node.operand, x)
    if isinstance(node, Pow):
        base = evaluate_exact(node.base, x)
        if node.exponent < 0 and base == 0:
            raise DomainError("zero raised to a negative power")
        return base ** node.exponent
    if isinstance(node, Call):
        if node.func == "abs":
            return abs(evaluate_exact(node.arg, x))
        raise UnsupportedFormError(f"{node.func} has no exact rational value")
    raise UnsupportedFormError(f"{type(node).__name__} in function context")


def evaluate_hyper(node, a):
    """Exact evaluation over the hyperreal field (field operations only)."""
    from .hyperfield import HyperRat

    if isinstance(node, Const):
        return HyperRat.from_rational(node.value)
    if isinstance(node, Var):
        return a
    if isinstance(node, Add):
        return evaluate_hyper(node.left, a) + evaluate_hyper(node.right, a)
    if isinstance(node, Sub):
        return evaluate_hyper(node.left, a) - evaluate_hyper(node.right, a)
    if isinstance(node, Mul):
        return evaluate_hyper(node.left, a) * evaluate_hyper(node.right, a)
    if isinstance(node, Div):
        den = evaluate_hyper(node.right, a)
        if den.is_zero():
            raise SingularError("denominator vanishes identically at the point")
        return evaluate_hyper(node.left, a) / den
    if isinstance(node, Neg):
        return -evaluate_hyper(node.operand, a)
    if isinstance(node, Pow):
        return evaluate_hyper(node.base, a) ** node.exponent
    raise UnsupportedFormError(
        f"{type(node).__name__} is outside the rational-function fragment"
    )


# -- rendering ---------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def render(node):
    """Canonical text form; parses back to an identical AST."""
    return _render(node)[0]


def _render(node):
    if isinstance(node, Const):
        v = node.value
        if v.denominator == 1:
            return (str(v), _PREC_ATOM if v >= 0 else _PREC_UNARY)
        return (f"{v.numerator}/{v.denominator}", _PREC_MUL)
    if isinstance(node, Var):
        return (node.name, _PREC_ATOM)
    if isinstance(node, AltSign):
        return ("altsign", _PREC_ATOM)
    if isinstance(node, Geom):
        r = node.ratio
        inner = str(r) if r.denominator == 1 else f"{r.numerator}/{r.denominator}"
        return (f"geom({inner})", _PREC_ATOM)
    if isinstance(node, Add):
        return (
            f"{_wrap(node.left, _PREC_ADD)} + {_wrap(node.right, _PREC_ADD + 1)}",
            _PREC_ADD,
        )
    if isinstance(node, Sub):
        return (
            f"{_wrap(node.left, _PREC_ADD)} - {_wrap(node.right, _PREC_ADD + 1)}",
            _PREC_ADD,
        )
    if isinstance(node, Mul):
        return (
            f"{_wrap(node.left, _PREC_MUL)}*{_wrap(node.right, _PREC_MUL + 1)}",
            _PREC_MUL,
        )
    if isinstance(node, Div):
        return (
            f"{_wrap(node.left, _PREC_MUL)}/{_wrap(node.right, _PREC_MUL + 1)}",
            _PREC_MUL,
        )
    if isinstance(node, Neg):
        return (f"-{_wrap(node.operand, _PREC_UNARY)}", _PREC_UNARY)
    if isinstance(node, Pow):
        return (f"{_wrap(node.base, _PREC_POW + 1)}^{node.exponent}", _PREC_POW)
    if isinstance(node, Call):
        return (f"{node.func}({render(node.arg)})", _PREC_ATOM)
    if isinstance(node, Patch):
        entries = ",".join(
            f"({i},{_render(Const(v))[0]})" for i, v in node.entries
        )
        return (f"patch[{entries}]{{{render(node.base)}}}", _PREC_ATOM)
    raise UnsupportedFormError(f"cannot render {type(node).__name__}")


def _wrap(node, min_prec):
    text, prec = _render(node)
    if prec < min_prec:
        return f"({text})"
    return text
