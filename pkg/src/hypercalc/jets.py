"""Truncated-jet differential calculus.

A jet of order K at a point p packages the coefficients of f(p + e) as a
degree-K polynomial in an infinitesimal increment e: coefficient j equals
the j-th derivative over j factorial. Field operations on jets are exact
over rationals; lifting through exp/ln/sin/cos/sqrt forces binary floats.
Derivatives, differentials, higher-order increment quotients, and 0/0
limits all read straight off jet coefficients.
"""

import math
from fractions import Fraction
from math import comb, factorial
from typing import NamedTuple, Union

from .errors import (
    DomainError,
    KinkError,
    NotIndeterminateError,
    OrderExhaustedError,
    SingularError,
    UnsupportedFormError,
)
from .expressions import (
    Add,
    Call,
    Const,
    Div,
    Mul,
    Neg,
    Node,
    Pow,
    Sub,
    Var,
    evaluate_exact,
    is_rational_expr,
)
from . import hyperfield

Scalar = Union[Fraction, float]

FLOAT_ZERO_TOL = 1e-12  # absolute floor for "this coefficient vanished"


class Jet:
    """Order-K truncated power series in an infinitesimal increment."""

    __slots__ = ("base_point", "coeffs", "exact")

    def __init__(self, base_point, coeffs, exact):
        self.base_point = base_point
        self.coeffs = tuple(coeffs)
        self.exact = exact

    @property
    def order(self):
        return len(self.coeffs) - 1

    @property
    def value(self):
        return self.coeffs[0]

    def __repr__(self):
        kind = "exact" if self.exact else "float"
        return f"Jet({kind}, {self.coeffs})"

    # -- mode handling ---------------------------------------------------

    def to_float(self):
        if not self.exact:
            return self
        return Jet(float(self.base_point), tuple(float(c) for c in self.coeffs), False)

    @staticmethod
    def constant(c, like):
        if like.exact:
            return Jet(like.base_point, (Fraction(c),) + (Fraction(0),) * like.order, True)
        return Jet(like.base_point, (float(c),) + (0.0,) * like.order, False)

    @staticmethod
    def variable(p, order):
        exact = isinstance(p, (int, Fraction))
        zero = Fraction(0) if exact else 0.0
        one = Fraction(1) if exact else 1.0
        coeffs = [Fraction(p) if exact else float(p)] + [zero] * order
        if order >= 1:
            coeffs[1] = one
        return Jet(coeffs[0], coeffs, exact)

    def _pair(self, other):
        if not isinstance(other, Jet):
            other = Jet.constant(other, self)
        a, b = self, other
        if a.exact != b.exact:
            a, b = a.to_float(), b.to_float()
        k = min(a.order, b.order)
        return a.coeffs[: k + 1], b.coeffs[: k + 1], a

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        ca, cb, like = self._pair(other)
        return Jet(like.base_point, tuple(x + y for x, y in zip(ca, cb)), like.exact)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.base_point, tuple(-c for c in self.coeffs), self.exact)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -Jet.constant(other, self))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        ca, cb, like = self._pair(other)
        n = len(ca)
        zero = Fraction(0) if like.exact else 0.0
        out = [zero] * n
        for i, x in enumerate(ca):
            if x == 0:
                continue
            for j in range(n - i):
                out[i + j] += x * cb[j]
        return Jet(like.base_point, tuple(out), like.exact)

    __rmul__ = __mul__

    def __truediv__(self, other):
        ca, cb, like = self._pair(other)
        if cb[0] == 0:
            raise DomainError("division by a jet with zero constant term")
        n = len(ca)
        zero = Fraction(0) if like.exact else 0.0
        out = [zero] * n
        for i in range(n):
            acc = ca[i]
            for j in range(i):
                acc -= out[j] * cb[i - j]
            out[i] = acc / cb[0]
        return Jet(like.base_point, tuple(out), like.exact)

    def __rtruediv__(self, other):
        return Jet.constant(other, self) / self

    def __pow__(self, k):
        if not isinstance(k, int):
            raise TypeError("jet powers must be integers")
        if k < 0:
            return Jet.constant(1, self) / self ** (-k)
        out = Jet.constant(1, self)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out


def _nilpotent_powers(v):
    """[1, v, v**2, ..., v**order] for a jet with zero constant term."""
    out = [Jet.constant(1, v)]
    for _ in range(v.order):
        out.append(out[-1] * v)
    return out


def _split_float(u):
    u = u.to_float()
    c0 = u.coeffs[0]
    v = Jet(u.base_point, (0.0,) + u.coeffs[1:], False)
    return c0, v


def jet_exp(u):
    c0, v = _split_float(u)
    powers = _nilpotent_powers(v)
    series = sum(
        (powers[j] * (1.0 / factorial(j)) for j in range(1, len(powers))),
        Jet.constant(1, v),
    )
    return series * math.exp(c0)


def jet_ln(u):
    c0, v = _split_float(u)
    if c0 <= 0.0:
        raise DomainError("ln of a non-positive jet value")
    powers = _nilpotent_powers(v)
    acc = Jet.constant(math.log(c0), v)
    for j in range(1, len(powers)):
        acc = acc + powers[j] * ((-1.0) ** (j + 1) / (j * c0 ** j))
    return acc


def _sin_cos_nilpotent(v):
    powers = _nilpotent_powers(v)
    s = Jet.constant(0, v)
    c = Jet.constant(1, v)
    for j in range(1, len(powers)):
        if j % 2 == 1:
            s = s + powers[j] * ((-1.0) ** ((j - 1) // 2) / factorial(j))
        else:
            c = c + powers[j] * ((-1.0) ** (j // 2) / factorial(j))
    return s, c


def jet_sin(u):
    c0, v = _split_float(u)
    sv, cv = _sin_cos_nilpotent(v)
    return cv * math.sin(c0) + sv * math.cos(c0)


def jet_cos(u):
    c0, v = _split_float(u)
    sv, cv = _sin_cos_nilpotent(v)
    return cv * math.cos(c0) - sv * math.sin(c0)


def jet_sqrt(u):
    c0, v = _split_float(u)
    if c0 < 0.0:
        raise DomainError("sqrt of a negative jet value")
    if c0 == 0.0:
        raise DomainError("sqrt is not differentiable at zero")
    powers = _nilpotent_powers(v)
    acc = Jet.constant(1, v)
    coeff = 1.0
    for j in range(1, len(powers)):
        coeff *= (1.5 - j) / j  # binomial(1/2, j) built up multiplicatively
        acc = acc + powers[j] * (coeff / c0 ** j)
    return acc * math.sqrt(c0)


def jet_abs(u):
    c0 = u.coeffs[0]
    if c0 > 0:
        return u
    if c0 < 0:
        return -u
    raise KinkError("abs differentiated at its corner")


_JET_CALLS = {
    "exp": jet_exp,
    "ln": jet_ln,
    "sin": jet_sin,
    "cos": jet_cos,
    "sqrt": jet_sqrt,
    "abs": jet_abs,
}


def evaluate_jet(node: Node, x: Jet) -> Jet:
    if isinstance(node, Const):
        return Jet.constant(node.value, x)
    if isinstance(node, Var):
        if node.name != "x":
            raise UnsupportedFormError(f"variable {node.name!r} in a function")
        return x
    if isinstance(node, Add):
        return evaluate_jet(node.left, x) + evaluate_jet(node.right, x)
    if isinstance(node, Sub):
        return evaluate_jet(node.left, x) - evaluate_jet(node.right, x)
    if isinstance(node, Mul):
        return evaluate_jet(node.left, x) * evaluate_jet(node.right, x)
    if isinstance(node, Div):
        return evaluate_jet(node.left, x) / evaluate_jet(node.right, x)
    if isinstance(node, Neg):
        return -evaluate_jet(node.operand, x)
    if isinstance(node, Pow):
        return evaluate_jet(node.base, x) ** node.exponent
    if isinstance(node, Call):
        return _JET_CALLS[node.func](evaluate_jet(node.arg, x))
    raise UnsupportedFormError(f"{type(node).__name__} in a function expression")


def jet_lift(f: Node, p: Scalar, order: int) -> Jet:
    """f(p + e) truncated at the given order; coefficient j is the j-th
    derivative of f at p divided by j factorial."""
    if order < 1:
        raise ValueError("jet order must be at least 1")
    return evaluate_jet(f, Jet.variable(p, order))


def derivative(f: Node, p: Scalar) -> Scalar:
    """Standard part of the increment quotient (f(p+e) - f(p)) / e, which
    the order-1 jet carries as its linear coefficient."""
    return jet_lift(f, p, 1).coeffs[1]


class Differential(NamedTuple):
    slope: Scalar  # df = slope * dx
    tail: tuple    # quadratic-and-higher jet coefficients
    description: str


def differential(f: Node, p: Scalar, order: int = 4) -> Differential:
    """First-order approximation data at p: df = f'(p) dx, plus the
    higher-order coefficients that measure how far the increment deviates
    from its differential."""
    try:
        jet = jet_lift(f, p, order)
    except DomainError:
        jet = jet_lift(f, p, 1)
    slope = jet.coeffs[1]
    tail = jet.coeffs[2:]
    return Differential(slope, tail, f"df = ({slope})*dx")


def nth_derivative_via_increments(f: Node, p: Scalar, n: int) -> Scalar:
    """n-th derivative computed the long way: the alternating binomial
    combination of f(p + k*e) for k = 0..n, divided by e**n, standard part
    taken. Cross-checked against n! times the top jet coefficient."""
    if n < 1:
        raise ValueError("order must be at least 1")
    jet = jet_lift(f, p, n)
    zero = Fraction(0) if jet.exact else 0.0
    acc = [zero] * (n + 1)
    for k in range(n + 1):
        w = (-1) ** (n - k) * comb(n, k)
        # f(p + k*e): the shift rescales coefficient j by k**j
        for j, c in enumerate(jet.coeffs):
            acc[j] += w * c * k ** j
    top = acc[n]
    if jet.exact:
        assert all(c == 0 for c in acc[:n]), "binomial cancellation failed"
        assert top == factorial(n) * jet.coeffs[n]
    else:
        scale = max(1.0, max(abs(c) for c in jet.coeffs))
        assert all(abs(c) <= 1e-9 * scale for c in acc[:n])
    return top


def _first_nonzero(coeffs, exact, zero_tol):
    for i, c in enumerate(coeffs):
        if (c != 0) if exact else (abs(c) > zero_tol):
            return i
    return None


def lhospital(
    f: Node,
    g: Node,
    a: Scalar,
    max_order: int = 16,
    zero_tol: float = FLOAT_ZERO_TOL,
):
    """0/0 limit of f/g as x tends to a from above.

    Jets of both functions are taken at adaptive order; the limit is the
    ratio of the first surviving coefficients. A deeper zero upstairs gives
    0, a deeper zero downstairs gives a signed infinity (sign read from the
    leading coefficients with the increment taken positive).
    """
    order = 4
    while True:
        jf = jet_lift(f, a, order)
        jg = jet_lift(g, a, order)
        for jet, name in ((jf, f), (jg, g)):
            c0 = jet.coeffs[0]
            vanished = (c0 == 0) if jet.exact else (abs(c0) <= zero_tol)
            if not vanished:
                raise NotIndeterminateError(
                    "not a 0/0 form: evaluate the quotient directly"
                )
        tol = zero_tol
        of = _first_nonzero(jf.coeffs, jf.exact, tol)
        og = _first_nonzero(jg.coeffs, jg.exact, tol)
        if og is not None and (of is not None or order >= max_order):
            break
        if order >= max_order:
            raise OrderExhaustedError(
                f"no surviving coefficient up to order {max_order}"
            )
        order = min(max_order, order * 2)
    if of is None:
        # f vanishes to higher order than anything g shows
        return 0.0 if not jf.exact else Fraction(0)
    if of == og:
        return jf.coeffs[of] / jg.coeffs[og]
    if of > og:
        return 0.0 if not jf.exact else Fraction(0)
    sign = 1 if (jf.coeffs[of] > 0) == (jg.coeffs[og] > 0) else -1
    return math.inf if sign > 0 else -math.inf


def microcontinuity_probe(f: Node, p) -> bool:
    """Continuity of a rational function at a standard rational point,
    decided exactly: f(p + e) and f(p - e) must both be infinitely close to
    f(p) for the canonical positive infinitesimal e."""
    if not is_rational_expr(f):
        raise UnsupportedFormError("probe requires a rational function")
    p = Fraction(p)
    try:
        fp = evaluate_exact(f, p)
    except DomainError as exc:
        raise SingularError(f"function undefined at {p}") from exc
    base = hyperfield.HyperRat.from_rational(p)
    for point in (base + hyperfield.EPSILON, base - hyperfield.EPSILON):
        image = hyperfield.compose_rational(f, point)
        if not hyperfield.infinitely_close(image, hyperfield.HyperRat.from_rational(fp)):
            return False
    return True
