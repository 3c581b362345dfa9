"""Closed-form sequences as ultrapower representatives.

A sequence expression is normalized, per parity class (even n / odd n), to a
quotient of exponential polynomials sum(c * r**n * n**k) plus a finite patch
list and a finite pole set. On this fragment, equality and order of the
represented hyperreals are decidable: either the verdict is forced by the
cofinite filter (and an explicit exception bound is produced), or the two
parity classes disagree eventually and the comparison genuinely depends on
the chosen free ultrafilter, which is reported rather than resolved.

Parity (period two) is the only oscillation modeled; `altsign` already
exhibits every ultrafilter-dependence phenomenon the engine cares about
while keeping normal forms decidable.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Optional

from . import polys as P
from .errors import (
    DependenceError,
    DivisionByZeroError,
    NoClosedFormError,
    PoleError,
    UnknownSumError,
    UnsupportedFormError,
)
from .expressions import (
    Add,
    AltSign,
    Const,
    Div,
    Geom,
    Mul,
    Neg,
    Node,
    Patch,
    Pow,
    Sub,
    Var,
)
from .hyperfield import HyperExp, HyperRat

PLUS_INF = "+inf"
MINUS_INF = "-inf"

_SCAN_CAP = 1 << 40


# -- exponential polynomials: {(base, power): coeff} -------------------------

def ep_norm(d):
    return {key: c for key, c in d.items() if c != 0}


def ep_const(c):
    c = Fraction(c)
    return {(Fraction(1), 0): c} if c else {}


def ep_add(a, b):
    out = dict(a)
    for key, c in b.items():
        out[key] = out.get(key, Fraction(0)) + c
    return ep_norm(out)


def ep_neg(a):
    return {key: -c for key, c in a.items()}


def ep_scale(a, s):
    s = Fraction(s)
    if not s:
        return {}
    return {key: c * s for key, c in a.items()}


def ep_mul(a, b):
    out = {}
    for (r1, k1), c1 in a.items():
        for (r2, k2), c2 in b.items():
            key = (r1 * r2, k1 + k2)
            out[key] = out.get(key, Fraction(0)) + c1 * c2
    return ep_norm(out)


def ep_eval(a, n):
    total = Fraction(0)
    for (r, k), c in a.items():
        total += c * r ** n * Fraction(n) ** k
    return total


def ep_shift(a):
    """Substitute n+1 for n."""
    out = {}
    for (r, k), c in a.items():
        cr = c * r
        for j in range(k + 1):
            key = (r, j)
            out[key] = out.get(key, Fraction(0)) + cr * comb(k, j)
    return ep_norm(out)


def ep_is_poly(a):
    return all(r == 1 for (r, _k) in a)


def ep_to_poly(a):
    deg = max((k for (_r, k) in a), default=-1)
    coeffs = [Fraction(0)] * (deg + 1)
    for (_r, k), c in a.items():
        coeffs[k] = c
    return P.pnorm(coeffs)


def poly_to_ep(p, base=Fraction(1)):
    return ep_norm({(base, k): c for k, c in enumerate(p)})


def ep_dominant(a):
    key = max(a)  # lexicographic: larger base wins, then larger power
    return key, a[key]


def ep_eventual_sign(a):
    """(sign, bound): the sign of the dominant term, plus an index from
    which every evaluation provably has that sign.

    The bound is certified without root isolation: scan (then double) until
    the dominant term outweighs the sum of the others and every ratio
    term/dominant is non-increasing from there on.
    """
    if not a:
        return 0, 0
    (rd, kd), cd = ep_dominant(a)
    sign = 1 if cd > 0 else -1
    others = [(r, k, abs(c)) for (r, k), c in a.items() if (r, k) != (rd, kd)]
    if not others:
        return sign, (1 if kd > 0 else 0)

    def h_dom(n):
        return abs(cd) * rd ** n * Fraction(n) ** kd

    def certified(n):
        hd, hd1 = h_dom(n), h_dom(n + 1)
        total = Fraction(0)
        for r, k, c in others:
            h = c * r ** n * Fraction(n) ** k
            h1 = c * r ** (n + 1) * Fraction(n + 1) ** k
            if h1 * hd > h * hd1:  # ratio to dominant still growing
                return False
            total += h
        return total < hd

    n = 1
    while n <= 64:
        if certified(n):
            return sign, n
        n += 1
    while n <= _SCAN_CAP:
        if certified(n):
            return sign, n
        n *= 2
    raise UnsupportedFormError("eventual sign did not stabilize within scan cap")


# -- quotients of exponential polynomials ------------------------------------

def q_canon(num, den):
    if not den:
        raise DivisionByZeroError("sequence quotient with zero denominator")
    if not num:
        return ({}, ep_const(1))
    gmin = min(r for (r, _k) in den)
    if gmin != 1:
        den = {(r / gmin, k): c for (r, k), c in den.items()}
        num = {(r / gmin, k): c for (r, k), c in num.items()}
    if ep_is_poly(den):
        denp = ep_to_poly(den)
        if ep_is_poly(num):
            nump = ep_to_poly(num)
            g = P.pgcd(nump, denp)
            if P.pdeg(g) > 0:
                nump, _ = P.pdivmod(nump, g)
                denp, _ = P.pdivmod(denp, g)
            lead = P.plead(denp)
            if lead != 1:
                nump = P.pscale(nump, 1 / lead)
                denp = P.pscale(denp, 1 / lead)
            return (poly_to_ep(nump), poly_to_ep(denp))
        lead = P.plead(denp)
        if lead != 1:
            num = ep_scale(num, 1 / lead)
            den = ep_scale(den, 1 / lead)
        return (num, den)
    _key, cd = ep_dominant(den)
    if cd != 1:
        num = ep_scale(num, 1 / cd)
        den = ep_scale(den, 1 / cd)
    return (num, den)


Q_ZERO = ({}, ep_const(1))
Q_ONE = (ep_const(1), ep_const(1))


def q_const(c):
    return (ep_const(c), ep_const(1))


def q_add(a, b):
    na, da = a
    nb, db = b
    return q_canon(ep_add(ep_mul(na, db), ep_mul(nb, da)), ep_mul(da, db))


def q_neg(a):
    return (ep_neg(a[0]), a[1])


def q_sub(a, b):
    return q_add(a, q_neg(b))


def q_mul(a, b):
    return q_canon(ep_mul(a[0], b[0]), ep_mul(a[1], b[1]))


def q_div(a, b):
    if not b[0]:
        raise DivisionByZeroError(
            "division by a sequence that vanishes identically on a parity class"
        )
    return q_canon(ep_mul(a[0], b[1]), ep_mul(a[1], b[0]))


def q_pow(a, k):
    if k < 0:
        return q_div(Q_ONE, q_pow(a, -k))
    out = Q_ONE
    for _ in range(k):
        out = q_mul(out, a)
    return out


def q_shift(a):
    return q_canon(ep_shift(a[0]), ep_shift(a[1]))


def q_is_zero(a):
    return not a[0]


def q_eq(a, b):
    return not ep_add(ep_mul(a[0], b[1]), ep_neg(ep_mul(b[0], a[1])))


def q_eval(a, n):
    den = ep_eval(a[1], n)
    if den == 0:
        raise PoleError(f"quotient denominator vanishes at index {n}")
    return ep_eval(a[0], n) / den


def q_eventual_sign(a):
    if not a[0]:
        return 0, 0
    sn, bn = ep_eventual_sign(a[0])
    sd, bd = ep_eventual_sign(a[1])
    return sn * sd, max(bn, bd)


def q_limit(a):
    """Limit as n grows, in the extended sense: a Fraction, PLUS_INF, or
    MINUS_INF. Quotients of exponential polynomials always have one."""
    if not a[0]:
        return Fraction(0)
    (rn, kn), cn = ep_dominant(a[0])
    (rd, kd), cd = ep_dominant(a[1])
    if rn > rd or (rn == rd and kn > kd):
        return PLUS_INF if cn * cd > 0 else MINUS_INF
    if rn < rd or kn < kd:
        return Fraction(0)
    return cn / cd


# -- normal forms -------------------------------------------------------------

@dataclass(frozen=True)
class NormalForm:
    """Per-parity quotient closed forms plus finite exceptional indices."""

    even: tuple
    odd: tuple
    patches: dict = field(default_factory=dict)
    poles: frozenset = field(default_factory=frozenset)

    def value_at(self, n):
        if n in self.patches:
            return self.patches[n]
        if n in self.poles:
            raise PoleError(f"sequence undefined at index {n}")
        return q_eval(self.even if n % 2 == 0 else self.odd, n)

    def exception_indices(self):
        return set(self.patches) | set(self.poles)

    def uniform(self):
        return q_eq(self.even, self.odd)


def _make_nf(even, odd, patches, poles):
    """Drop patches that restate the closed form; keep poles disjoint."""
    poles = frozenset(poles) - set(patches)
    cleaned = {}
    for i, v in patches.items():
        q = even if i % 2 == 0 else odd
        try:
            if q_eval(q, i) == v:
                continue
        except PoleError:
            pass
        cleaned[i] = Fraction(v)
    return NormalForm(even, odd, cleaned, poles)


def _value_or_none(nf, i):
    try:
        return nf.value_at(i)
    except PoleError:
        return None


def _nf_binop(a, b, qop, vop):
    even = qop(a.even, b.even)
    odd = qop(a.odd, b.odd)
    patches, poles = {}, set()
    for i in a.exception_indices() | b.exception_indices():
        va, vb = _value_or_none(a, i), _value_or_none(b, i)
        if va is None or vb is None:
            poles.add(i)
            continue
        v = vop(va, vb)
        if v is None:
            poles.add(i)
        else:
            patches[i] = v
    return even, odd, patches, poles


def _div_zero_scan(b):
    """Indices where the divisor sequence evaluates to zero (finitely many,
    certified by the eventual-sign bound of each class numerator)."""
    zeros = set()
    for parity, q in ((0, b.even), (1, b.odd)):
        if not q[0]:
            raise DivisionByZeroError(
                "division by a sequence that vanishes identically on a parity class"
            )
        _sign, bound = ep_eventual_sign(q[0])
        for n in range(parity, bound + 1, 2):
            if n in b.patches or n in b.poles:
                continue
            if ep_eval(q[0], n) == 0:
                zeros.add(n)
    return zeros


def normalize(expr: Node) -> NormalForm:
    """Rewrite a sequence expression into its per-parity normal form."""
    if isinstance(expr, Const):
        q = q_const(expr.value)
        return NormalForm(q, q)
    if isinstance(expr, Var):
        if expr.name != "n":
            raise UnsupportedFormError(f"variable {expr.name!r} in a sequence")
        q = (ep_norm({(Fraction(1), 1): Fraction(1)}), ep_const(1))
        return NormalForm(q, q)
    if isinstance(expr, Geom):
        if expr.ratio <= 0:
            raise UnsupportedFormError("geometric ratios must be positive")
        q = (ep_norm({(expr.ratio, 0): Fraction(1)}), ep_const(1))
        return NormalForm(q, q)
    if isinstance(expr, AltSign):
        return NormalForm(q_const(1), q_const(-1))
    if isinstance(expr, Neg):
        a = normalize(expr.operand)
        return _make_nf(
            q_neg(a.even), q_neg(a.odd),
            {i: -v for i, v in a.patches.items()}, a.poles,
        )
    if isinstance(expr, Add):
        a, b = normalize(expr.left), normalize(expr.right)
        return _make_nf(*_nf_binop(a, b, q_add, lambda x, y: x + y))
    if isinstance(expr, Sub):
        a, b = normalize(expr.left), normalize(expr.right)
        return _make_nf(*_nf_binop(a, b, q_sub, lambda x, y: x - y))
    if isinstance(expr, Mul):
        a, b = normalize(expr.left), normalize(expr.right)
        return _make_nf(*_nf_binop(a, b, q_mul, lambda x, y: x * y))
    if isinstance(expr, Div):
        a, b = normalize(expr.left), normalize(expr.right)
        even, odd, patches, poles = _nf_binop(
            a, b, q_div, lambda x, y: (x / y) if y != 0 else None
        )
        handled = set(patches) | poles
        for n in _div_zero_scan(b):
            if n not in handled:
                poles.add(n)
        return _make_nf(even, odd, patches, poles)
    if isinstance(expr, Pow):
        a = normalize(expr.base)
        k = expr.exponent
        if k >= 0:
            patches = {i: v ** k for i, v in a.patches.items()}
            return _make_nf(q_pow(a.even, k), q_pow(a.odd, k), patches, a.poles)
        return normalize(Div(Const(Fraction(1)), Pow(expr.base, -k)))
    if isinstance(expr, Patch):
        a = normalize(expr.base)
        patches = dict(a.patches)
        poles = set(a.poles)
        for i, v in expr.entries:
            patches[i] = Fraction(v)
            poles.discard(i)
        return _make_nf(a.even, a.odd, patches, poles)
    raise UnsupportedFormError(f"{type(expr).__name__} in a sequence expression")


def seq_value(expr: Node, n: int):
    """Direct pointwise evaluation of a sequence expression (the oracle the
    normal forms are checked against)."""
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Var):
        return Fraction(n)
    if isinstance(expr, Geom):
        return expr.ratio ** n
    if isinstance(expr, AltSign):
        return Fraction(-1) ** n
    if isinstance(expr, Neg):
        return -seq_value(expr.operand, n)
    if isinstance(expr, Add):
        return seq_value(expr.left, n) + seq_value(expr.right, n)
    if isinstance(expr, Sub):
        return seq_value(expr.left, n) - seq_value(expr.right, n)
    if isinstance(expr, Mul):
        return seq_value(expr.left, n) * seq_value(expr.right, n)
    if isinstance(expr, Div):
        den = seq_value(expr.right, n)
        if den == 0:
            raise PoleError(f"sequence undefined at index {n}")
        return seq_value(expr.left, n) / den
    if isinstance(expr, Pow):
        base = seq_value(expr.base, n)
        if expr.exponent < 0 and base == 0:
            raise PoleError(f"sequence undefined at index {n}")
        return base ** expr.exponent
    if isinstance(expr, Patch):
        for i, v in expr.entries:
            if i == n:
                return v
        return seq_value(expr.base, n)
    raise UnsupportedFormError(f"{type(expr).__name__} in a sequence expression")


# -- comparison ----------------------------------------------------------------

RELATION_EQUAL = "equal"
RELATION_LESS = "less"
RELATION_GREATER = "greater"
ULTRAFILTER_DEPENDENT = "ultrafilter_dependent"


@dataclass(frozen=True)
class FrechetVerdict:
    relation: str
    exception_bound: int
    witness_classes: Optional[dict] = None

    def decisive(self):
        return self.relation != ULTRAFILTER_DEPENDENT


def _class_relation(sign):
    if sign == 0:
        return RELATION_EQUAL
    return RELATION_GREATER if sign > 0 else RELATION_LESS


def frechet_compare(a: Node, b: Node) -> FrechetVerdict:
    """Eventual relation of two sequences, decided per parity class.

    Matching classes give a decisive verdict valid on a cofinite set (all
    indices past the exception bound). Conflicting classes mean the verdict
    depends on which parity class the chosen free ultrafilter keeps, and
    both relations occur infinitely often.
    """
    na, nb = normalize(a), normalize(b)
    se, be = q_eventual_sign(q_sub(na.even, nb.even))
    so, bo = q_eventual_sign(q_sub(na.odd, nb.odd))
    exceptions = na.exception_indices() | nb.exception_indices()
    bound = max([be, bo] + [i + 1 for i in exceptions])
    rel_even, rel_odd = _class_relation(se), _class_relation(so)
    if rel_even == rel_odd:
        return FrechetVerdict(rel_even, bound)
    return FrechetVerdict(
        ULTRAFILTER_DEPENDENT, bound, {"even": rel_even, "odd": rel_odd}
    )


# -- the quotient map into the field ------------------------------------------

def qep_to_field(q):
    """A class closed form as a field element. Requires a polynomial
    denominator; geometric denominators leave the representable set."""
    num, den = q
    if not ep_is_poly(den):
        raise UnsupportedFormError(
            "quotient with a geometric denominator has no field representative"
        )
    denp = ep_to_poly(den)
    groups = {}
    for (r, k), c in num.items():
        groups.setdefault(r, {})[k] = c
    if not groups:
        return HyperRat.from_rational(0)
    if set(groups) == {Fraction(1)}:
        coeffs = groups[Fraction(1)]
        nump = P.pnorm(
            [coeffs.get(k, Fraction(0)) for k in range(max(coeffs) + 1)]
        )
        return HyperRat(nump, denp)
    terms = []
    for r, coeffs in groups.items():
        nump = P.pnorm([coeffs.get(k, Fraction(0)) for k in range(max(coeffs) + 1)])
        terms.append((r, HyperRat(nump, denp)))
    return HyperExp(terms)


def to_hyper(expr: Node):
    """The hyperreal represented by a sequence whose parity classes agree.

    Patches are discarded: they change the representative on a finite set
    only. A parity disagreement raises, carrying both candidate elements."""
    nf = normalize(expr)
    if not nf.uniform():
        candidates = {
            "even": qep_to_field(nf.even),
            "odd": qep_to_field(nf.odd),
        }
        raise DependenceError(
            "sequence represents different elements under different free "
            "ultrafilters",
            candidates=candidates,
        )
    return qep_to_field(nf.even)


# -- convergence ----------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceReport:
    bounded: bool
    limit_points: tuple  # Fractions and/or the infinity markers, sorted
    converges_to: Optional[Fraction]
    diverges_to: Optional[str]
    liminf: object
    limsup: object
    cauchy: bool


def _ext_key(v):
    if v == MINUS_INF:
        return (0, Fraction(0))
    if v == PLUS_INF:
        return (2, Fraction(0))
    return (1, v)


def _is_inf(v):
    return isinstance(v, str)


def analyze(expr: Node) -> ConvergenceReport:
    """Convergence data read off the values at infinite indices: the limit
    points are the standard parts (extended with the infinity markers) of
    the per-parity closed forms."""
    nf = normalize(expr)
    le, lo = q_limit(nf.even), q_limit(nf.odd)
    points = sorted({le, lo}, key=_ext_key)
    bounded = not any(_is_inf(v) for v in points)
    converges_to = None
    diverges_to = None
    if le == lo:
        if _is_inf(le):
            diverges_to = le
        else:
            converges_to = le
    return ConvergenceReport(
        bounded=bounded,
        limit_points=tuple(points),
        converges_to=converges_to,
        diverges_to=diverges_to,
        liminf=points[0],
        limsup=points[-1],
        cauchy=converges_to is not None,
    )


def tolerance_bound(expr: Node, limit, tol) -> int:
    """An index past which |S(n) - limit| < tol, witnessing that the set of
    such indices is cofinite."""
    tol = Fraction(tol)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    nf = normalize(expr)
    bounds = []
    for q in (nf.even, nf.odd):
        d = q_sub(q, q_const(limit))
        s_lo, b_lo = q_eventual_sign(q_add(d, q_const(tol)))
        s_hi, b_hi = q_eventual_sign(q_sub(d, q_const(tol)))
        if s_lo <= 0 or s_hi >= 0:
            raise ValueError("sequence does not settle within tol of the limit")
        bounds.extend([b_lo, b_hi])
    exceptions = [i + 1 for i in nf.exception_indices()]
    return max(bounds + exceptions)


# -- series ----------------------------------------------------------------------

def _geo_antidifference(k, r):
    """Polynomial q with r*q(j+1) - q(j) = j**k, so that G(j) = r**j * q(j)
    telescopes the geometric-power term."""
    qs = [Fraction(0)] * (k + 1)
    qs[k] = Fraction(1) / (r - 1)
    for t in range(k - 1, -1, -1):
        total = sum(comb(i, t) * qs[i] for i in range(t + 1, k + 1))
        qs[t] = -r * total / (r - 1)
    return P.pnorm(qs)


def ep_sum(a):
    """Closed form of sum(a(k) for k in 0..n) as an exponential polynomial
    in n; exact for every n >= -1 (empty sum included)."""
    out = {}
    for (r, k), c in a.items():
        if r == 1:
            out = ep_add(out, poly_to_ep(P.pscale(P.power_sum_poly(k), c)))
        else:
            q = _geo_antidifference(k, r)
            head = poly_to_ep(P.pscale(P.pshift(q, 1), c * r), base=r)
            tail = ep_const(-c * P.peval(q, Fraction(0)))
            out = ep_add(out, ep_add(head, tail))
    return out


def _subst_half(sum_ep, delta, sqrt_map):
    """Substitute m = (n - delta)/2 into an exponential polynomial in m.

    Every base must appear in sqrt_map (it is a known perfect square), so
    the result is again an exponential polynomial in n."""
    out = {}
    for (rho, t), c in sum_ep.items():
        root = sqrt_map[rho]
        scale = c / root ** delta / Fraction(2) ** t
        for s in range(t + 1):
            coeff = scale * comb(t, s) * Fraction(-delta) ** (t - s)
            key = (root, s)
            out[key] = out.get(key, Fraction(0)) + coeff
    return ep_norm(out)


def _parity_prefix_sums(class_ep, parity):
    """Closed forms (even_n, odd_n) of sum of class_ep(k) over k <= n with
    k restricted to the given parity."""
    even_out, odd_out = {}, {}
    for (r, k), c in class_ep.items():
        rho = r * r
        sqrt_map = {Fraction(1): Fraction(1), rho: r}
        if parity == 0:
            # k = 2j: c * r**(2j) * (2j)**k
            inner = ep_norm({(rho, k): c * Fraction(2) ** k})
            s = ep_sum(inner)
            even_out = ep_add(even_out, _subst_half(s, 0, sqrt_map))
            odd_out = ep_add(odd_out, _subst_half(s, 1, sqrt_map))
        else:
            # k = 2j+1: c * r**(2j+1) * (2j+1)**k
            inner = {}
            for s_pow in range(k + 1):
                key = (rho, s_pow)
                inner[key] = (
                    inner.get(key, Fraction(0))
                    + c * r * comb(k, s_pow) * Fraction(2) ** s_pow
                )
            s = ep_sum(ep_norm(inner))
            even_out = ep_add(even_out, _subst_half(s, 2, sqrt_map))
            odd_out = ep_add(odd_out, _subst_half(s, 1, sqrt_map))
    return even_out, odd_out


def _closed_prefix_sum(nf):
    """Per-parity closed forms for the partial sums of a patch-free normal
    form whose class denominators are trivial."""
    for q in (nf.even, nf.odd):
        if q[1] != ep_const(1):
            raise NoClosedFormError(
                "term has a non-trivial denominator; supply an antidifference"
            )
    ee, eo = _parity_prefix_sums(nf.even[0], 0)
    oe, oo = _parity_prefix_sums(nf.odd[0], 1)
    return ep_add(ee, oe), ep_add(eo, oo)


def _nf_shift(nf):
    """Normal form of n -> s(n+1); parity classes swap."""
    even = q_shift(nf.odd)
    odd = q_shift(nf.even)
    patches = {i - 1: v for i, v in nf.patches.items() if i >= 1}
    poles = frozenset(i - 1 for i in nf.poles if i >= 1)
    return _make_nf(even, odd, patches, poles)


def series_partial_sum(term: Node, antidifference: Optional[Node] = None) -> Node:
    """Closed form A(n) = sum(term(k) for k in 0..n) as a sequence
    expression.

    Three routes: polynomial and geometric-polynomial terms are summed
    directly (power-sum closed forms and geometric telescoping); otherwise a
    user-supplied antidifference g with term(k) = g(k+1) - g(k) is verified
    symbolically and telescoped. Anything else has no closed form here.
    """
    nf = normalize(term)
    uncovered = set(nf.poles)
    if uncovered:
        raise NoClosedFormError(
            f"term is undefined at indices {sorted(uncovered)}; patch them first"
        )
    if antidifference is not None:
        g = normalize(antidifference)
        shift_g = _nf_shift(g)
        telescopes = q_eq(q_sub(shift_g.even, g.even), nf.even) and q_eq(
            q_sub(shift_g.odd, g.odd), nf.odd
        )
        if not telescopes:
            raise UnsupportedFormError(
                "antidifference does not telescope to the term"
            )
        try:
            g0 = q_eval(g.even, 0)
        except PoleError:
            raise NoClosedFormError("antidifference must be defined at index 0")
        closed = NormalForm(
            q_sub(shift_g.even, q_const(g0)), q_sub(shift_g.odd, q_const(g0))
        )
        base_exceptions = set(nf.patches)
    else:
        even, odd = _closed_prefix_sum(
            NormalForm(nf.even, nf.odd)  # patch-free view
        )
        closed = NormalForm((even, ep_const(1)), (odd, ep_const(1)))
        base_exceptions = set(nf.patches)
    # fold the finitely many patched term values into the running sum
    start = max([i + 1 for i in base_exceptions], default=0)
    drift = Fraction(0)
    for i in sorted(base_exceptions):
        actual = nf.value_at(i)
        closed_step = _closed_step(closed, i)
        drift += actual - closed_step
    even = q_add(closed.even, q_const(drift))
    odd = q_add(closed.odd, q_const(drift))
    patches = {}
    running = Fraction(0)
    for n in range(start):
        running += nf.value_at(n)
        patches[n] = running
    result = _make_nf(even, odd, patches, frozenset())
    return nf_to_seqexpr(result)


def _closed_step(closed_nf, i):
    """closed(i) - closed(i-1): the term the closed form believes is at i."""
    cur = q_eval(closed_nf.even if i % 2 == 0 else closed_nf.odd, i)
    if i == 0:
        return cur
    prev = q_eval(closed_nf.even if (i - 1) % 2 == 0 else closed_nf.odd, i - 1)
    return cur - prev


# -- normal form back to an expression -------------------------------------------

def _frac_expr(c):
    c = Fraction(c)
    if c < 0:
        return Neg(_frac_expr(-c))
    if c.denominator == 1:
        return Const(c)
    return Div(Const(Fraction(c.numerator)), Const(Fraction(c.denominator)))


def _ep_to_expr(a):
    if not a:
        return Const(Fraction(0))
    terms = []
    for (r, k), c in sorted(a.items(), reverse=True):
        negative = c < 0
        c = abs(c)
        factors = []
        if r != 1:
            factors.append(Geom(r))
        if k == 1:
            factors.append(Var("n"))
        elif k > 1:
            factors.append(Pow(Var("n"), k))
        if not factors or c != 1:
            factors.insert(0, _frac_expr(c))
        expr = factors[0]
        for f in factors[1:]:
            expr = Mul(expr, f)
        terms.append((negative, expr))
    negative, out = terms[0]
    if negative:
        out = Neg(out)
    for negative, t in terms[1:]:
        out = Sub(out, t) if negative else Add(out, t)
    return out


def _qep_to_expr(q):
    num, den = q
    if den == ep_const(1):
        return _ep_to_expr(num)
    return Div(_ep_to_expr(num), _ep_to_expr(den))


def nf_to_seqexpr(nf: NormalForm) -> Node:
    """A sequence expression whose normal form is nf (poles cannot be
    expressed, so they must be empty)."""
    if nf.poles:
        raise UnsupportedFormError("cannot express bare poles as a sequence")
    if nf.uniform():
        body = _qep_to_expr(nf.even)
    else:
        half = Fraction(1, 2)
        even_mask = Add(_frac_expr(half), Mul(_frac_expr(half), AltSign()))
        odd_mask = Sub(_frac_expr(half), Mul(_frac_expr(half), AltSign()))
        body = Add(
            Mul(even_mask, _qep_to_expr(nf.even)),
            Mul(odd_mask, _qep_to_expr(nf.odd)),
        )
    if nf.patches:
        body = Patch(tuple(sorted(nf.patches.items())), body)
    return body


# -- series verdicts ---------------------------------------------------------------

@dataclass(frozen=True)
class SeriesReport:
    verdict: str  # converges | diverges | inconclusive
    sum: Optional[Fraction] = None
    direction: Optional[str] = None
    method: str = ""
    partial_sum: Optional[Node] = None
    term_limit_zero: Optional[bool] = None


def _eventual_term_sign(nf):
    se, _ = q_eventual_sign(nf.even)
    so, _ = q_eventual_sign(nf.odd)
    return se, so


def series_analyze(term: Node, antidifference: Optional[Node] = None) -> SeriesReport:
    """Convergence verdict for sum(term).

    Closed partial sums are analyzed directly. Otherwise: the term-limit
    necessary condition, then (for nonnegative decreasing rational-function
    terms) dyadic block bounds: blocks bounded below by a positive constant
    force divergence, geometrically decaying block ceilings force
    convergence of the bounded partial sums.
    """
    try:
        partial = series_partial_sum(term, antidifference)
        rep = analyze(partial)
        if rep.converges_to is not None:
            return SeriesReport(
                "converges", sum=rep.converges_to, method="closed form",
                partial_sum=partial, term_limit_zero=True,
            )
        if rep.diverges_to is not None:
            return SeriesReport(
                "diverges", direction=rep.diverges_to, method="closed form",
                partial_sum=partial,
            )
        return SeriesReport(
            "diverges", method="closed form oscillates", partial_sum=partial
        )
    except NoClosedFormError:
        pass  # a wrong antidifference is a user error and propagates

    nf = normalize(term)
    trep = analyze(term)
    limit_zero = trep.converges_to == 0
    if not limit_zero:
        se, so = _eventual_term_sign(nf)
        if se >= 0 and so >= 0:
            direction = PLUS_INF
        elif se <= 0 and so <= 0:
            direction = MINUS_INF
        else:
            direction = None
        return SeriesReport(
            "diverges", direction=direction,
            method="term limit is not zero", term_limit_zero=False,
        )

    verdict = _condensation_verdict(nf)
    if verdict is not None:
        return verdict
    return SeriesReport("inconclusive", term_limit_zero=True)


def _condensation_verdict(nf):
    """Dyadic block comparison for nonnegative decreasing rational-function
    terms a(k): blocks A(2**(m+1)) - A(2**m) lie between
    2**m * a(2**(m+1)) and 2**m * a(2**m)."""
    if not nf.uniform():
        return None
    q = nf.even
    if not (ep_is_poly(q[0]) and ep_is_poly(q[1])):
        return None
    sign, _ = q_eventual_sign(q)
    negate = sign < 0
    if negate:
        q = q_neg(q)
    dec_sign, _ = q_eventual_sign(q_sub(q, q_shift(q)))
    if dec_sign < 0:
        return None

    nump, denp = ep_to_poly(q[0]), ep_to_poly(q[1])

    def poly_at_power(p, shift):
        # p(2**(m+shift)) as an exponential polynomial in m
        out = {}
        for i, c in enumerate(p):
            key = (Fraction(2) ** i, 0)
            out[key] = out.get(key, Fraction(0)) + c * Fraction(2) ** (i * shift)
        return ep_norm(out)

    two_m = ep_norm({(Fraction(2), 0): Fraction(1)})
    floor_q = q_canon(ep_mul(two_m, poly_at_power(nump, 1)), poly_at_power(denp, 1))
    ceil_q = q_canon(ep_mul(two_m, poly_at_power(nump, 0)), poly_at_power(denp, 0))

    floor_limit = q_limit(floor_q)
    if floor_limit == PLUS_INF or (
        not _is_inf(floor_limit) and floor_limit > 0
    ):
        return SeriesReport(
            "diverges",
            direction=MINUS_INF if negate else PLUS_INF,
            method="dyadic blocks bounded below",
            term_limit_zero=True,
        )
    ratio = q_limit(q_div(q_shift(ceil_q), ceil_q))
    if not _is_inf(ratio) and ratio < 1:
        return SeriesReport(
            "converges",
            method="dyadic block ceiling decays geometrically",
            term_limit_zero=True,
        )
    return None


# -- Cauchy products -----------------------------------------------------------------

@dataclass(frozen=True)
class CauchyProductReport:
    n: int
    partial: Fraction
    target: Fraction
    residual: Fraction
    trend: tuple  # ((n, residual), ...) at n/4, n/2, n


def _abs_nf(nf):
    se, _ = q_eventual_sign(nf.even)
    so, _ = q_eventual_sign(nf.odd)
    even = q_neg(nf.even) if se < 0 else nf.even
    odd = q_neg(nf.odd) if so < 0 else nf.odd
    patches = {i: abs(v) for i, v in nf.patches.items()}
    return _make_nf(even, odd, patches, nf.poles)


def cauchy_product_check(
    a: Node,
    b: Node,
    n: int,
    antidiff_a: Optional[Node] = None,
    antidiff_b: Optional[Node] = None,
) -> CauchyProductReport:
    """Numeric corroboration that the Cauchy product series converges to the
    product of the sums; not a proof.

    Needs both sums in closed form and absolute convergence of the first
    series (checked on its sign-stripped version).
    """
    ra = series_analyze(a, antidiff_a)
    rb = series_analyze(b, antidiff_b)
    if ra.verdict != "converges" or ra.sum is None:
        raise UnknownSumError("first series needs a known sum")
    if rb.verdict != "converges" or rb.sum is None:
        raise UnknownSumError("second series needs a known sum")
    abs_term = nf_to_seqexpr(_abs_nf(normalize(a)))
    rabs = series_analyze(abs_term)
    if rabs.verdict != "converges":
        raise UnknownSumError("cannot certify absolute convergence of the first series")
    target = ra.sum * rb.sum
    nfa, nfb = normalize(a), normalize(b)
    avals = [nfa.value_at(j) for j in range(n + 1)]
    bvals = [nfb.value_at(j) for j in range(n + 1)]
    partial = Fraction(0)
    residuals = {}
    checkpoints = sorted({max(1, n // 4), max(1, n // 2), n})
    for k in range(n + 1):
        ck = sum(avals[j] * bvals[k - j] for j in range(k + 1))
        partial += ck
        if k in checkpoints:
            residuals[k] = abs(partial - target)
    return CauchyProductReport(
        n=n,
        partial=partial,
        target=target,
        residual=abs(partial - target),
        trend=tuple(sorted(residuals.items())),
    )
