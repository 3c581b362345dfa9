"""The computable hyperreal field.

Elements are reduced ratios of rational-coefficient polynomials in a single
canonical infinite element OMEGA (written `W` in the text syntax). This
fragment is a genuine non-Archimedean totally ordered field: comparison,
classification into zero / infinitesimal / appreciable / infinite, the
standard part operator, and the infinitely-close and same-galaxy relations
are all exact and ultrafilter independent.

HyperExp extends the fragment with finite sums of geometric growth terms
base**OMEGA * (rational function of OMEGA), enough to house geometric
sequences and their partial sums.
"""

from fractions import Fraction
from typing import NamedTuple

from . import polys as P
from .errors import (
    DivisionByZeroError,
    InfiniteArgumentError,
    PoleError,
    UnsupportedFormError,
)

ZERO_TAG = "zero"
INFINITESIMAL = "infinitesimal"
APPRECIABLE = "appreciable"
INFINITE = "infinite"

NEGATIVE = "negative"
SIGN_ZERO = "zero"
POSITIVE = "positive"


class Classification(NamedTuple):
    tag: str
    sign: str


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected exact rational, got {type(x).__name__}")


class HyperRat:
    """Reduced ratio num/den of polynomials in OMEGA, den monic and nonzero.

    Equality is syntactic identity of the canonical form; order reads off
    the sign of one leading coefficient.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=P.ONE):
        num = P.pnorm(num)
        den = P.pnorm(den)
        if not den:
            raise DivisionByZeroError("hyperreal with zero denominator")
        if not num:
            self.num, self.den = P.ZERO, P.ONE
            return
        g = P.pgcd(num, den)
        if P.pdeg(g) > 0:
            num, _ = P.pdivmod(num, g)
            den, _ = P.pdivmod(den, g)
        lead = P.plead(den)
        if lead != 1:
            num = P.pscale(num, 1 / lead)
            den = P.pscale(den, 1 / lead)
        self.num, self.den = num, den

    @staticmethod
    def from_rational(c):
        return HyperRat(P.pconst(_as_fraction(c)))

    @staticmethod
    def coerce(x):
        if isinstance(x, HyperRat):
            return x
        if isinstance(x, (int, Fraction)):
            return HyperRat.from_rational(x)
        return NotImplemented

    # -- field operations ------------------------------------------------

    def __add__(self, other):
        other = HyperRat.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        num = P.padd(P.pmul(self.num, other.den), P.pmul(other.num, self.den))
        return HyperRat(num, P.pmul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self):
        out = HyperRat.__new__(HyperRat)
        out.num, out.den = P.pneg(self.num), self.den
        return out

    def __sub__(self, other):
        other = HyperRat.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = HyperRat.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return HyperRat(P.pmul(self.num, other.num), P.pmul(self.den, other.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = HyperRat.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise DivisionByZeroError("division by zero hyperreal")
        return HyperRat(P.pmul(self.num, other.den), P.pmul(self.den, other.num))

    def __rtruediv__(self, other):
        other = HyperRat.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, k):
        if not isinstance(k, int):
            raise TypeError("hyperreal powers must be integers")
        if k < 0:
            return HyperRat.from_rational(1) / self ** (-k)
        return HyperRat(P.ppow(self.num, k), P.ppow(self.den, k))

    def __abs__(self):
        return -self if self._sign() < 0 else self

    # -- order -----------------------------------------------------------

    def _sign(self):
        """Sign of the element (den is monic, hence positive at infinity)."""
        if not self.num:
            return 0
        return 1 if P.plead(self.num) > 0 else -1

    def __eq__(self, other):
        other = HyperRat.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __lt__(self, other):
        other = HyperRat.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other)._sign() < 0

    def __le__(self, other):
        other = HyperRat.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other)._sign() <= 0

    def __gt__(self, other):
        return HyperRat.coerce(other).__lt__(self)

    def __ge__(self, other):
        return HyperRat.coerce(other).__le__(self)

    # -- structure -------------------------------------------------------

    def is_zero(self):
        return not self.num

    def is_rational(self):
        return P.pdeg(self.num) <= 0 and P.pdeg(self.den) == 0

    def as_rational(self):
        if not self.is_rational():
            raise ValueError("element is not a standard rational")
        if not self.num:
            return Fraction(0)
        return self.num[0] / self.den[0]

    def __repr__(self):
        return f"HyperRat({self})"

    def __str__(self):
        num = P.pstr(self.num, "W")
        if P.pdeg(self.den) == 0 and self.den[0] == 1:
            return num
        return f"({num})/({P.pstr(self.den, 'W')})"


OMEGA = HyperRat((Fraction(0), Fraction(1)))
EPSILON = HyperRat.from_rational(1) / OMEGA


# -- module operations ----------------------------------------------------

def arith(op, a, b):
    """Field operation by name; `div` raises on a zero divisor."""
    a, b = HyperRat.coerce(a), HyperRat.coerce(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


LESS, EQUAL, GREATER = "less", "equal", "greater"


def compare(a, b):
    s = (HyperRat.coerce(a) - HyperRat.coerce(b))._sign()
    return EQUAL if s == 0 else (GREATER if s > 0 else LESS)


def classify(a):
    """Partition tag plus sign. Degree comparison is the whole decision:
    this is exactly the ultrafilter-independent fragment."""
    a = HyperRat.coerce(a)
    s = a._sign()
    sign = SIGN_ZERO if s == 0 else (POSITIVE if s > 0 else NEGATIVE)
    if a.is_zero():
        return Classification(ZERO_TAG, sign)
    dn, dd = P.pdeg(a.num), P.pdeg(a.den)
    if dn > dd:
        return Classification(INFINITE, sign)
    if dn < dd:
        return Classification(INFINITESIMAL, sign)
    return Classification(APPRECIABLE, sign)


def is_finite(a):
    return classify(a).tag != INFINITE


def standard_part(a):
    """The unique standard rational infinitely close to a finite element."""
    a = HyperRat.coerce(a)
    tag = classify(a).tag
    if tag == INFINITE:
        raise InfiniteArgumentError("standard part of an infinite element")
    if tag in (ZERO_TAG, INFINITESIMAL):
        return Fraction(0)
    return P.plead(a.num) / P.plead(a.den)


def infinitely_close(a, b):
    return classify(HyperRat.coerce(a) - HyperRat.coerce(b)).tag in (
        ZERO_TAG,
        INFINITESIMAL,
    )


def same_galaxy(a, b):
    return classify(HyperRat.coerce(a) - HyperRat.coerce(b)).tag != INFINITE


def eval_at_index(a, n):
    """Value of the canonical representative sequence at index n."""
    a = HyperRat.coerce(a)
    den = P.peval(a.den, Fraction(n))
    if den == 0:
        raise PoleError(f"representative sequence has a pole at index {n}")
    return P.peval(a.num, Fraction(n)) / den


def subst_omega(a, expr):
    """Substitute another positive-infinite element for OMEGA (for
    reparameterization checks such as OMEGA -> 2*OMEGA)."""
    a, expr = HyperRat.coerce(a), HyperRat.coerce(expr)
    return P.peval(a.num, expr) / P.peval(a.den, expr)


def sign_stability_bound(a):
    """An index beyond which eval_at_index(a, n) has the sign of a.

    Uses the Cauchy root bound of numerator and denominator.
    """
    a = HyperRat.coerce(a)
    if a.is_zero():
        return 1
    bound = max(P.proot_bound(a.num), P.proot_bound(a.den))
    n = int(bound) + 1
    return n


def compose_rational(f, a):
    """Exact evaluation *f(a) for f built from field operations only."""
    from .expressions import evaluate_hyper

    return evaluate_hyper(f, HyperRat.coerce(a))


# -- geometric growth extension -------------------------------------------

class HyperExp:
    """Finite sum of terms base**OMEGA * body with distinct positive rational
    bases and nonzero HyperRat bodies, kept sorted by descending base."""

    __slots__ = ("terms",)

    def __init__(self, terms):
        merged = {}
        for base, body in terms:
            base = _as_fraction(base)
            if base <= 0:
                raise UnsupportedFormError("growth bases must be positive")
            body = HyperRat.coerce(body)
            if base in merged:
                merged[base] = merged[base] + body
            else:
                merged[base] = body
        self.terms = tuple(
            (base, body)
            for base, body in sorted(merged.items(), key=lambda t: t[0], reverse=True)
            if not body.is_zero()
        )

    @staticmethod
    def coerce(x):
        if isinstance(x, HyperExp):
            return x
        if isinstance(x, (int, Fraction)):
            x = HyperRat.from_rational(x)
        if isinstance(x, HyperRat):
            return HyperExp([(Fraction(1), x)])
        return NotImplemented

    def is_zero(self):
        return not self.terms

    def dominant(self):
        return self.terms[0] if self.terms else None

    def rational_part(self):
        for base, body in self.terms:
            if base == 1:
                return body
        return HyperRat.from_rational(0)

    def as_hyperrat(self):
        """Collapse to HyperRat when no genuine growth term is present."""
        if all(base == 1 for base, _ in self.terms):
            return self.rational_part()
        raise UnsupportedFormError("element carries growth terms")

    def __add__(self, other):
        other = HyperExp.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return HyperExp(list(self.terms) + list(other.terms))

    __radd__ = __add__

    def __neg__(self):
        return HyperExp([(b, -body) for b, body in self.terms])

    def __sub__(self, other):
        other = HyperExp.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = HyperExp.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = []
        for b1, body1 in self.terms:
            for b2, body2 in other.terms:
                out.append((b1 * b2, body1 * body2))
        return HyperExp(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = HyperExp.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise DivisionByZeroError("division by zero growth element")
        if len(other.terms) != 1:
            raise UnsupportedFormError(
                "growth division needs a single-term divisor"
            )
        base, body = other.terms[0]
        inv = HyperExp([(1 / base, HyperRat.from_rational(1) / body)])
        return self * inv

    def __eq__(self, other):
        other = HyperExp.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def _sign(self):
        """Sign decided by the largest base present; ties inside one base
        fall back to the body's order."""
        if not self.terms:
            return 0
        return self.terms[0][1]._sign()

    def __lt__(self, other):
        other = HyperExp.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other)._sign() < 0

    def __le__(self, other):
        other = HyperExp.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other)._sign() <= 0

    def __gt__(self, other):
        other = HyperExp.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other)._sign() > 0

    def __ge__(self, other):
        other = HyperExp.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other)._sign() >= 0

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for base, body in self.terms:
            if base == 1:
                parts.append(str(body))
            else:
                parts.append(f"({base})^W*({body})")
        return " + ".join(parts)

    __repr__ = __str__

    def eval_at_index(self, n):
        total = Fraction(0)
        for base, body in self.terms:
            total += base ** n * eval_at_index(body, n)
        return total


def growth_arith(op, a, b):
    a, b = HyperExp.coerce(a), HyperExp.coerce(b)
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown growth operation {op!r}")


def growth_classify_st(a):
    """(Classification, standard part or None).

    The dominant term is the largest base with a surviving body: base > 1
    means infinite, base 1 defers to the rational-function rule, and all
    bases below 1 mean infinitesimal. The standard part is the base-1
    body's, and is None exactly when the element is infinite.
    """
    a = HyperExp.coerce(a)
    if a.is_zero():
        return Classification(ZERO_TAG, SIGN_ZERO), Fraction(0)
    base, body = a.terms[0]
    s = a._sign()
    sign = POSITIVE if s > 0 else NEGATIVE
    if base > 1:
        return Classification(INFINITE, sign), None
    if base == 1:
        cls = classify(body)
        if cls.tag == INFINITE:
            return Classification(INFINITE, sign), None
        # sub-unit bases are infinitesimal and cannot change tag or st
        return Classification(cls.tag, sign), standard_part(body)
    return Classification(INFINITESIMAL, sign), Fraction(0)


def growth_st(a):
    cls, st = growth_classify_st(a)
    if st is None:
        raise InfiniteArgumentError("standard part of an infinite element")
    return st
