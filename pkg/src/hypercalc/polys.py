"""Dense univariate polynomials over exact rationals.

Polynomials are tuples of Fraction coefficients in ascending degree order
with no trailing zeros; the zero polynomial is the empty tuple. Everything
here is a pure function so callers can treat values as immutable.
"""

from fractions import Fraction
from math import comb, gcd

ZERO = ()
ONE = (Fraction(1),)


def pnorm(coeffs):
    """Strip trailing zeros and coerce entries to Fraction."""
    cs = [Fraction(c) for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


def pconst(c):
    c = Fraction(c)
    return (c,) if c else ()


def pdeg(p):
    """Degree, with the zero polynomial mapped to -1."""
    return len(p) - 1


def plead(p):
    return p[-1] if p else Fraction(0)


def padd(p, q):
    n = max(len(p), len(q))
    out = [Fraction(0)] * n
    for i, c in enumerate(p):
        out[i] += c
    for i, c in enumerate(q):
        out[i] += c
    return pnorm(out)


def pneg(p):
    return tuple(-c for c in p)


def psub(p, q):
    return padd(p, pneg(q))


def pmul(p, q):
    if not p or not q:
        return ZERO
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return pnorm(out)


def pscale(p, c):
    c = Fraction(c)
    if not c:
        return ZERO
    return tuple(a * c for a in p)


def ppow(p, k):
    if k < 0:
        raise ValueError("negative polynomial power")
    out = ONE
    base = p
    while k:
        if k & 1:
            out = pmul(out, base)
        base = pmul(base, base)
        k >>= 1
    return out


def pdivmod(p, q):
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(p)
    lead = q[-1]
    dq = len(q) - 1
    quo = [Fraction(0)] * max(0, len(p) - dq)
    while len(rem) - 1 >= dq and any(rem):
        while rem and rem[-1] == 0:
            rem.pop()
        if len(rem) - 1 < dq:
            break
        shift = len(rem) - 1 - dq
        factor = rem[-1] / lead
        quo[shift] = factor
        for i, c in enumerate(q):
            rem[shift + i] -= factor * c
        rem.pop()
    return pnorm(quo), pnorm(rem)


def pmonic(p):
    if not p:
        return ZERO
    return pscale(p, 1 / p[-1])


def _int_content(ints):
    g = 0
    for c in ints:
        g = gcd(g, abs(c))
    return g or 1


def _to_int_poly(p):
    """Clear denominators; returns integer coefficient list (primitive)."""
    if not p:
        return []
    den = 1
    for c in p:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in p]
    g = _int_content(ints)
    return [c // g for c in ints]


_GCD_PRIMES = (2147483647, 2147483629)


def _gcd_degree_mod_p(a, b, p):
    """Degree of gcd(a, b) over GF(p); reduction is sound as a coprimality
    witness whenever p misses both leading coefficients."""
    a = [c % p for c in a]
    b = [c % p for c in b]

    def trim(x):
        while x and x[-1] == 0:
            x.pop()

    trim(a)
    trim(b)
    while b:
        da, db = len(a) - 1, len(b) - 1
        if da < db:
            a, b = b, a
            continue
        inv = pow(b[-1], p - 2, p)
        for shift in range(da - db, -1, -1):
            fac = a[shift + db] * inv % p
            if fac:
                for i, cb in enumerate(b):
                    a[shift + i] = (a[shift + i] - fac * cb) % p
        trim(a)
        a, b = b, a
    return len(a) - 1


def _certified_coprime(a, b):
    for p in _GCD_PRIMES:
        if a[-1] % p == 0 or b[-1] % p == 0:
            continue
        return _gcd_degree_mod_p(a, b, p) == 0
    return False


def _prem(a, b):
    """Fraction-free pseudo-remainder of integer polynomials a by b."""
    rem = list(a)
    lb = b[-1]
    db = len(b) - 1
    while True:
        while rem and rem[-1] == 0:
            rem.pop()
        if len(rem) - 1 < db:
            return rem
        shift = len(rem) - 1 - db
        top = rem[-1]
        rem = [c * lb for c in rem]
        for i, c in enumerate(b):
            rem[shift + i] -= top * c
        rem.pop()  # leading term cancels exactly


def pgcd(p, q):
    """Monic gcd via a primitive pseudo-remainder sequence over the integers.

    Integer PRS keeps coefficient growth polynomial, which matters because
    canonical-form reduction sits on the hot path of field arithmetic.
    """
    a, b = _to_int_poly(p), _to_int_poly(q)
    if not a:
        return pmonic(q)
    if not b:
        return pmonic(p)
    if len(a) == 1 or len(b) == 1:
        return ONE
    if _certified_coprime(a, b):
        return ONE
    if len(a) < len(b):
        a, b = b, a
    while b:
        rem = _prem(a, b)
        g = _int_content(rem)
        a, b = b, [c // g for c in rem]
    return pmonic(tuple(Fraction(c) for c in a))


def peval(p, x):
    """Horner evaluation; x may be Fraction, int, float, or any field value."""
    acc = x * 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def pcompose(p, inner):
    """p(inner(x)) by Horner over polynomial arithmetic."""
    acc = ZERO
    for c in reversed(p):
        acc = padd(pmul(acc, inner), pconst(c))
    return acc


def pshift(p, h=1):
    """p(x + h)."""
    return pcompose(p, (Fraction(h), Fraction(1)))


def pderiv(p):
    return pnorm(c * i for i, c in enumerate(p) if i >= 1)


def proot_bound(p):
    """Cauchy bound: all real roots lie in (-B, B)."""
    if len(p) <= 1:
        return Fraction(1)
    lead = abs(p[-1])
    return 1 + max(abs(c) / lead for c in p[:-1])


_POWER_SUM_CACHE = {0: (Fraction(1), Fraction(1))}


def power_sum_poly(p):
    """Closed form of sum(k**p for k in 0..n) as a polynomial in n.

    Built from the telescoping identity (n+1)**(p+1) =
    sum_j C(p+1, j) * S_j(n), solved top down and cached.
    """
    if p in _POWER_SUM_CACHE:
        return _POWER_SUM_CACHE[p]
    rhs = ppow((Fraction(1), Fraction(1)), p + 1)
    for j in range(p):
        rhs = psub(rhs, pscale(power_sum_poly(j), comb(p + 1, j)))
    out = pscale(rhs, Fraction(1, p + 1))
    _POWER_SUM_CACHE[p] = out
    return out


def pstr(p, var="x"):
    """Human-readable rendering, highest degree first."""
    if not p:
        return "0"
    parts = []
    for i in range(len(p) - 1, -1, -1):
        c = p[i]
        if c == 0:
            continue
        if i == 0:
            term = str(c)
        else:
            v = var if i == 1 else f"{var}^{i}"
            if c == 1:
                term = v
            elif c == -1:
                term = f"-{v}"
            else:
                term = f"{c}*{v}"
        parts.append(term)
    out = parts[0]
    for term in parts[1:]:
        out += " - " + term[1:] if term.startswith("-") else " + " + term
    return out
