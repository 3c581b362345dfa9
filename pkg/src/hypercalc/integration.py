"""Hyperfinite integration.

The symbolic path forms the left-endpoint hyperfinite sum of a polynomial
over the fine partition with increment (b-a)/OMEGA, evaluates it in closed
form inside the hyperreal field, and takes the standard part: the result is
an exact rational with a Lipschitz certificate that lower, upper, and left
sums all agree to within an infinitesimal. The numeric path drives the
classical lower/upper sums over simple partitions: monotone integrands get
the exact gap law, everything else is refined by halving until the gap
passes the tolerance (per-cell bounds from dense sampling, explicitly
flagged as an under-approximation).
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Union

import numpy as np

from . import kernels
from . import polys as P
from .errors import (
    AdditivityViolationError,
    BadIntervalError,
    DepthCapError,
    UnboundedSampleError,
    UnsupportedFormError,
    UnverifiableBoundsError,
)
from .expressions import (
    Node,
    differentiate,
    evaluate_exact,
    evaluate_float,
    is_rational_expr,
    to_polynomial,
)
from .hyperfield import HyperRat, OMEGA, standard_part, subst_omega

MAX_CELLS = 1 << 22
CRITICAL_GRID = 1 << 10
BRACKET_WIDTH_SPLITS = 30  # bisection depth for critical-point brackets

POLYNOMIAL = "polynomial"
MONOTONE = "monotone"
GENERAL = "general"

INCREASING = "increasing"
DECREASING = "decreasing"


# -- partitions ---------------------------------------------------------------

@dataclass(frozen=True)
class SimplePartition:
    """Regular partition with increment delta; the final cell covers the
    remainder b - (a + n*delta) and may be degenerate."""

    a: Fraction
    b: Fraction
    delta: Fraction
    n: int

    def point(self, k):
        if k <= self.n:
            return self.a + k * self.delta
        return self.b

    def points(self):
        return [self.point(k) for k in range(self.n + 2)]

    def cells(self):
        """(left, right) pairs; the degenerate last cell is kept (and skipped
        by every sum, since its width is zero)."""
        pts = self.points()
        return list(zip(pts[:-1], pts[1:]))


def build_partition(a, b, delta) -> SimplePartition:
    a, b, delta = Fraction(a), Fraction(b), Fraction(delta)
    if not a < b:
        raise BadIntervalError("need a < b")
    if delta <= 0:
        raise BadIntervalError("increment must be positive")
    n = int((b - a) / delta)  # exact rational floor
    if a + n * delta > b:
        n -= 1
    return SimplePartition(a, b, delta, n)


@dataclass(frozen=True)
class FinePartitionSymbolic:
    """The canonical fine partition: increment (b-a)/OMEGA, exactly OMEGA
    cells, no remainder cell."""

    a: Fraction
    b: Fraction
    dx: HyperRat = field(init=False)

    def __post_init__(self):
        if not self.a < self.b:
            raise BadIntervalError("need a < b")
        object.__setattr__(
            self, "dx", HyperRat.from_rational(self.b - self.a) / OMEGA
        )


# -- integrands ---------------------------------------------------------------

@dataclass
class IntegrandClass:
    """A bounded integrand plus what we know about it.

    expr is either a function expression or a rational-valued callable.
    Patches override finitely many points (they never change an integral).
    The monotone certificate is either a user assertion or a sampled
    derivative-sign record, re-verified at every partition actually used.
    """

    expr: Union[Node, Callable]
    kind: str = GENERAL
    direction: Optional[str] = None
    certificate: str = ""
    patches: dict = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        self.patches = {Fraction(k): Fraction(v) for k, v in self.patches.items()}
        if self.kind == POLYNOMIAL:
            if not isinstance(self.expr, Node) or to_polynomial(self.expr) is None:
                raise UnsupportedFormError("expression is not a polynomial")
        if self.kind == MONOTONE and self.direction not in (INCREASING, DECREASING):
            raise ValueError("monotone integrands need a direction")

    def polynomial(self):
        return to_polynomial(self.expr) if isinstance(self.expr, Node) else None

    def exactly_evaluable(self):
        if callable(self.expr):
            return True
        return is_rational_expr(self.expr)

    def eval_exact(self, x):
        x = Fraction(x)
        if x in self.patches:
            return self.patches[x]
        if callable(self.expr):
            return Fraction(self.expr(x))
        return evaluate_exact(self.expr, x)

    def eval_float(self, x):
        fx = Fraction(x) if not isinstance(x, float) else None
        if fx is not None and fx in self.patches:
            return float(self.patches[fx])
        if callable(self.expr):
            return float(self.expr(Fraction(x)))
        return evaluate_float(self.expr, x)


def polynomial_integrand(expr, label="") -> IntegrandClass:
    return IntegrandClass(expr, POLYNOMIAL, certificate="syntactic", label=label)


def monotone_integrand(expr, direction, certificate="asserted", label="") -> IntegrandClass:
    return IntegrandClass(expr, MONOTONE, direction, certificate, label=label)


def general_integrand(expr, label="") -> IntegrandClass:
    return IntegrandClass(expr, GENERAL, label=label)


def classify_integrand(expr: Node, a, b, samples=33) -> IntegrandClass:
    """Best class we can certify for expr on [a, b]: syntactic polynomial,
    sampled-derivative monotone, or general."""
    if to_polynomial(expr) is not None:
        return polynomial_integrand(expr)
    a, b = Fraction(a), Fraction(b)
    try:
        deriv = differentiate(expr)
        signs = set()
        for i in range(samples + 1):
            x = a + (b - a) * Fraction(i, samples)
            v = evaluate_float(deriv, float(x))
            if not math.isfinite(v):
                raise UnboundedSampleError("derivative sample is not finite")
            if v > 0:
                signs.add(1)
            elif v < 0:
                signs.add(-1)
        if signs <= {1}:
            return monotone_integrand(expr, INCREASING, "sampled derivative signs")
        if signs <= {-1}:
            return monotone_integrand(expr, DECREASING, "sampled derivative signs")
    except Exception:
        pass
    return general_integrand(expr)


# -- exact per-cell bounds for polynomials ------------------------------------

@dataclass(frozen=True)
class _Bracket:
    lo: Fraction
    hi: Fraction
    fmin: Fraction  # certified bounds for f over [lo, hi]
    fmax: Fraction


def _derivative_bound(coeffs, a, b):
    big = max(abs(a), abs(b), Fraction(1))
    return sum(abs(c) * i * big ** (i - 1) for i, c in enumerate(coeffs) if i >= 1)


def _critical_brackets(coeffs, a, b):
    """Rational brackets isolating the sign changes of the derivative over a
    2**10-point grid, bisected until tiny, each carrying certified min/max
    of f across it (endpoint values padded by a Lipschitz term)."""
    dcoeffs = P.pderiv(coeffs)
    if P.pdeg(dcoeffs) <= 0:
        return []
    lip = _derivative_bound(coeffs, a, b)
    step = (b - a) / CRITICAL_GRID
    xs = [a + i * step for i in range(CRITICAL_GRID + 1)]
    signs = [P.peval(dcoeffs, x) for x in xs]
    brackets = []
    for i in range(CRITICAL_GRID):
        s0, s1 = signs[i], signs[i + 1]
        if s0 == 0:
            brackets.append((xs[i], xs[i]))
        if s0 * s1 < 0:
            lo, hi = xs[i], xs[i + 1]
            flo, fhi = s0, s1
            for _ in range(BRACKET_WIDTH_SPLITS):
                mid = (lo + hi) / 2
                fm = P.peval(dcoeffs, mid)
                if fm == 0:
                    lo = hi = mid
                    break
                if (fm > 0) == (flo > 0):
                    lo, flo = mid, fm
                else:
                    hi, fhi = mid, fm
            brackets.append((lo, hi))
    if signs[-1] == 0:
        brackets.append((b, b))
    out = []
    for lo, hi in brackets:
        vlo, vhi = P.peval(coeffs, lo), P.peval(coeffs, hi)
        pad = lip * (hi - lo)
        out.append(_Bracket(lo, hi, min(vlo, vhi) - pad, max(vlo, vhi) + pad))
    return out


def _poly_cell_bounds(coeffs, brackets, lo, hi):
    """True lower/upper bounds of the polynomial over one cell: endpoint
    values, widened through any critical bracket the cell touches."""
    vlo, vhi = P.peval(coeffs, lo), P.peval(coeffs, hi)
    m, big = min(vlo, vhi), max(vlo, vhi)
    for br in brackets:
        if br.hi < lo or br.lo > hi:
            continue
        m = min(m, br.fmin)
        big = max(big, br.fmax)
    return m, big


# -- lower/upper sums ----------------------------------------------------------

def _monotone_values_exact(ic, part):
    vals = [ic.eval_exact(x) for x in part.points()]
    run = vals if ic.direction == INCREASING else [-v for v in vals]
    for u, w in zip(run, run[1:]):
        if w < u:
            raise UnverifiableBoundsError(
                "partition values violate the declared monotone direction"
            )
    return vals


def _monotone_sums_float(ic, part):
    n = part.n
    xs = np.empty(n + 2, dtype=np.float64)
    xs[: n + 1] = float(part.a) + float(part.delta) * np.arange(n + 1)
    xs[n + 1] = float(part.b)
    if isinstance(ic.expr, Node) and not ic.patches:
        prog = kernels.compile_program(ic.expr)
        vals = kernels.grid_eval(prog, xs)
    else:
        vals = np.array([ic.eval_float(Fraction(x)) for x in xs])
    if not np.isfinite(vals).all():
        raise UnboundedSampleError("integrand sample is not finite")
    run = vals if ic.direction == INCREASING else -vals
    slack = 1e-12 * max(1.0, float(np.abs(vals).max()))
    if np.diff(run).min() < -slack:
        raise UnverifiableBoundsError(
            "partition values violate the declared monotone direction"
        )
    delta = float(part.delta)
    tail_w = float(part.b - part.point(n))
    if ic.direction == INCREASING:
        low = delta * float(vals[:n].sum()) + float(vals[n]) * tail_w
        high = delta * float(vals[1 : n + 1].sum()) + float(vals[n + 1]) * tail_w
    else:
        low = delta * float(vals[1 : n + 1].sum()) + float(vals[n + 1]) * tail_w
        high = delta * float(vals[:n].sum()) + float(vals[n]) * tail_w
    return low, high


def lower_upper_sums(ic: IntegrandClass, part: SimplePartition, exact=None):
    """L and U over a simple partition.

    Polynomial and monotone integrands get certified bounds per cell; the
    general class samples each cell densely, which under-approximates the
    truth and is only allowed on the (flagged) numeric path.
    """
    if exact is None:
        exact = ic.exactly_evaluable()
    if ic.kind == POLYNOMIAL:
        coeffs = ic.polynomial()
        brackets = _critical_brackets(coeffs, part.a, part.b)
        low = high = Fraction(0)
        for k in range(part.n + 1):
            lo_x, hi_x = part.point(k), part.point(k + 1)
            w = hi_x - lo_x
            if w == 0:
                continue
            m, big = _poly_cell_bounds(coeffs, brackets, lo_x, hi_x)
            low += m * w
            high += big * w
        return low, high
    if ic.kind == MONOTONE:
        if not exact:
            return _monotone_sums_float(ic, part)
        vals = _monotone_values_exact(ic, part)
        low = high = Fraction(0)
        for k in range(part.n + 1):
            w = part.point(k + 1) - part.point(k)
            if w == 0:
                continue
            left, right = vals[k], vals[k + 1]
            m, big = (left, right) if ic.direction == INCREASING else (right, left)
            low += m * w
            high += big * w
        return low, high
    if exact:
        raise UnverifiableBoundsError(
            "general integrands have no certified exact bounds; use sampling"
        )
    return _sampled_sums_float(ic, part)


_SAMPLES_PER_CELL = 8


def _sampled_sums_float(ic, part):
    n_full = part.n  # cells of width exactly delta
    use_kernel = isinstance(ic.expr, Node) and not ic.patches
    if use_kernel and n_full > 0:
        prog = kernels.compile_program(ic.expr)
        mins, maxs = kernels.cell_min_max(
            prog, float(part.a), float(part.delta), n_full, _SAMPLES_PER_CELL
        )
        if not (np.isfinite(mins).all() and np.isfinite(maxs).all()):
            raise UnboundedSampleError("integrand sample is not finite")
        low = float(mins.sum() * float(part.delta))
        high = float(maxs.sum() * float(part.delta))
    else:
        low = high = 0.0
        for k in range(n_full):
            lo_x, hi_x = part.point(k), part.point(k + 1)
            vs = [
                ic.eval_float(lo_x + (hi_x - lo_x) * Fraction(s, _SAMPLES_PER_CELL))
                for s in range(_SAMPLES_PER_CELL + 1)
            ]
            if not all(math.isfinite(v) for v in vs):
                raise UnboundedSampleError("integrand sample is not finite")
            low += min(vs) * float(part.delta)
            high += max(vs) * float(part.delta)
    # remainder cell when the increment does not land exactly on b
    if part.b > part.point(part.n):
        lo_x, hi_x = part.point(part.n), part.b
        w = float(hi_x - lo_x)
        vs = [
            ic.eval_float(lo_x + (hi_x - lo_x) * Fraction(s, _SAMPLES_PER_CELL))
            for s in range(_SAMPLES_PER_CELL + 1)
        ]
        if not all(math.isfinite(v) for v in vs):
            raise UnboundedSampleError("integrand sample is not finite")
        low += min(vs) * w
        high += max(vs) * w
    return low, high


def _sampled_sums_exact(ic, part, samples=_SAMPLES_PER_CELL):
    """Exact-rational sampled bounds (an under-approximation of the true
    cell bounds; used by the finite-modification harness where the patch
    points must be hit exactly)."""
    low = high = Fraction(0)
    for k in range(part.n + 1):
        lo_x, hi_x = part.point(k), part.point(k + 1)
        w = hi_x - lo_x
        if w == 0:
            continue
        vs = [
            ic.eval_exact(lo_x + w * Fraction(s, samples))
            for s in range(samples + 1)
        ]
        low += min(vs) * w
        high += max(vs) * w
    return low, high


# -- the symbolic hyperfinite path ----------------------------------------------

@dataclass(frozen=True)
class IntegralResult:
    value: Union[Fraction, float]
    tag: str              # "exact" | "certified"
    gap: Union[Fraction, float]
    cells: int
    mode: str             # "symbolic" | "refine"
    notes: tuple = ()

    def __float__(self):
        return float(self.value)


def hyperfinite_left_sum(coeffs, a, b) -> HyperRat:
    """The left-endpoint sum of the polynomial over the fine partition with
    increment dx = (b-a)/OMEGA, evaluated in closed form: an element of the
    hyperreal field whose standard part is the integral."""
    a, b = Fraction(a), Fraction(b)
    part = FinePartitionSymbolic(a, b)
    dx = part.dx
    omega_minus_1 = OMEGA - 1
    total = HyperRat.from_rational(0)
    # f(a + k dx) = sum_j c_j sum_t C(j,t) a^(j-t) dx^t k^t, summed for k < OMEGA
    by_power = {}
    for j, c in enumerate(coeffs):
        if c == 0:
            continue
        for t in range(j + 1):
            by_power[t] = by_power.get(t, Fraction(0)) + c * math.comb(j, t) * a ** (j - t)
    for t, coeff in by_power.items():
        power_sum = P.peval(P.power_sum_poly(t), omega_minus_1)
        total = total + HyperRat.from_rational(coeff) * dx ** t * power_sum
    return total * dx


def symbolic_integral_polynomial(coeffs, a, b):
    """Exact integral of a polynomial as the standard part of its
    hyperfinite left sum, with a certificate that lower and upper sums
    differ from it by an infinitesimal (Lipschitz bound times dx)."""
    a, b = Fraction(a), Fraction(b)
    if a == b:
        return Fraction(0), "zero-width interval"
    sign = 1
    if a > b:
        a, b, sign = b, a, -1
    left_sum = hyperfinite_left_sum(coeffs, a, b)
    value = standard_part(left_sum)
    reparam = standard_part(subst_omega(left_sum, 2 * OMEGA))
    assert reparam == value, "left sum depends on the choice of increment"
    lip = _derivative_bound(P.pnorm(coeffs), a, b)
    cert = (
        f"left hyperfinite sum with dx = (b-a)/W; |sum - L|, |sum - U| <= "
        f"{lip} * (b-a) * dx (infinitesimal); value invariant under W -> 2W"
    )
    return sign * value, cert


# -- the public integrate -------------------------------------------------------

def integrate(
    ic: IntegrandClass,
    a,
    b,
    tol=Fraction(1, 10 ** 9),
    mode="auto",
    initial_cells=8,
) -> IntegralResult:
    a, b = Fraction(a), Fraction(b)
    tol = Fraction(tol)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if a == b:
        return IntegralResult(Fraction(0), "exact", Fraction(0), 0, "symbolic")
    if a > b:
        inner = integrate(ic, b, a, tol, mode, initial_cells)
        value = -inner.value
        return IntegralResult(
            value, inner.tag, inner.gap, inner.cells, inner.mode,
            inner.notes + ("orientation reversed",),
        )

    notes = []
    if mode in ("auto", "symbolic") and ic.kind == POLYNOMIAL:
        coeffs = ic.polynomial()
        value, cert = symbolic_integral_polynomial(coeffs, a, b)
        if ic.patches:
            notes.append(
                "patches at finitely many points do not move the integral"
            )
        return IntegralResult(
            value, "exact", Fraction(0), 0, "symbolic", (cert,) + tuple(notes)
        )
    if mode == "symbolic":
        raise UnsupportedFormError(
            "symbolic mode covers polynomial integrands only"
        )

    if ic.kind == MONOTONE:
        return _integrate_monotone(ic, a, b, tol, notes)
    return _integrate_general(ic, a, b, tol, initial_cells, notes)


def _integrate_monotone(ic, a, b, tol, notes):
    exact = ic.exactly_evaluable()
    fa, fb = (
        (ic.eval_exact(a), ic.eval_exact(b))
        if exact
        else (ic.eval_float(a), ic.eval_float(b))
    )
    jump = abs(fb - fa)
    if jump == 0:
        # constant by monotonicity: both sums are equal at any increment
        part = build_partition(a, b, b - a)
        low, high = lower_upper_sums(ic, part, exact)
        return IntegralResult(
            low, "exact", high - low, 1, "refine",
            tuple(notes) + ("monotone with zero jump: exact at one cell",),
        )
    delta = tol / Fraction(jump)
    n_cells = int((b - a) / delta) + 1
    if n_cells > MAX_CELLS:
        raise DepthCapError(
            f"monotone gap law needs {n_cells} cells (> {MAX_CELLS})",
            last_gap=float((b - a) / MAX_CELLS * jump),
        )
    delta = (b - a) / n_cells
    part = build_partition(a, b, delta)
    low, high = lower_upper_sums(ic, part, exact)
    gap = high - low
    notes = tuple(notes) + (
        f"monotone gap law: U - L = delta * |f(b) - f(a)| with delta = {delta}",
    )
    return IntegralResult(low, "certified", gap, n_cells, "refine", notes)


def _integrate_general(ic, a, b, tol, initial_cells, notes):
    n_cells = initial_cells
    tol_f = float(tol)
    last_gap = None
    while n_cells <= MAX_CELLS:
        part = build_partition(a, b, (b - a) / n_cells)
        low, high = lower_upper_sums(ic, part, exact=False)
        gap = high - low
        last_gap = gap
        if gap < tol_f:
            mid = (low + high) / 2
            return IntegralResult(
                mid, "certified", gap, n_cells, "refine",
                tuple(notes)
                + (
                    "general-class bounds from per-cell sampling "
                    f"({_SAMPLES_PER_CELL + 1} points each): an "
                    "under-approximation of the true envelope",
                ),
            )
        n_cells *= 2
    raise DepthCapError(
        f"gap {last_gap} above tolerance at the {MAX_CELLS}-cell cap",
        last_gap=last_gap,
    )


# -- integral function checks ---------------------------------------------------

@dataclass(frozen=True)
class AccumulationReport:
    grid: tuple
    values: tuple               # F(y) per grid point
    additive_residuals: tuple   # |F(c) + I(c, y) - F(y)| per interior split
    ftc_residuals: tuple        # |(F(y+h)-F(y))/h - f(midpoint)| per step
    max_additive_residual: Union[Fraction, float]
    max_ftc_residual: Union[Fraction, float]


def accumulation_check(ic: IntegrandClass, a, b, grid, tol) -> AccumulationReport:
    """Builds F(y) = integral of f over [a, y] on the grid, then checks
    interval additivity and that difference quotients of F recover f (probed
    at the midpoint of each step, where the quotient is second-order
    accurate)."""
    a, b = Fraction(a), Fraction(b)
    grid = sorted(Fraction(y) for y in grid)
    if grid[0] != a or grid[-1] != b:
        raise BadIntervalError("grid must span [a, b]")
    values = {y: integrate(ic, a, y, tol).value for y in grid}
    additive = []
    for c in grid[1:-1]:
        tail = integrate(ic, c, b, tol).value
        additive.append(abs(values[c] + tail - values[b]))
    ftc = []
    for y0, y1 in zip(grid, grid[1:]):
        h = y1 - y0
        mid = (y0 + y1) / 2
        fmid = ic.eval_exact(mid) if ic.exactly_evaluable() else ic.eval_float(mid)
        quotient = (values[y1] - values[y0]) / (h if isinstance(values[y1], Fraction) else float(h))
        ftc.append(abs(quotient - fmid))
    return AccumulationReport(
        tuple(grid),
        tuple(values[y] for y in grid),
        tuple(additive),
        tuple(ftc),
        max(additive, default=Fraction(0)),
        max(ftc, default=Fraction(0)),
    )


def finite_modification_check(ic_f, ic_g, points, a, b, tol, levels=7) -> bool:
    """Changing an integrand at finitely many points leaves the integral
    alone. Checked two ways: the certified integrals agree within tol, and
    across refinement levels the sampled-sum difference stays within
    count * oscillation * delta (shrinking to zero)."""
    a, b = Fraction(a), Fraction(b)
    points = [Fraction(p) for p in points]
    # sampled guard: f == g away from the modified points
    for i in range(65):
        x = a + (b - a) * Fraction(i, 64)
        if x in points:
            continue
        if ic_f.eval_exact(x) != ic_g.eval_exact(x):
            return False
    osc = max(
        (abs(ic_f.eval_exact(p) - ic_g.eval_exact(p)) for p in points),
        default=Fraction(0),
    )
    for level in range(levels):
        delta = (b - a) / (8 * 2 ** level)
        part = build_partition(a, b, delta)
        lf, hf = _sampled_sums_exact(ic_f, part)
        lg, hg = _sampled_sums_exact(ic_g, part)
        diff = abs((lf + hf) / 2 - (lg + hg) / 2)
        if diff > len(points) * osc * delta:
            return False
    vf = integrate(ic_f, a, b, tol).value
    vg = integrate(ic_g, a, b, tol).value
    return abs(Fraction(vf) - Fraction(vg)) <= Fraction(tol)


# -- additive interval functions -------------------------------------------------

@dataclass
class AdditiveFn:
    """An interval function B(x, y) on [a, b], expected to vanish on
    degenerate intervals and to add across any splitting point."""

    fn: Callable
    rectangular_declared: bool = False
    exact: bool = True
    label: str = ""

    def __call__(self, x, y):
        v = self.fn(Fraction(x), Fraction(y))
        return Fraction(v) if self.exact else float(v)


@dataclass(frozen=True)
class AdmissibilityLevel:
    delta: Fraction
    max_residual: Union[Fraction, float]
    rectangular_ok: bool
    straddling: tuple  # cells whose residual exceeded tolerance


@dataclass(frozen=True)
class AdmissibilityReport:
    levels: tuple
    residual_trend: tuple
    rectangular_all: bool
    endpoint_value: Union[Fraction, float]
    integral: Union[Fraction, float]
    endpoint_gap: Union[Fraction, float]
    endpoint_ok: bool


def _check_additivity(B, part, tol):
    for lo, hi in part.cells():
        if B(lo, lo) != 0 or B(hi, hi) != 0:
            raise AdditivityViolationError("B(x, x) must vanish")
        if hi == lo:
            continue
        mid = (lo + hi) / 2
        lhs, rhs = B(lo, hi), B(lo, mid) + B(mid, hi)
        err = abs(lhs - rhs)
        limit = 0 if B.exact else tol * max(1.0, abs(float(lhs)))
        if err > limit:
            raise AdditivityViolationError(
                f"B is not additive across {mid} (residual {err})"
            )


def _cell_bounds_for(ic, lo, hi, brackets, coeffs):
    if ic.kind == POLYNOMIAL:
        return _poly_cell_bounds(coeffs, brackets, lo, hi)
    if ic.kind == MONOTONE:
        vlo, vhi = ic.eval_exact(lo), ic.eval_exact(hi)
        return (vlo, vhi) if ic.direction == INCREASING else (vhi, vlo)
    vs = [
        ic.eval_exact(lo + (hi - lo) * Fraction(s, _SAMPLES_PER_CELL))
        for s in range(_SAMPLES_PER_CELL + 1)
    ]
    return min(vs), max(vs)


def admissibility_check(
    B: AdditiveFn,
    ic: IntegrandClass,
    a,
    b,
    delta,
    halvings=6,
    samples=_SAMPLES_PER_CELL,
    tol=1e-9,
    integral_tol=Fraction(1, 10 ** 6),
) -> AdmissibilityReport:
    """Per-cell comparison of B's increment ratios against integrand values.

    For each cell the residual is the best agreement between
    B(cell)/width and a sampled f(p); the rectangular property demands
    m * width <= B(cell) <= M * width for the cell bounds m, M. The report
    carries the residual trend across increment halvings and the comparison
    of B(a, b) against the integral.
    """
    a, b = Fraction(a), Fraction(b)
    delta = Fraction(delta)
    coeffs = ic.polynomial() if ic.kind == POLYNOMIAL else None
    brackets = (
        _critical_brackets(coeffs, a, b) if coeffs is not None else ()
    )
    levels = []
    rect_all = True
    for level in range(halvings + 1):
        d = delta / 2 ** level
        part = build_partition(a, b, d)
        _check_additivity(B, part, tol)
        worst = Fraction(0)
        rect_ok = True
        flagged = []
        for lo, hi in part.cells():
            w = hi - lo
            if w == 0:
                continue
            ratio = B(lo, hi) / w
            best = None
            for s in range(samples + 1):
                p = lo + w * Fraction(s, samples)
                cand = abs(ratio - ic.eval_exact(p))
                if best is None or cand < best:
                    best = cand
            m, big = _cell_bounds_for(ic, lo, hi, brackets, coeffs)
            if not (m * w <= B(lo, hi) <= big * w):
                rect_ok = False
            if best > worst:
                worst = best
            if best > Fraction(1, 1000):
                flagged.append((lo, hi, best))
        rect_all = rect_all and rect_ok
        levels.append(
            AdmissibilityLevel(d, worst, rect_ok, tuple(flagged))
        )
    integral = integrate(ic, a, b, tol=integral_tol)
    endpoint = B(a, b)
    gap_allow = max(Fraction(integral.gap), Fraction(1, 10 ** 9))
    endpoint_gap = abs(Fraction(endpoint) - Fraction(integral.value))
    return AdmissibilityReport(
        levels=tuple(levels),
        residual_trend=tuple(lv.max_residual for lv in levels),
        rectangular_all=rect_all,
        endpoint_value=endpoint,
        integral=integral.value,
        endpoint_gap=endpoint_gap,
        endpoint_ok=endpoint_gap <= gap_allow,
    )
