"""Jet calculus: lifts, derivative rules, increments, 0/0 limits, probes."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import ANALYTIC_BATTERY, KNOWN_EXTREMA
from hypercalc.errors import (
    DomainError,
    KinkError,
    NotIndeterminateError,
    OrderExhaustedError,
    SingularError,
    UnsupportedFormError,
)
from hypercalc.expressions import (
    Add,
    Call,
    Const,
    Div,
    Mul,
    Neg,
    Pow,
    Sub,
    Var,
    compose,
    evaluate_exact,
    evaluate_float,
)
from hypercalc.jets import (
    Jet,
    derivative,
    differential,
    jet_lift,
    lhospital,
    microcontinuity_probe,
    nth_derivative_via_increments,
)

F = Fraction
X = Var("x")


def c(v):
    return Const(F(v))


# -- lifts -------------------------------------------------------------------

def test_lift_square():
    jet = jet_lift(Pow(X, 2), F(3), 2)
    assert jet.exact and jet.coeffs == (F(9), F(6), F(1))


def test_lift_sin_at_zero():
    jet = jet_lift(Call("sin", X), F(0), 3)
    assert not jet.exact
    for got, want in zip(jet.coeffs, (0.0, 1.0, 0.0, -1 / 6)):
        assert abs(got - want) < 1e-12  # finite-difference oracle agrees below


def test_lift_domain_errors():
    with pytest.raises(DomainError):
        jet_lift(Div(c(1), X), F(0), 1)
    with pytest.raises(DomainError):
        jet_lift(Call("ln", X), F(0), 1)
    with pytest.raises(DomainError):
        jet_lift(Call("sqrt", Neg(X)), F(1), 1)
    with pytest.raises(KinkError):
        jet_lift(Call("abs", X), F(0), 1)


def _central_difference(f, p, h=1e-6):
    return (evaluate_float(f, p + h) - evaluate_float(f, p - h)) / (2 * h)


def test_lift_sin_coefficients_match_finite_differences():
    jet = jet_lift(Call("sin", X), F(0), 3)
    # derivative coefficient via central difference, tol 1e-6
    assert abs(jet.coeffs[1] - _central_difference(Call("sin", X), 0.0)) < 1e-6
    # third coefficient = f'''(0)/6 via the second-derivative of cos oracle
    h = 1e-3
    f3 = (
        evaluate_float(Call("sin", X), 2 * h)
        - 2 * evaluate_float(Call("sin", X), h)
        + 2 * evaluate_float(Call("sin", X), -h)
        - evaluate_float(Call("sin", X), -2 * h)
    ) / (2 * h ** 3)
    assert abs(jet.coeffs[3] - f3 / 6) < 1e-4


# -- derivative --------------------------------------------------------------

def test_derivative_examples():
    assert derivative(Pow(X, 3), F(2)) == 12
    assert abs(derivative(Call("sin", X), F(0)) - 1.0) < 1e-15
    assert abs(derivative(Call("exp", X), F(1)) - math.e) < 1e-12
    assert abs(derivative(Call("exp", X), F(1)) - _central_difference(Call("exp", X), 1.0)) < 1e-6 * math.e


def test_derivative_battery_vs_central_differences():
    for label, f, points in ANALYTIC_BATTERY:
        for p in points:
            jet_d = derivative(f, F(p))
            fd = _central_difference(f, float(p))
            scale = max(1.0, abs(float(jet_d)))
            assert abs(float(jet_d) - fd) <= 1e-6 * scale, (label, p)


def test_local_extrema_have_zero_derivative():
    for label, f, p in KNOWN_EXTREMA:
        d = derivative(f, p)
        assert abs(float(d)) < 1e-12, label


def test_differential_examples():
    assert differential(Pow(X, 2), F(3)).slope == 6
    assert abs(differential(Call("cos", X), F(0)).slope) < 1e-15
    t = differential(Call("ln", X), F(1))
    assert abs(t.slope - 1.0) < 1e-12
    assert abs(t.slope - _central_difference(Call("ln", X), 1.0)) < 1e-6
    # the tail records the higher-order coefficients
    d = differential(Pow(X, 3), F(1))
    assert d.slope == 3 and d.tail == (F(3), F(1), F(0))


# -- algebraic rules -----------------------------------------------------------

jet_coeff = st.fractions(min_value=F(-9), max_value=F(9), max_denominator=12)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(jet_coeff, min_size=5, max_size=5),
    st.lists(jet_coeff, min_size=5, max_size=5),
    st.lists(jet_coeff, min_size=5, max_size=5),
)
def test_jet_ring_laws(a, b, cc):
    ja = Jet(F(0), tuple(a), True)
    jb = Jet(F(0), tuple(b), True)
    jc = Jet(F(0), tuple(cc), True)
    assert ((ja * jb) * jc).coeffs == (ja * (jb * jc)).coeffs
    assert (ja * (jb + jc)).coeffs == (ja * jb + ja * jc).coeffs
    assert (ja * jb).coeffs == (jb * ja).coeffs
    if jb.coeffs[0] != 0:
        assert ((ja / jb) * jb).coeffs == ja.coeffs


def _random_rational_function(rng):
    coeffs = [F(rng.randint(-5, 5)) for _ in range(3)]
    num = Add(Add(Mul(Const(coeffs[0]), Pow(X, 2)), Mul(Const(coeffs[1]), X)), Const(coeffs[2]))
    if rng.random() < 0.5:
        den = Add(Pow(X, 2), Const(F(rng.randint(1, 5))))
        return Div(num, den)
    return num


def test_product_quotient_chain_rules_exact(rng):
    done = 0
    while done < 400:
        f = _random_rational_function(rng)
        g = _random_rational_function(rng)
        p = F(rng.randint(-6, 6), rng.randint(1, 6))
        try:
            fp, gp = evaluate_exact(f, p), evaluate_exact(g, p)
            df, dg = derivative(f, p), derivative(g, p)
        except DomainError:
            continue
        assert derivative(Mul(f, g), p) == fp * dg + df * gp
        if gp != 0:
            assert derivative(Div(f, g), p) == (gp * df - dg * fp) / gp ** 2
        try:
            dgf = derivative(g, fp)
        except DomainError:
            continue
        assert derivative(compose(g, f), p) == dgf * df
        done += 1


def test_chain_rule_transcendental_tolerance():
    f = Call("exp", Call("sin", X))
    g = Call("ln", Add(c(2), Pow(X, 2)))
    for p in (0.0, 0.5, 1.25, -2.0):
        lhs = derivative(compose(g, f), F(p).limit_denominator(10 ** 6))
        u = evaluate_float(f, p)
        rhs = derivative(g, u) * derivative(f, F(p).limit_denominator(10 ** 6))
        assert abs(lhs - rhs) < 1e-9 * max(1.0, abs(rhs))


# -- higher-order increments ------------------------------------------------------

def test_increment_examples():
    assert nth_derivative_via_increments(Pow(X, 3), F(0), 3) == 6
    assert nth_derivative_via_increments(Add(Pow(X, 4), X), F(1), 2) == 12
    v = nth_derivative_via_increments(Call("sin", X), F(0), 3)
    assert abs(v - (-1)) < 1e-9


def test_increment_identity_up_to_order_six(rng):
    for _ in range(60):
        f = _random_rational_function(rng)
        p = F(rng.randint(-4, 4), rng.randint(1, 5))
        for n in range(1, 7):
            try:
                jet = jet_lift(f, p, n)
            except DomainError:
                break
            got = nth_derivative_via_increments(f, p, n)
            assert got == math.factorial(n) * jet.coeffs[n]


# -- 0/0 limits ----------------------------------------------------------------------

def test_lhospital_examples():
    assert abs(lhospital(Call("sin", X), X, F(0)) - 1.0) < 1e-12
    v = lhospital(Sub(c(1), Call("cos", X)), Pow(X, 2), F(0))
    assert abs(v - 0.5) < 1e-12
    assert lhospital(Pow(X, 2), X, F(0)) == 0


def test_lhospital_signed_infinities():
    assert lhospital(X, Pow(X, 2), F(0)) == math.inf
    assert lhospital(Neg(X), Pow(X, 2), F(0)) == -math.inf
    assert lhospital(X, Pow(X, 3), F(0)) == math.inf  # dx > 0 convention


def test_lhospital_exact_mode():
    v = lhospital(Sub(Pow(X, 2), c(1)), Sub(X, c(1)), F(1))
    assert v == 2 and isinstance(v, F)


def test_lhospital_errors():
    with pytest.raises(NotIndeterminateError):
        lhospital(Add(X, c(1)), X, F(0))
    with pytest.raises(OrderExhaustedError):
        lhospital(Sub(X, X), Sub(X, X), F(0))


def test_lhospital_adaptive_order():
    v = lhospital(Pow(X, 9), Pow(X, 9), F(0))
    assert v == 1
    v = lhospital(Pow(X, 16), Pow(X, 16), F(0))
    assert v == 1


# -- microcontinuity -------------------------------------------------------------------

def test_probe_examples():
    assert microcontinuity_probe(Pow(X, 2), F(5))
    with pytest.raises(SingularError):
        microcontinuity_probe(Div(c(1), X), F(0))
    with pytest.raises(SingularError):
        microcontinuity_probe(
            Div(Sub(Pow(X, 2), c(1)), Sub(X, c(1))), F(1)
        )
    with pytest.raises(UnsupportedFormError):
        microcontinuity_probe(Call("sin", X), F(0))


def test_probe_rational_battery(rng):
    for _ in range(30):
        f = _random_rational_function(rng)
        p = F(rng.randint(-3, 3), rng.randint(1, 4))
        try:
            evaluate_exact(f, p)
        except DomainError:
            continue
        assert microcontinuity_probe(f, p)
