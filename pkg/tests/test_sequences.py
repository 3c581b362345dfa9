"""Sequence layer: normal forms, Frechet decisions, convergence, series."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hypercalc.errors import (
    DependenceError,
    NoClosedFormError,
    PoleError,
    UnsupportedFormError,
)
from hypercalc.expressions import (
    Add,
    AltSign,
    Const,
    Div,
    Geom,
    Mul,
    Neg,
    Pow,
    Sub,
    Var,
    patch,
    render,
)
from hypercalc.hyperfield import HyperExp, HyperRat, OMEGA
from hypercalc.parser import SEQUENCE, parse
from hypercalc.sequences import (
    analyze,
    cauchy_product_check,
    frechet_compare,
    normalize,
    seq_value,
    series_analyze,
    series_partial_sum,
    to_hyper,
    tolerance_bound,
)

F = Fraction
N = Var("n")


def c(v):
    return Const(F(v))


def seq_parse(text):
    return parse(SEQUENCE, text).ast


# -- normalization ---------------------------------------------------------------

def test_altsign_squared_is_one():
    nf = normalize(Mul(AltSign(), AltSign()))
    assert nf.uniform()
    assert nf.value_at(0) == 1 and nf.value_at(7) == 1


def test_patch_recorded_and_noop_patch_dropped():
    nf = normalize(patch([(3, 99)], Pow(N, 2)))
    assert set(nf.patches) == {3}
    nf = normalize(patch([(3, 9)], Pow(N, 2)))  # restates the closed form
    assert not nf.patches


def test_parity_split_example():
    nf = normalize(seq_parse("altsign*(1+1/(n+1))"))
    assert not nf.uniform()
    for n in range(0, 12, 2):
        assert nf.value_at(n) == F(n + 2, n + 1)
    for n in range(1, 12, 2):
        assert nf.value_at(n) == -F(n + 2, n + 1)


@settings(max_examples=80, deadline=None)
@given(st.data())
def test_normal_form_matches_pointwise_evaluation(data):
    expr = data.draw(seq_exprs())
    try:
        nf = normalize(expr)
    except (UnsupportedFormError, ZeroDivisionError, Exception) as exc:
        if isinstance(exc, (UnsupportedFormError,)) or "vanishes identically" in str(exc):
            return
        raise
    for n in range(0, 25):
        try:
            direct = seq_value(expr, n)
        except PoleError:
            direct = PoleError
        try:
            via = nf.value_at(n)
        except PoleError:
            via = PoleError
        assert direct == via, (render(expr), n)


@st.composite
def seq_exprs(draw, depth=3):
    if depth == 0:
        leaf = draw(
            st.sampled_from(["n", "alt", "geom", "int", "frac"])
        )
        if leaf == "n":
            return N
        if leaf == "alt":
            return AltSign()
        if leaf == "geom":
            return Geom(F(draw(st.integers(1, 5)), draw(st.integers(1, 5))))
        if leaf == "int":
            return c(draw(st.integers(-4, 4)))
        return c(F(draw(st.integers(-6, 6)), draw(st.integers(1, 6))))
    kind = draw(
        st.sampled_from(["add", "sub", "mul", "div", "pow", "neg", "patch", "leaf"])
    )
    if kind == "leaf":
        return draw(seq_exprs(depth=0))
    if kind == "pow":
        return Pow(draw(seq_exprs(depth=depth - 1)), draw(st.integers(0, 3)))
    if kind == "neg":
        return Neg(draw(seq_exprs(depth=depth - 1)))
    if kind == "patch":
        entries = [
            (draw(st.integers(0, 6)), F(draw(st.integers(-5, 5))))
        ]
        try:
            return patch(entries, draw(seq_exprs(depth=depth - 1)))
        except ValueError:
            return draw(seq_exprs(depth=depth - 1))
    left = draw(seq_exprs(depth=depth - 1))
    right = draw(seq_exprs(depth=depth - 1))
    return {"add": Add, "sub": Sub, "mul": Mul, "div": Div}[kind](left, right)


# -- Frechet comparison ------------------------------------------------------------

def test_patched_square_equal_with_bound():
    v = frechet_compare(Pow(N, 2), patch([(1, 5), (4, 0)], Pow(N, 2)))
    assert v.relation == "equal"
    assert v.exception_bound <= 5


def test_altsign_vs_one_is_ultrafilter_dependent():
    v = frechet_compare(AltSign(), c(1))
    assert v.relation == "ultrafilter_dependent"
    assert v.witness_classes == {"even": "equal", "odd": "less"}


def test_n_vs_n_plus_one():
    v = frechet_compare(N, Add(N, c(1)))
    assert v.relation == "less" and v.exception_bound == 0


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_decisive_verdicts_hold_pointwise(data):
    a = data.draw(seq_exprs(depth=2))
    b = data.draw(seq_exprs(depth=2))
    try:
        v = frechet_compare(a, b)
    except Exception:
        return
    check = range(v.exception_bound, v.exception_bound + 120)
    for n in check:
        try:
            va, vb = seq_value(a, n), seq_value(b, n)
        except PoleError:
            pytest.fail("pole beyond the exception bound")
        if v.relation == "equal":
            assert va == vb
        elif v.relation == "less":
            assert va < vb
        elif v.relation == "greater":
            assert va > vb
        else:
            expected = v.witness_classes["even" if n % 2 == 0 else "odd"]
            actual = "equal" if va == vb else ("less" if va < vb else "greater")
            assert actual == expected


def test_slow_geometric_crossover_certified():
    # n^10 is eventually beaten by (101/100)^n, but only after thousands of
    # indices; the dominance certificate must find a sound bound anyway
    v = frechet_compare(Pow(N, 10), Geom(F(101, 100)))
    assert v.relation == "less"
    b = v.exception_bound
    assert b >= 9000  # the crossover genuinely is that late
    for n in (b, b + 1, b + 97):
        assert F(n) ** 10 < F(101, 100) ** n
    # and before the crossover the powers really do win for a while
    assert F(100) ** 10 > F(101, 100) ** 100


def test_division_by_patched_zero_is_a_pole():
    bad = Div(c(1), patch([(3, 0)], Add(N, c(1))))
    nf = normalize(bad)
    assert 3 in nf.poles
    with pytest.raises(PoleError):
        nf.value_at(3)
    assert nf.value_at(4) == F(1, 5)


# -- quotient map -------------------------------------------------------------------

def test_to_hyper_examples():
    assert to_hyper(Div(N, Add(N, c(1)))) == OMEGA / (OMEGA + 1)
    out = to_hyper(Add(Geom(F(1, 2)), c(3)))
    assert isinstance(out, HyperExp)
    assert out.rational_part() == HyperRat.from_rational(3)
    with pytest.raises(DependenceError) as exc:
        to_hyper(AltSign())
    assert exc.value.candidates["even"] == HyperRat.from_rational(1)
    assert exc.value.candidates["odd"] == HyperRat.from_rational(-1)


def test_to_hyper_discards_patches():
    assert to_hyper(patch([(5, 99)], N)) == OMEGA


def test_geometric_denominator_unrepresentable():
    with pytest.raises(UnsupportedFormError):
        to_hyper(Div(c(1), Add(Geom(F(2)), c(1))))


# -- convergence ---------------------------------------------------------------------

def test_inverse_powers_converge_to_zero():
    rep = analyze(patch([(0, 0)], Pow(Div(c(1), N), 2)))
    assert rep.converges_to == 0 and rep.cauchy and rep.bounded


def test_geometric_converges_to_zero():
    rep = analyze(Geom(F(1, 3)))
    assert rep.converges_to == 0


def test_oscillating_example_limit_set():
    rep = analyze(seq_parse("altsign*(1+1/(n+1))"))
    assert rep.limit_points == (F(-1), F(1))
    assert rep.limsup == 1 and rep.liminf == -1
    assert rep.bounded and not rep.cauchy and rep.converges_to is None


def test_divergence_to_infinity():
    rep = analyze(Pow(N, 3))
    assert rep.diverges_to == "+inf" and not rep.bounded
    assert rep.liminf == "+inf" == rep.limsup
    rep = analyze(Neg(Geom(F(3, 2))))
    assert rep.diverges_to == "-inf"


def test_mixed_infinite_limit_points():
    rep = analyze(Mul(AltSign(), N))
    assert rep.limit_points == ("-inf", "+inf")
    assert rep.liminf == "-inf" and rep.limsup == "+inf"


def test_convergence_is_cofinite_closeness():
    s = Div(N, Add(N, c(1)))
    rep = analyze(s)
    assert rep.converges_to == 1
    nf = normalize(s)
    for tol in (F(1, 10), F(1, 1000), F(1, 10 ** 6)):
        bound = tolerance_bound(s, F(1), tol)
        for n in range(bound, bound + 50):
            assert abs(nf.value_at(n) - 1) < tol


def test_limit_points_match_far_tail(rng):
    # symbolic limit points against direct evaluation at a distant index pair
    checked = 0
    while checked < 100:
        expr = _random_seq(rng, 2)
        try:
            rep = analyze(expr)
            nf = normalize(expr)
        except Exception:
            continue
        for n in (100001, 100002):
            try:
                v = nf.value_at(n)
                assert v == seq_value(expr, n)
            except Exception:
                continue
            near_some = False
            for p in rep.limit_points:
                if p == "+inf":
                    near_some |= v > 10 ** 3
                elif p == "-inf":
                    near_some |= v < -(10 ** 3)
                else:
                    near_some |= abs(v - p) < F(1, 10)
            assert near_some, (render(expr), n, float(v), rep.limit_points)
        checked += 1


def _random_seq(rng, depth):
    if depth == 0:
        return rng.choice(
            [
                N,
                AltSign(),
                Geom(F(rng.randint(1, 4), rng.randint(1, 4))),
                c(rng.randint(-3, 3)),
            ]
        )
    op = rng.choice(["add", "sub", "mul", "div", "leaf"])
    if op == "leaf":
        return _random_seq(rng, 0)
    left, right = _random_seq(rng, depth - 1), _random_seq(rng, depth - 1)
    return {"add": Add, "sub": Sub, "mul": Mul, "div": Div}[op](left, right)


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_converges_iff_cauchy_numerically(data):
    expr = data.draw(seq_exprs(depth=2))
    try:
        rep = analyze(expr)
        nf = normalize(expr)
    except Exception:
        return
    assert rep.cauchy == (rep.converges_to is not None)
    start = max([7] + [i + 1 for i in nf.exception_indices()])
    if rep.converges_to is not None:
        bound = tolerance_bound(expr, rep.converges_to, F(1, 100))
        vals = [nf.value_at(bound + i) for i in range(6)]
        assert all(abs(u - w) < F(1, 50) for u in vals for w in vals)
    elif rep.bounded and len(rep.limit_points) == 2:
        p, q = rep.limit_points
        gap = abs(p - q)
        for n in range(start + 200, start + 204):
            assert abs(nf.value_at(n) - nf.value_at(n + 1)) > gap / 2


# -- series ---------------------------------------------------------------------------

def test_telescoping_example():
    term = seq_parse("1/((n+1)*(n+2))")
    g = seq_parse("-1/(n+1)")
    a = series_partial_sum(term, antidifference=g)
    nf = normalize(term)
    running = F(0)
    for n in range(51):
        running += nf.value_at(n)
        assert seq_value(a, n) == running
    rep = series_analyze(term, antidifference=g)
    assert rep.verdict == "converges" and rep.sum == 1


def test_bad_antidifference_rejected():
    with pytest.raises(UnsupportedFormError):
        series_partial_sum(seq_parse("1/((n+1)*(n+2))"), antidifference=N)
    # the wrapper propagates the mismatch instead of silently ignoring it
    with pytest.raises(UnsupportedFormError):
        series_analyze(seq_parse("1/((n+1)*(n+2))"), antidifference=N)


def test_geometric_series_both_signs_and_divergence():
    a = series_partial_sum(Geom(F(1, 2)))
    for n in range(40):
        assert seq_value(a, n) == 2 - F(1, 2) ** n
    rep = series_analyze(Geom(F(1, 2)))
    assert rep.verdict == "converges" and rep.sum == 2
    rep = series_analyze(Mul(AltSign(), Geom(F(1, 3))))
    assert rep.verdict == "converges" and rep.sum == F(3, 4)  # 1/(1-x) at x=-1/3
    rep = series_analyze(Geom(F(3, 2)))
    assert rep.verdict == "diverges" and rep.direction == "+inf"


def test_faulhaber_partial_sums():
    for p in range(5):
        a = series_partial_sum(Pow(N, p))
        total = F(0)
        for n in range(40):
            total += F(n) ** p
            assert seq_value(a, n) == total


def test_partial_sum_of_patched_term():
    term = patch([(2, 7)], Geom(F(1, 2)))
    a = series_partial_sum(term)
    nf = normalize(term)
    running = F(0)
    for n in range(30):
        running += nf.value_at(n)
        assert seq_value(a, n) == running


def test_series_requires_patched_poles():
    with pytest.raises(NoClosedFormError):
        series_partial_sum(Div(c(1), N))


def test_harmonic_diverges_by_blocks():
    rep = series_analyze(seq_parse("patch[(0,0)]{1/n}"))
    assert rep.verdict == "diverges" and rep.direction == "+inf"
    assert "dyadic" in rep.method


def test_p_series_converges_by_blocks():
    rep = series_analyze(seq_parse("patch[(0,0)]{1/n^2}"))
    assert rep.verdict == "converges" and rep.sum is None
    assert "dyadic" in rep.method
    rep = series_analyze(seq_parse("patch[(0,0)]{1/(n*n*n)}"))
    assert rep.verdict == "converges"


def test_term_limit_necessary_condition():
    # partial sums of the alternating sign sequence oscillate between 1 and 0
    rep = series_analyze(AltSign())
    assert rep.verdict == "diverges" and "oscillates" in rep.method
    # no closed form here: the necessary term-limit test settles it
    rep = series_analyze(Mul(AltSign(), Div(N, Add(N, c(1)))))
    assert rep.verdict == "diverges" and rep.term_limit_zero is False
    assert rep.direction is None  # sign alternates, no signed divergence
    rep = series_analyze(Div(N, Add(N, c(1))))
    assert rep.verdict == "diverges" and rep.direction == "+inf"


def test_series_convergence_implies_term_limit_zero():
    for term, anti in [
        (Geom(F(1, 2)), None),
        (seq_parse("1/((n+1)*(n+2))"), seq_parse("-1/(n+1)")),
        (Mul(AltSign(), Geom(F(1, 3))), None),
    ]:
        srep = series_analyze(term, antidifference=anti)
        assert srep.verdict == "converges"
        assert analyze(term).converges_to == 0


def test_nonnegative_boundedness_matches_verdict():
    # convergent nonnegative series have bounded partial sums and vice versa
    conv = series_partial_sum(Geom(F(1, 2)))
    assert analyze(conv).bounded
    div = series_partial_sum(Geom(F(3, 2)))
    assert not analyze(div).bounded


def test_liminf_limsup_attained():
    rep = analyze(seq_parse("altsign*(1+1/(n+1))"))
    assert rep.liminf in rep.limit_points and rep.limsup in rep.limit_points


# -- Cauchy products ---------------------------------------------------------------

def test_cauchy_product_geometric():
    rep = cauchy_product_check(Geom(F(1, 2)), Geom(F(1, 2)), 64)
    assert rep.target == 4
    assert rep.residual < F(1, 10 ** 9)
    trend = [r for _n, r in rep.trend]
    assert trend[-1] <= trend[0]


def test_cauchy_product_mixed_ratios():
    rep = cauchy_product_check(Geom(F(1, 3)), Geom(F(1, 2)), 64)
    assert rep.target == 3
    assert rep.residual < F(1, 10 ** 9)


def test_cauchy_product_unit_impulse():
    delta = patch([(0, 1)], c(0))
    rep = cauchy_product_check(delta, delta, 32)
    assert rep.partial == 1 and rep.residual == 0


def test_cauchy_product_needs_known_sums():
    from hypercalc.errors import UnknownSumError

    with pytest.raises(UnknownSumError):
        cauchy_product_check(seq_parse("patch[(0,0)]{1/n^2}"), Geom(F(1, 2)), 16)
