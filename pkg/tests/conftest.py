"""Shared fixtures: the analytic battery and helpers for random elements."""

import random
from fractions import Fraction

import pytest

from hypercalc.expressions import Add, Call, Const, Div, Mul, Neg, Pow, Sub, Var

X = Var("x")


def c(v):
    return Const(Fraction(v))


# (label, expression, probe points) - functions smooth at every listed point
ANALYTIC_BATTERY = [
    ("x^2", Pow(X, 2), [-3, -1, Fraction(-1, 2), Fraction(1, 3), 1, 2, 3, 4, 5, 6]),
    ("x^3-2x", Sub(Pow(X, 3), Mul(c(2), X)), [-3, -2, -1, 0, 1, 2, 3, 4, 5, 6]),
    ("1/(1+x^2)", Div(c(1), Add(c(1), Pow(X, 2))), [-3, -2, -1, 0, 1, 2, 3, 4, 5, 6]),
    (
        "(x^2-1)/(x^2+1)",
        Div(Sub(Pow(X, 2), c(1)), Add(Pow(X, 2), c(1))),
        [-3, -2, -1, 0, 1, 2, 3, 4, 5, 6],
    ),
    ("sin", Call("sin", X), [-2, -1, 0, Fraction(1, 2), 1, 2, 3, 4, 5, 6]),
    ("cos", Call("cos", X), [-2, -1, 0, Fraction(1, 2), 1, 2, 3, 4, 5, 6]),
    ("exp", Call("exp", X), [-2, -1, 0, Fraction(1, 2), 1, 2, 3, 4, 5, 6]),
    ("ln", Call("ln", X), [Fraction(1, 4), Fraction(1, 2), 1, 2, 3, 4, 5, 6, 7, 8]),
    ("sqrt", Call("sqrt", X), [Fraction(1, 4), Fraction(1, 2), 1, 2, 3, 4, 5, 6, 7, 9]),
    (
        "sin*cos",
        Mul(Call("sin", X), Call("cos", X)),
        [-2, -1, 0, Fraction(1, 2), 1, 2, 3, 4, 5, 6],
    ),
    ("exp(-x^2)", Call("exp", Neg(Pow(X, 2))), [-2, -1, 0, Fraction(1, 2), 1, 2, 3, -3, Fraction(3, 2), Fraction(-1, 2)]),
    ("x*exp(x)", Mul(X, Call("exp", X)), [-2, -1, 0, Fraction(1, 2), 1, 2, 3, -3, Fraction(5, 2), Fraction(-1, 2)]),
    ("ln(1+x^2)", Call("ln", Add(c(1), Pow(X, 2))), [-2, -1, 0, Fraction(1, 2), 1, 2, 3, 4, 5, 6]),
    ("sqrt(1+x^2)", Call("sqrt", Add(c(1), Pow(X, 2))), [-2, -1, 0, Fraction(1, 2), 1, 2, 3, 4, 5, 6]),
    ("sin(x^2)", Call("sin", Pow(X, 2)), [-2, -1, 0, Fraction(1, 2), 1, 2, Fraction(3, 2), Fraction(-1, 2), Fraction(5, 4), Fraction(1, 3)]),
    (
        "cos/(2+sin)",
        Div(Call("cos", X), Add(c(2), Call("sin", X))),
        [-2, -1, 0, Fraction(1, 2), 1, 2, 3, 4, 5, 6],
    ),
    ("exp(sin(x))", Call("exp", Call("sin", X)), [-2, -1, 0, Fraction(1, 2), 1, 2, 3, 4, 5, 6]),
    (
        "x^4-3x^2+1",
        Add(Sub(Pow(X, 4), Mul(c(3), Pow(X, 2))), c(1)),
        [-3, -2, -1, 0, 1, 2, 3, 4, 5, 6],
    ),
    ("abs", Call("abs", X), [-4, -3, -2, -1, Fraction(-1, 2), Fraction(1, 2), 1, 2, 3, 4]),
    (
        "(1+x)^5/(1+x^2)",
        Div(Pow(Add(c(1), X), 5), Add(c(1), Pow(X, 2))),
        [-3, -2, 0, Fraction(1, 2), 1, 2, 3, 4, 5, 6],
    ),
]

# interior extrema with known zero derivative (for the extremum sanity check)
KNOWN_EXTREMA = [
    ("x^2", Pow(X, 2), Fraction(0)),
    ("cos", Call("cos", X), Fraction(0)),
    ("x^3-2x-ish", Add(Sub(Pow(X, 2), Mul(c(2), X)), c(5)), Fraction(1)),
    ("exp(-x^2)", Call("exp", Neg(Pow(X, 2))), Fraction(0)),
]

# polynomial integration battery: (label, expr, interval)
POLY_BATTERY = [
    ("x^2 [0,1]", Pow(X, 2), (Fraction(0), Fraction(1))),
    ("x^3 [0,2]", Pow(X, 3), (Fraction(0), Fraction(2))),
    ("x^3-2x [-2,2]", Sub(Pow(X, 3), Mul(c(2), X)), (Fraction(-2), Fraction(2))),
    (
        "x^4-3x^2+1 [-1,2]",
        Add(Sub(Pow(X, 4), Mul(c(3), Pow(X, 2))), c(1)),
        (Fraction(-1), Fraction(2)),
    ),
    ("7 [0,3]", c(7), (Fraction(0), Fraction(3))),
    ("x [0,1]", X, (Fraction(0), Fraction(1))),
    (
        "5x^5-x^2 [0,1]",
        Sub(Mul(c(5), Pow(X, 5)), Pow(X, 2)),
        (Fraction(0), Fraction(1)),
    ),
]


@pytest.fixture(scope="session")
def rng():
    return random.Random(20260808)
