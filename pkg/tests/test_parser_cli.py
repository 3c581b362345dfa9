"""Parser round trips, CLI behavior, output schemas, and fuzzing."""

import io
import json
import random
import subprocess
import sys
from fractions import Fraction

import pytest

from hypercalc.cli import fraction_text, run
from hypercalc.errors import ParseError
from hypercalc.expressions import render
from hypercalc.parser import FUNCTION, HYPER_TERM, SEQUENCE, parse

F = Fraction


def capture(argv):
    buf = io.BytesIO()
    code = run(argv, stdout=buf)
    return code, buf.getvalue().decode()


# -- parsing ------------------------------------------------------------------

def test_grammar_examples():
    assert parse(HYPER_TERM, "(3*W^2+1)/(W^2+W)").ast is not None
    assert parse(SEQUENCE, "altsign*(1+1/(n+1))").ast is not None
    assert parse(FUNCTION, "sin(x)/x").ast is not None


def test_eps_sugar_desugars():
    one_over_w = parse(HYPER_TERM, "1/W").ast
    assert parse(HYPER_TERM, "eps").ast == one_over_w


def test_power_binds_integer_literals_only():
    with pytest.raises(ParseError):
        parse(FUNCTION, "x^x")
    with pytest.raises(ParseError):
        parse(FUNCTION, "x^(2)")
    assert parse(FUNCTION, "x^-2").ast is not None


def test_wrong_variable_diagnostics():
    for kind, text in [
        (FUNCTION, "sin(n)"),
        (SEQUENCE, "x+1"),
        (HYPER_TERM, "n"),
        (SEQUENCE, "W"),
    ]:
        with pytest.raises(ParseError) as err:
            parse(kind, text)
        assert err.value.span is not None


def test_error_spans_point_at_the_problem():
    try:
        parse(FUNCTION, "sin(x) + foo(x)")
    except ParseError as err:
        start, end = err.span
        assert "sin(x) + foo(x)"[start:end] == "foo"
    else:
        pytest.fail("expected a parse error")


def _random_expr_text(rng, kind, depth=3):
    if depth == 0:
        leaves = {
            HYPER_TERM: ["W", "eps", str(rng.randint(0, 9)), f"{rng.randint(1,9)}/{rng.randint(1,9)}"],
            SEQUENCE: ["n", "altsign", f"geom({rng.randint(1,7)}/{rng.randint(1,7)})", str(rng.randint(0, 9))],
            FUNCTION: ["x", str(rng.randint(0, 9)), f"{rng.randint(1,9)}/{rng.randint(1,9)}"],
        }[kind]
        return rng.choice(leaves)
    op = rng.choice(["+", "-", "*", "/", "pow", "neg", "group", "call"])
    a = _random_expr_text(rng, kind, depth - 1)
    b = _random_expr_text(rng, kind, depth - 1)
    if op == "pow":
        return f"({a})^{rng.randint(0, 4)}"
    if op == "neg":
        return f"-({a})"
    if op == "group":
        return f"({a})"
    if op == "call":
        if kind == FUNCTION:
            fn = rng.choice(["sin", "cos", "exp", "abs"])
            return f"{fn}({a})"
        if kind == SEQUENCE and rng.random() < 0.3:
            return f"patch[({rng.randint(0,5)},{rng.randint(-5,5)})]{{{a}}}"
        return f"({a})"
    return f"{a} {op} {b}"


def test_round_trip_200_cases_per_grammar():
    rng = random.Random(20260808)
    for kind in (HYPER_TERM, SEQUENCE, FUNCTION):
        done = 0
        while done < 200:
            text = _random_expr_text(rng, kind)
            try:
                first = parse(kind, text).ast
            except ParseError:
                continue
            second = parse(kind, render(first)).ast
            assert second == first, (kind, text, render(first))
            done += 1


# -- CLI ----------------------------------------------------------------------

def test_st_example():
    assert capture(["st", "(3*W^2+W)/(W^2+1)"]) == (0, "3\n")


def test_classify_example():
    assert capture(["classify", "eps^2*W"]) == (0, "infinitesimal, positive\n")


def test_lhospital_example():
    assert capture(["lhospital", "sin(x)", "x", "--at", "0"]) == (0, "1\n")


def test_classify_json_schema():
    code, out = capture(["--json", "classify", "W"])
    assert code == 0
    body = json.loads(out)
    assert body["schema"] == "hypercalc/1"
    assert body["tag"] == "infinite" and body["sign"] == "positive"


def test_seq_dependence_json():
    code, out = capture(["--json", "seq", "altsign"])
    body = json.loads(out)
    assert body["verdict"] == "ultrafilter_dependent"
    assert body["witness_classes"] == {"even": "1", "odd": "-1"}


def test_integrate_json_schema():
    code, out = capture(["--json", "integrate", "x^2", "--from", "0", "--to", "1"])
    body = json.loads(out)
    assert body["value"] == "1/3" and body["tag"] == "exact"
    assert set(body) >= {"value", "tag", "gap", "cells", "mode"}


def test_series_cli():
    code, out = capture(["series", "1/((n+1)*(n+2))", "--antidiff=-1/(n+1)"])
    assert code == 0 and "converges to 1" in out
    code, out = capture(["series", "patch[(0,0)]{1/n}"])
    assert "diverges to +inf" in out


def test_deriv_cli():
    assert capture(["deriv", "x^3", "--at", "2"]) == (0, "12\n")
    assert capture(["deriv", "x^3", "--at", "0", "--order", "3"]) == (0, "6\n")


def test_integrate_pi_endpoint():
    code, out = capture(
        ["integrate", "sin(x)", "--from", "0", "--to", "pi/2", "--tol", "1e-4"]
    )
    assert code == 0
    value = float(out.split()[0])
    assert abs(value - 1.0) < 1e-3


def test_filter_cli_round_trip():
    code, out = capture(["filter", "principal", "--universe", "3", "--set", "[1]"])
    assert code == 0
    members = json.loads(out)
    code, out = capture(["filter", "check", json.dumps(members), "--universe", "3"])
    assert "ultrafilter: true" in out


def test_rational_rendering():
    assert fraction_text(F(3)) == "3"
    assert fraction_text(F(-7, 2)) == "-7/2"
    assert fraction_text(float("inf")) == "+inf"
    assert fraction_text(float("-inf")) == "-inf"
    assert fraction_text(1.0) == "1"
    assert fraction_text(0.5) == "0.5"


def test_cli_determinism():
    args = ["--json", "seq", "altsign*(1+1/(n+1))"]
    assert capture(args) == capture(args)
    args = ["--json", "integrate", "x^3-x", "--from", "0", "--to", "2"]
    assert capture(args) == capture(args)


def test_error_exit_codes():
    code, out = capture(["st", "W^2"])  # infinite argument
    assert code == 1 and "error" in out
    code, out = capture(["classify", "((("])
    assert code == 1
    code, _ = capture(["unknown-subcommand"])
    assert code == 2
    code, _ = capture(["deriv", "x^2"])  # missing --at
    assert code == 2


def test_error_json_carries_diagnostics():
    code, out = capture(["--json", "classify", "n+1"])
    assert code == 1
    body = json.loads(out)
    assert body["status"] == "error"
    assert body["diagnostics"][0]["span"] is not None


def test_fuzzed_inputs_never_crash():
    rng = random.Random(1234)
    commands = ["classify", "st", "seq", "series", "deriv", "integrate"]
    for i in range(10 ** 4):
        length = rng.randint(3, 24)
        junk = "".join(chr(rng.randint(1, 255)) for _ in range(length))
        cmd = commands[i % len(commands)]
        argv = {
            "deriv": [cmd, junk, "--at", "0"],
            "integrate": [cmd, junk, "--from", "0", "--to", "1"],
        }.get(cmd, [cmd, junk])
        code = run(argv, stdout=io.BytesIO())
        assert code in (1, 2), (cmd, junk)


def test_repl_session():
    script = "let a = (W+1)/W\nst a\nclassify a\ncmp a 1\nquit\n"
    proc = subprocess.run(
        [sys.executable, "-m", "hypercalc.cli", "repl"],
        input=script.encode(),
        capture_output=True,
        timeout=120,
    )
    out = proc.stdout.decode()
    assert "a = (W + 1)/(W)" in out
    assert "\n1\n" in out
    assert "appreciable, positive" in out
    assert "greater" in out
    assert proc.returncode == 0


def test_console_entry_point():
    proc = subprocess.run(
        ["hypercalc", "st", "2 + 3*eps"], capture_output=True, timeout=120
    )
    assert proc.returncode == 0 and proc.stdout.decode().strip() == "2"
