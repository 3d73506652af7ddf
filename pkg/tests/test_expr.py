"""Parser, evaluator and symbolic differentiation tests."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imcvf.errors import EvalDomainError, ExprSyntaxError, UnknownIdentifierError
from imcvf.expr import COORDS, diff, evaluate, parse, to_source


def ev(src, **coords):
    return evaluate(parse(src), coords)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def test_parse_literal():
    assert ev("1") == 1.0


def test_parse_product_shape():
    e = parse("r^2*sin(th)")
    assert ev("r^2*sin(th)", r=3.0, th=math.pi / 2) == pytest.approx(9.0)
    assert "sin" in to_source(e)


def test_parse_nested_eval():
    val = ev("r^2*(1+0.1*sin(th)^2*cos(ph))", t=0.0, r=2.0, th=math.pi / 2, ph=0.0)
    assert val == pytest.approx(4.4, abs=1e-14)


def test_precedence_and_associativity():
    assert ev("2+3*4") == 14.0
    assert ev("2*3^2") == 18.0
    assert ev("-2^2") == -4.0          # ^ binds tighter than unary minus
    assert ev("(-2)^2") == 4.0
    assert ev("2^3^2") == 512.0        # right-associative
    assert ev("8/4/2") == 1.0          # / left-associative
    assert ev("1-2-3") == -4.0


def test_pi_constant():
    assert ev("cos(pi)") == pytest.approx(-1.0)


def test_params_substitution():
    e = parse("1+m/(2*r)", params={"m": 3.0})
    assert evaluate(e, {"r": 1.5}) == pytest.approx(2.0)


def test_syntax_error_offset():
    with pytest.raises(ExprSyntaxError) as exc:
        parse("r^2*")
    assert exc.value.offset == 4
    with pytest.raises(ExprSyntaxError):
        parse("sin th")
    with pytest.raises(ExprSyntaxError):
        parse("r^th")  # non-constant exponent


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError) as exc:
        parse("r + q")
    assert "q" in str(exc.value)
    assert "r" in exc.value.expected


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def test_eval_examples():
    assert ev("sin(th)", th=math.pi / 2) == pytest.approx(1.0)
    assert ev("r^2", r=3.0) == 9.0
    assert ev("exp(t)*r", t=1.0, r=2.0) == pytest.approx(2.0 * math.e)


def test_eval_vectorized():
    r = np.linspace(1.0, 5.0, 7)
    out = evaluate(parse("r^2+1"), {"r": r})
    np.testing.assert_allclose(out, r**2 + 1)


def test_eval_domain_errors():
    with pytest.raises(EvalDomainError):
        ev("1/(r-1)", r=1.0)
    with pytest.raises(EvalDomainError):
        ev("log(t)", t=0.0)
    with pytest.raises(EvalDomainError):
        ev("sqrt(t)", t=-1.0)
    with pytest.raises(EvalDomainError):
        ev("t^(-1)", t=0.0)


# ---------------------------------------------------------------------------
# differentiation
# ---------------------------------------------------------------------------

def test_diff_chain_rule():
    e = diff(parse("r^2*sin(th)"), "th")
    assert evaluate(e, {"r": 2.0, "th": 0.0}) == pytest.approx(4.0)  # r^2 cos(0)


def test_diff_constant():
    assert evaluate(diff(parse("1"), "r"), {"r": 5.0}) == 0.0


def test_diff_value_example():
    e = diff(parse("r^4*sin(th)^2"), "th")
    assert evaluate(e, {"r": 1.0, "th": math.pi / 4}) == pytest.approx(1.0)


def test_mixed_partials_commute():
    e = parse("exp(t*r)*sin(th)^3/(1+r^2)")
    env = {"t": 0.3, "r": 1.7, "th": 1.1, "ph": 0.2}
    for x in COORDS:
        for y in COORDS:
            d1 = evaluate(diff(diff(e, x), y), env)
            d2 = evaluate(diff(diff(e, y), x), env)
            assert d1 == pytest.approx(d2, rel=1e-10, abs=1e-12)


def test_diff_linearity():
    a, b = parse("sin(th)*r"), parse("cos(th)/r")
    env = {"r": 2.0, "th": 0.7}
    lhs = evaluate(diff(a + b, "th"), env)
    rhs = evaluate(diff(a, "th"), env) + evaluate(diff(b, "th"), env)
    assert lhs == pytest.approx(rhs, rel=1e-14)


# random-expression agreement with centered finite differences
_RNG = np.random.default_rng(20240817)


def _random_expr(depth, rng):
    if depth == 0:
        return rng.choice(["t", "r", "th", f"{rng.uniform(0.2, 3.0):.3f}"])
    a = _random_expr(depth - 1, rng)
    b = _random_expr(depth - 1, rng)
    op = rng.choice(["+", "-", "*", "fn", "pow"])
    if op == "fn":
        fn = rng.choice(["sin", "cos", "exp"])
        return f"{fn}(0.3*({a}))"
    if op == "pow":
        return f"({a})^{int(rng.integers(1, 4))}"
    return f"({a}){op}({b})"


@pytest.mark.parametrize("trial", range(25))
def test_diff_matches_finite_differences(trial):
    rng = np.random.default_rng(1000 + trial)
    src = _random_expr(3, rng)
    e = parse(src)
    h = 1e-5
    for v in ("t", "r", "th"):
        env = {"t": rng.uniform(0.1, 1.0), "r": rng.uniform(1.0, 3.0),
               "th": rng.uniform(0.5, 2.5), "ph": rng.uniform(0.0, 6.0)}
        up = dict(env)
        dn = dict(env)
        up[v] += h
        dn[v] -= h
        fd = (evaluate(e, up) - evaluate(e, dn)) / (2 * h)
        exact = evaluate(diff(e, v), env)
        assert abs(exact - fd) <= 1e-6 * (1.0 + abs(exact))


# ---------------------------------------------------------------------------
# printing round trip
# ---------------------------------------------------------------------------

_SOURCES = [
    "r^2*sin(th)",
    "1+0.5*cos(ph)-t",
    "-r^2",
    "r^(-2)",
    "(1-2/r)^(-0.5)",
    "exp(t)*log(r)/sqrt(1+th^2)",
    "tan(th/4)",
    "2^3^2",
    "a" .replace("a", "t-r-th"),
]


@pytest.mark.parametrize("src", _SOURCES)
def test_roundtrip_fixed(src):
    e = parse(src)
    e2 = parse(to_source(e))
    env = {"t": 0.4, "r": 2.3, "th": 1.2, "ph": 0.8}
    v1, v2 = evaluate(e, env), evaluate(e2, env)
    assert v2 == pytest.approx(v1, rel=1e-12, abs=1e-15)


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_roundtrip_random(seed):
    rng = np.random.default_rng(seed)
    src = _random_expr(int(rng.integers(1, 4)), rng)
    e = parse(src)
    e2 = parse(to_source(e))
    env = {"t": rng.uniform(0.1, 1.0), "r": rng.uniform(1.0, 3.0),
           "th": rng.uniform(0.5, 2.5), "ph": rng.uniform(0.0, 6.0)}
    v1, v2 = evaluate(e, env), evaluate(e2, env)
    assert v2 == pytest.approx(v1, rel=1e-12, abs=1e-15)


def test_roundtrip_of_derivative_trees():
    e = parse("exp(t*r)*sin(th)^3/(1+r^2)")
    d = diff(diff(e, "r"), "th")
    d2 = parse(to_source(d))
    env = {"t": 0.2, "r": 1.4, "th": 0.9}
    assert evaluate(d2, env) == pytest.approx(evaluate(d, env), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="tr hp()+-*/^.0123456789sincoexpqlg", max_size=40))
def test_parser_total_on_garbage(source):
    """Arbitrary input either parses or raises the structured syntax error,
    never anything else."""
    from imcvf.errors import ExprSyntaxError
    try:
        parse(source)
    except ExprSyntaxError:
        pass


def test_literal_zero_division_is_an_evaluation_error():
    e = parse("1/(2-2)")
    with pytest.raises(EvalDomainError):
        evaluate(e, {})
    e2 = parse("(1-1)^(-2)")
    with pytest.raises(EvalDomainError):
        evaluate(e2, {})
