import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strictio import expr
from strictio.expr import Expr, ParseError, UnknownIdentifierError, parse, to_source


def test_parse_structure():
    node = parse("sin(t)+t^4*cos(t)")
    assert isinstance(node, expr.BinOp) and node.op == "+"
    assert isinstance(node.left, expr.Call) and node.left.fn == "sin"
    mul = node.right
    assert mul.op == "*" and isinstance(mul.left, expr.Pow) and mul.left.exponent == 4
    assert isinstance(parse("2"), expr.Const)
    assert isinstance(parse("1/t"), expr.BinOp)


@pytest.mark.parametrize(
    "src, t0, order, expected",
    [("t^2", 3, 2, [9, 6, 2]), ("sin(t)", 0, 3, [0, 1, 0, -1]), ("sin(t)+t", 0, 1, [0, 2])],
)
def test_eval_jet_examples(src, t0, order, expected):
    np.testing.assert_allclose(expr.eval_jet(parse(src), t0, order).coeffs, expected, atol=1e-15)


def test_precedence():
    assert Expr("-t^2")(3.0) == -9.0
    assert Expr("2^-1")(0.0) == 0.5
    assert Expr("8/4/2")(0.0) == 1.0
    assert Expr("1-2-3")(0.0) == -4.0
    assert Expr("2*pi")(0.0) == pytest.approx(2 * math.pi)


def test_errors_carry_offsets():
    with pytest.raises(ParseError) as ei:
        parse("t + * 2")
    assert ei.value.offset == 4
    assert "number" in ei.value.expected
    with pytest.raises(UnknownIdentifierError) as ei:
        parse("sin(x)")
    assert ei.value.offset == 4
    with pytest.raises(ParseError, match="chained"):
        parse("t^2^3")
    with pytest.raises(ParseError, match="integer"):
        parse("t^0.5")
    # offsets are in bytes of the UTF-8 source
    with pytest.raises(ParseError) as ei:
        parse("t + é")
    assert ei.value.offset == 4


def test_pole_is_evaluation_error():
    node = parse("1/t")
    with pytest.raises(expr.ExprEvalError) as ei:
        expr.eval_jet(node, 0.0, 2)
    assert ei.value.offset == 1


# -- fuzzing against Python's own evaluator --------------------------------------

def _leaf():
    return st.one_of(
        st.just("t"),
        st.integers(0, 9).map(str),
        st.sampled_from(["0.5", "1.25", "pi"]),
    )


def _extend(children):
    return st.one_of(
        st.tuples(children, st.sampled_from(["+", "-", "*"]), children).map(lambda x: f"{x[0]} {x[1]} {x[2]}"),
        st.tuples(children, children).map(lambda x: f"{x[0]} / (2 + ({x[1]})^2)"),
        children.map(lambda c: f"-{c}"),
        st.tuples(children, st.integers(0, 3)).map(lambda x: f"({x[0]})^{x[1]}"),
        st.tuples(st.sampled_from(["sin", "cos", "exp"]), children).map(lambda x: f"{x[0]}({x[1]})"),
        children.map(lambda c: f"({c})"),
    )


sources = st.recursive(_leaf(), _extend, max_leaves=8)


def _python_value(src, t):
    py = src.replace("^", "**")
    env = {"t": t, "pi": math.pi, "sin": math.sin, "cos": math.cos, "exp": math.exp, "sqrt": math.sqrt}
    return eval(py, {"__builtins__": {}}, env)


@settings(max_examples=1000)
@given(sources, st.floats(-1.5, 1.5))
def test_agrees_with_python_evaluation(src, t):
    # Python binds unary minus looser than **, as this grammar does
    try:
        ref = _python_value(src, t)
    except (OverflowError, ZeroDivisionError):
        return
    if not math.isfinite(ref) or abs(ref) > 1e12:
        return
    assert Expr(src)(t) == pytest.approx(ref, rel=1e-12, abs=1e-12)


@given(sources)
def test_round_trip(src):
    node = parse(src)
    assert parse(to_source(node)) == node


@given(sources, st.floats(-1.5, 1.5))
def test_order_zero_jet_is_value(src, t):
    try:
        v = Expr(src)(t)
    except expr.ExprEvalError:
        return
    if not math.isfinite(v) or abs(v) > 1e12:
        return
    assert expr.eval_jet(parse(src), t, 0).value == pytest.approx(v, rel=1e-15, abs=1e-15)


def test_array_evaluation_broadcasts_constants():
    out = Expr("3")(np.linspace(0, 1, 4))
    assert out.shape == (4,) and np.all(out == 3.0)
