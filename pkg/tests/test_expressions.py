import numpy as np
import pytest
import sympy
from numpy.testing import assert_allclose

from errors import ParseError
from expressions import parse_expression


def test_vectorized_evaluation():
    expr = parse_expression("1 + 0.5*x3 - x1**2", ["x1", "x2", "x3"])
    x = np.array([0.0, 0.5, 1.0])
    assert_allclose(expr(x1=x, x2=x, x3=x), 1.0 + 0.5 * x - x ** 2)


def test_functions_and_constants():
    expr = parse_expression("exp(x) + cos(pi*x) + pow(x, 2) + sqrt(abs(-x)) + log(e)", ["x"])
    assert expr(x=1.0) == pytest.approx(np.e - 1.0 + 1.0 + 1.0 + 1.0)


def test_imaginary_unit_only_for_complex_expressions():
    expr = parse_expression("z**2 + i", ["z"], complex_values=True)
    assert expr(z=1j) == pytest.approx(-1.0 + 1j)
    with pytest.raises(ParseError):
        parse_expression("z + i", ["z"])


def test_missing_variable_value():
    with pytest.raises(ValueError):
        parse_expression("x + 1", ["x"])()


@pytest.mark.parametrize("text", ["x.real", "lambda: 1", "[x]", "x if x else 1", "'a'", "exp(x, 2)",
                                  "gamma(x)", "x // 2", "pow(x)", "exp(x=1)"])
def test_rejected_syntax(text):
    with pytest.raises(ParseError):
        parse_expression(text, ["x"])


def test_error_positions():
    with pytest.raises(ParseError) as info:
        parse_expression("x + y", ["x"], line=3, column=10)
    assert info.value.line == 3
    assert info.value.column == 15
    assert "unknown name 'y'" in str(info.value)

    with pytest.raises(ParseError) as info:
        parse_expression("1 +", ["x"], line=2)
    assert info.value.line == 2


def test_symbolic_form():
    expr = parse_expression("pow(x, 2) + log(e)", ["x"])
    assert expr.symbolic.free_symbols == {sympy.Symbol("x")}
    assert expr(x=3.0) == pytest.approx(10.0)
