"""
Arithmetic expressions for density and map files.

Text is checked with `ast` against a whitelisted subset: numbers, the
declared variables, the constants pi and e (plus i for complex expressions),
+ - * / ** and calls to exp, cos, sin, sqrt, log, abs, pow. Accepted text is
turned into a sympy expression and lambdified to a vectorized numpy function.
"""

import ast
from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from errors import ParseError

_FUNCTIONS = {
    "exp": sp.exp,
    "cos": sp.cos,
    "sin": sp.sin,
    "sqrt": sp.sqrt,
    "log": sp.log,
    "abs": sp.Abs,
    "pow": sp.Pow,
}

_BINARY = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)
_UNARY = (ast.USub, ast.UAdd)


@dataclass(frozen=True)
class Expression:
    source: str
    variables: tuple
    symbolic: sp.Expr = field(repr=False, compare=False)
    function: object = field(repr=False, compare=False)

    def __call__(self, **values):
        missing = set(self.variables) - set(values)
        if missing:
            raise ValueError(f"missing values for {sorted(missing)}")
        with np.errstate(all="ignore"):
            return self.function(*(values[name] for name in self.variables))


def _check(node, names, line):
    def fail(message):
        raise ParseError(message, line, getattr(node, "col_offset", 0) + 1)

    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float, complex)):
            fail(f"unsupported literal {node.value!r}")
    elif isinstance(node, ast.Name):
        if node.id not in names:
            fail(f"unknown name '{node.id}'")
    elif isinstance(node, ast.BinOp):
        if not isinstance(node.op, _BINARY):
            fail(f"unsupported operator {type(node.op).__name__}")
        _check(node.left, names, line)
        _check(node.right, names, line)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, _UNARY):
            fail(f"unsupported operator {type(node.op).__name__}")
        _check(node.operand, names, line)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCTIONS:
            fail("only exp, cos, sin, sqrt, log, abs and pow may be called")
        if node.keywords:
            fail("keyword arguments are not allowed")
        expected = 2 if node.func.id == "pow" else 1
        if len(node.args) != expected:
            fail(f"{node.func.id} takes {expected} argument(s)")
        for arg in node.args:
            _check(arg, names, line)
    else:
        fail(f"unsupported syntax {type(node).__name__}")


def parse_expression(text, variables, complex_values=False, line=0, column=0):
    """
    Parses and validates an expression

    Args:
        text (str): Expression source
        variables (iterable): Allowed variable names
        complex_values (bool): Whether the constant i (imaginary unit) exists
        line (int): Line number reported in errors
        column (int): Column of the expression within its line

    Returns:
        Expression: Callable taking the variables as keyword arrays

    Raises:
        ParseError: invalid syntax or a name outside the whitelist
    """
    variables = tuple(variables)
    source = text.strip()
    constants = {"pi": sp.pi, "e": sp.E}
    if complex_values:
        constants["i"] = sp.I
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as e:
        raise ParseError(f"invalid expression: {e.msg}", line, column + (e.offset or 0)) from e
    try:
        _check(tree.body, set(variables) | set(constants), line)
    except ParseError as e:
        raise ParseError(str(e).split(": ", 1)[1], line, column + e.column) from None

    symbols = [sp.Symbol(name) for name in variables]
    names = dict(constants, **_FUNCTIONS)
    names.update(zip(variables, symbols))
    try:
        symbolic = sp.sympify(source, locals=names)
    except (sp.SympifyError, TypeError, ValueError) as e:
        raise ParseError(f"invalid expression: {e}", line, column + 1) from None
    return Expression(source, variables, symbolic, sp.lambdify(symbols, symbolic, modules="numpy"))
