"""Tiny arithmetic expression grammar for field data entry.

Expressions are parsed through the ``ast`` module and rebuilt as sympy
expressions, so no user code is ever executed.  Allowed syntax: ``+ - * /
**``, unary minus, ``min``/``max``/``abs`` calls, numeric literals, the
constants ``pi`` and ``e``, the coordinate names ``x1 .. xN`` and time ``t``.
"""

from __future__ import annotations

import ast

import sympy


class ExpressionError(ValueError):
    """Raised when an expression string does not fit the grammar."""


_FUNCTIONS = {"min": sympy.Min, "max": sympy.Max, "abs": sympy.Abs}
_CONSTANTS = {"pi": sympy.pi, "e": sympy.E}

_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a ** b,
}


def coordinate_symbols(dim):
    """Symbols x1..x<dim> plus the time symbol, in that order."""
    xs = sympy.symbols(" ".join(f"x{i + 1}" for i in range(dim)))
    if dim == 1:
        xs = (xs,)
    return tuple(xs) + (sympy.Symbol("t"),)


def parse_expression(text, dim):
    """Parse ``text`` into a sympy expression over x1..x<dim> and t."""
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(
            f"parse error at line {exc.lineno}, column {exc.offset}: {exc.msg}"
        ) from None
    symbols = coordinate_symbols(dim)
    names = {f"x{i + 1}": symbols[i] for i in range(dim)}
    names["t"] = symbols[-1]
    names.update(_CONSTANTS)
    return _build(tree.body, names)


def _fail(node, message):
    raise ExpressionError(f"column {node.col_offset}: {message}")


def _build(node, names):
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            _fail(node, f"literal {node.value!r} is not numeric")
        return sympy.Number(node.value)
    if isinstance(node, ast.Name):
        if node.id not in names:
            _fail(node, f"unknown coordinate name '{node.id}'")
        return names[node.id]
    if isinstance(node, ast.BinOp):
        op = _BINOPS.get(type(node.op))
        if op is None:
            _fail(node, f"operator {type(node.op).__name__} not allowed")
        return op(_build(node.left, names), _build(node.right, names))
    if isinstance(node, ast.UnaryOp):
        if isinstance(node.op, ast.USub):
            return -_build(node.operand, names)
        if isinstance(node.op, ast.UAdd):
            return _build(node.operand, names)
        _fail(node, f"operator {type(node.op).__name__} not allowed")
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCTIONS:
            _fail(node, "only min, max and abs calls are allowed")
        if node.keywords:
            _fail(node, "keyword arguments are not allowed")
        args = [_build(a, names) for a in node.args]
        if not args:
            _fail(node, f"{node.func.id}() needs at least one argument")
        return _FUNCTIONS[node.func.id](*args)
    _fail(node, f"syntax element {type(node).__name__} not allowed")
