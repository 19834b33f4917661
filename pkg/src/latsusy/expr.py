"""Safe evaluation of small rational expressions such as ``(2*a+3)/((a+1)**2*(a+2)**2)``.

Only numbers, named variables, ``+ - * / **`` and parentheses are accepted.
Integer literals become Fractions, so rational inputs give exact results.
"""

from __future__ import annotations

import ast
import operator
from fractions import Fraction
from numbers import Rational

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}


def _literal(value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"unsupported literal {value!r}")
    return Fraction(value) if isinstance(value, int) else value


class RationalExpression:
    def __init__(self, source: str, variables=("a",)):
        self.source = source
        self.variables = tuple(variables)
        try:
            self._tree = ast.parse(source, mode="eval").body
        except SyntaxError as exc:
            raise ValueError(f"cannot parse expression {source!r}: {exc.msg}") from None
        self._validate(self._tree)

    def _validate(self, node):
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            self._validate(node.left)
            self._validate(node.right)
        elif isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
            self._validate(node.operand)
        elif isinstance(node, ast.Constant):
            _literal(node.value)
        elif isinstance(node, ast.Name):
            if node.id not in self.variables:
                raise ValueError(f"unknown variable {node.id!r} in {self.source!r}")
        else:
            raise ValueError(f"unsupported syntax in expression {self.source!r}")

    def __call__(self, **values):
        env = {k: Fraction(v) if isinstance(v, Rational) else v for k, v in values.items()}
        result = self._eval(self._tree, env)
        if isinstance(result, Fraction) and result.denominator == 1:
            return int(result)
        return result

    def _eval(self, node, env):
        if isinstance(node, ast.BinOp):
            left, right = self._eval(node.left, env), self._eval(node.right, env)
            if isinstance(node.op, ast.Pow) and isinstance(right, Fraction):
                right = int(right) if right.denominator == 1 else float(right)
            return _BINOPS[type(node.op)](left, right)
        if isinstance(node, ast.UnaryOp):
            val = self._eval(node.operand, env)
            return -val if isinstance(node.op, ast.USub) else val
        if isinstance(node, ast.Constant):
            return _literal(node.value)
        return env[node.id]

    def __repr__(self):
        return f"RationalExpression({self.source!r})"
