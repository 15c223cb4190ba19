"""Expression parsing and second-order forward-mode evaluation.

Scalar expressions over named chart coordinates (for example the warping
function ``"3 + cos(u) + cos(w)"``) are parsed into an immutable AST and
evaluated with exact first and second partial derivatives carried by
truncated second-order Taylor arithmetic.  No finite differences are
involved; derivatives are exact to machine precision for the supported
operator set.

Grammar
-------
Binary operators ``+ - * / ^`` with the usual precedence, unary minus, and
calls of the smooth functions ``sin cos exp log sqrt``.  ``^`` is
right-associative and binds tighter than a unary minus applied to its base,
so ``-u^2`` parses as ``-(u^2)``.  ``abs`` is deliberately unsupported
(non-smooth).  Variable binding is positional: the variable list passed to
:func:`parse` fixes the coordinate order for evaluation points.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

__all__ = [
    "ParseError",
    "DomainError",
    "Jet2",
    "Expression",
    "parse",
    "eval_jet2",
    "to_source",
]


class ParseError(ValueError):
    """Raised on malformed source; ``offset`` is the character offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.message = message
        self.offset = offset


class DomainError(ArithmeticError):
    """Raised when evaluation leaves a function's smooth domain.

    ``fragment`` is the offending subexpression text, ``offset`` its start.
    """

    def __init__(self, message: str, fragment: str, offset: int):
        super().__init__(f"{message} in '{fragment}' (at offset {offset})")
        self.message = message
        self.fragment = fragment
        self.offset = offset


# ---------------------------------------------------------------------------
# 2-jets


@dataclass(frozen=True)
class Jet2:
    """Value, gradient, and Hessian of a scalar function at a point.

    The Hessian is stored exactly symmetric: the constructor keeps the upper
    triangle and mirrors it, so symmetry is structural rather than a
    floating-point accident.
    """

    value: float
    gradient: np.ndarray
    hessian: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gradient, dtype=float)
        h = np.asarray(self.hessian, dtype=float)
        upper = np.triu(h)
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "gradient", g)
        object.__setattr__(self, "hessian", upper + upper.T - np.diag(np.diag(upper)))

    @staticmethod
    def constant(c: float, n: int) -> "Jet2":
        return Jet2(c, np.zeros(n), np.zeros((n, n)))

    @staticmethod
    def variable(value: float, index: int, n: int) -> "Jet2":
        g = np.zeros(n)
        g[index] = 1.0
        return Jet2(value, g, np.zeros((n, n)))

    def _lift(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            return other
        return Jet2.constant(float(other), self.gradient.shape[0])

    def chain(self, f: float, f1: float, f2: float) -> "Jet2":
        """Compose with a scalar function given f(v), f'(v), f''(v)."""
        g = self.gradient
        return Jet2(f, f1 * g, f1 * self.hessian + f2 * np.outer(g, g))

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.gradient, -self.hessian)

    def __add__(self, other) -> "Jet2":
        o = self._lift(other)
        return Jet2(self.value + o.value, self.gradient + o.gradient, self.hessian + o.hessian)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet2":
        o = self._lift(other)
        return Jet2(self.value - o.value, self.gradient - o.gradient, self.hessian - o.hessian)

    def __rsub__(self, other) -> "Jet2":
        return self._lift(other) - self

    def __mul__(self, other) -> "Jet2":
        o = self._lift(other)
        value = self.value * o.value
        grad = self.value * o.gradient + o.value * self.gradient
        hess = (
            self.value * o.hessian
            + o.value * self.hessian
            + np.outer(self.gradient, o.gradient)
            + np.outer(o.gradient, self.gradient)
        )
        return Jet2(value, grad, hess)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet2":
        v = self.value
        if v == 0.0:
            raise ZeroDivisionError("reciprocal of zero")
        return self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))

    def __truediv__(self, other) -> "Jet2":
        return self * self._lift(other).reciprocal()

    def __rtruediv__(self, other) -> "Jet2":
        return self._lift(other) * self.reciprocal()


# ---------------------------------------------------------------------------
# AST

Span = tuple


@dataclass(frozen=True)
class Const:
    value: float
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    index: int
    name: str
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Neg:
    child: "Node"
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Node"
    right: "Node"
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Node"
    span: Span = field(default=(0, 0), compare=False, repr=False)


Node = Union[Const, Var, Neg, Bin, Call]

# f(v), f'(v), f''(v); None marks a domain restriction checked at call time
_FUNCTIONS = {
    "sin": lambda v: (math.sin(v), math.cos(v), -math.sin(v)),
    "cos": lambda v: (math.cos(v), -math.sin(v), -math.cos(v)),
    "exp": lambda v: (math.exp(v), math.exp(v), math.exp(v)),
    "log": lambda v: (math.log(v), 1.0 / v, -1.0 / (v * v)),
    "sqrt": lambda v: (math.sqrt(v), 0.5 / math.sqrt(v), -0.25 / math.sqrt(v) ** 3),
}
_POSITIVE_DOMAIN = {"log", "sqrt"}


# ---------------------------------------------------------------------------
# Tokenizer / parser (precedence climbing)

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[+*/^()-]|−)"
)

_BINARY_PRECEDENCE = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_UNARY_PRECEDENCE = 30  # below ^, above * and /
_RIGHT_ASSOCIATIVE = {"^"}


@dataclass(frozen=True)
class _Token:
    kind: str  # "num" | "name" | "op" | "end"
    text: str
    offset: int


def _tokenize(source: str) -> list:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", pos)
        if m.lastgroup != "ws":
            text = m.group()
            if text == "−":  # unicode minus, accepted as '-'
                text = "-"
            tokens.append(_Token(m.lastgroup, text, pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str, variables: Sequence[str]):
        self.source = source
        self.variables = {name: i for i, name in enumerate(variables)}
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse(self) -> Node:
        node = self.parse_expr(0)
        tok = self.peek()
        if tok.kind != "end":
            if tok.text == ")":
                raise ParseError("unbalanced parentheses", tok.offset)
            raise ParseError(f"unexpected token {tok.text!r}", tok.offset)
        return node

    def parse_expr(self, min_precedence: int) -> Node:
        left = self.parse_operand()
        while True:
            tok = self.peek()
            if tok.kind != "op" or tok.text not in _BINARY_PRECEDENCE:
                break
            prec = _BINARY_PRECEDENCE[tok.text]
            if prec < min_precedence:
                break
            self.advance()
            next_min = prec if tok.text in _RIGHT_ASSOCIATIVE else prec + 1
            right = self.parse_expr(next_min)
            left = Bin(tok.text, left, right, (left.span[0], right.span[1]))
        return left

    def parse_operand(self) -> Node:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Const(float(tok.text), (tok.offset, tok.offset + len(tok.text)))
        if tok.kind == "name":
            self.advance()
            if self.peek().text == "(":
                if tok.text not in _FUNCTIONS:
                    raise ParseError(f"unknown identifier {tok.text!r}", tok.offset)
                self.advance()
                arg = self.parse_expr(0)
                closing = self.peek()
                if closing.text != ")":
                    raise ParseError("unbalanced parentheses", closing.offset)
                self.advance()
                return Call(tok.text, arg, (tok.offset, closing.offset + 1))
            if tok.text not in self.variables:
                raise ParseError(f"unknown identifier {tok.text!r}", tok.offset)
            return Var(self.variables[tok.text], tok.text, (tok.offset, tok.offset + len(tok.text)))
        if tok.text == "(":
            self.advance()
            node = self.parse_expr(0)
            closing = self.peek()
            if closing.text != ")":
                raise ParseError("unbalanced parentheses", closing.offset)
            self.advance()
            return node
        if tok.text == "-":
            self.advance()
            child = self.parse_expr(_UNARY_PRECEDENCE)
            return Neg(child, (tok.offset, child.span[1]))
        raise ParseError("empty operand", tok.offset)


@dataclass(frozen=True)
class Expression:
    """Parsed expression bound to an ordered coordinate list."""

    root: Node
    variables: tuple
    source: str

    @property
    def n(self) -> int:
        return len(self.variables)

    def jet2(self, point) -> Jet2:
        return eval_jet2(self, point)

    def value(self, point) -> float:
        return eval_jet2(self, point).value

    def to_source(self) -> str:
        return to_source(self.root)


def parse(source: str, variables: Sequence[str]) -> Expression:
    """Parse ``source`` over the ordered coordinate names ``variables``.

    Raises :class:`ParseError` with a character offset on malformed input or
    on identifiers that are neither declared coordinates nor supported
    functions.
    """
    if not source or not source.strip():
        raise ParseError("empty expression", 0)
    names = list(variables)
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate coordinate names in {names}")
    root = _Parser(source, names).parse()
    return Expression(root, tuple(names), source)


def to_source(node: Node) -> str:
    """Render a tree back to text; reparsing yields a structurally equal tree."""
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_source(node.child)})"
    if isinstance(node, Bin):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Call):
        return f"{node.fn}({to_source(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# Evaluation


def eval_jet2(expr: Expression, point) -> Jet2:
    """Evaluate ``expr`` at ``point`` with exact gradient and Hessian.

    ``point`` is indexed positionally against ``expr.variables``.  Domain
    violations (log/sqrt of a non-positive value, division by zero,
    non-integer power of a non-positive base) raise :class:`DomainError`
    naming the offending subexpression.
    """
    x = np.asarray(point, dtype=float)
    if x.shape != (len(expr.variables),):
        raise ValueError(
            f"point has shape {x.shape}, expected ({len(expr.variables)},) for variables {expr.variables}"
        )
    return _eval(expr.root, x, len(expr.variables), expr.source)


def _fragment(source: str, node: Node) -> str:
    lo, hi = node.span
    text = source[lo:hi]
    return text if text else to_source(node)


def _eval(node: Node, x: np.ndarray, n: int, source: str) -> Jet2:
    if isinstance(node, Const):
        return Jet2.constant(node.value, n)
    if isinstance(node, Var):
        return Jet2.variable(x[node.index], node.index, n)
    if isinstance(node, Neg):
        return -_eval(node.child, x, n, source)
    if isinstance(node, Call):
        arg = _eval(node.arg, x, n, source)
        if node.fn in _POSITIVE_DOMAIN and arg.value <= 0.0:
            raise DomainError(
                f"{node.fn} of non-positive value {arg.value!r}",
                _fragment(source, node),
                node.span[0],
            )
        return arg.chain(*_FUNCTIONS[node.fn](arg.value))
    if isinstance(node, Bin):
        left = _eval(node.left, x, n, source)
        if node.op == "^":
            return _power(left, node, x, n, source)
        right = _eval(node.right, x, n, source)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            if right.value == 0.0:
                raise DomainError("division by zero", _fragment(source, node), node.span[0])
            return left / right
    raise TypeError(f"not an expression node: {node!r}")


def _power(base: Jet2, node: Bin, x: np.ndarray, n: int, source: str) -> Jet2:
    expo = _eval(node.right, x, n, source)
    constant_exponent = not (np.any(expo.gradient) or np.any(expo.hessian))
    if constant_exponent and float(expo.value).is_integer():
        k = int(expo.value)
        v = base.value
        if k == 0:
            return Jet2.constant(1.0, n)
        if v == 0.0 and k < 0:
            raise DomainError("zero base with negative exponent", _fragment(source, node), node.span[0])
        f = v**k
        f1 = k * v ** (k - 1)
        f2 = k * (k - 1) * v ** (k - 2) if k * (k - 1) != 0 else 0.0
        return base.chain(f, f1, f2)
    if base.value <= 0.0:
        raise DomainError(
            "power with non-integer exponent requires positive base",
            _fragment(source, node),
            node.span[0],
        )
    # u^s = exp(s*log(u)) for u > 0
    log_base = base.chain(*_FUNCTIONS["log"](base.value))
    product = expo * log_base
    return product.chain(*_FUNCTIONS["exp"](product.value))
