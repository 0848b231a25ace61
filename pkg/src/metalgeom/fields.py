"""Chart-global fields as rational-function expressions, and first-order jets.

Grammar accepted by :func:`parse_expression` (whitespace ignored)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := base ('^' integer)?
    base   := rational | 'x' integer | '(' expr ')'

``rational`` is ``integer ('/' positive-integer)?``; a leading ``-`` is
accepted on literals (``-1/2``) and, as ``0 - base``, on any other base.  Decimal literals such as
``1.618033988749895`` are also accepted so that float-backend scenes can carry
irrational constants; they never appear in rational-backend scenes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence, Union

import numpy as np

from .numeric import RATIONAL, Backend

Number = Union[int, Fraction, float]


class ExpressionSyntaxError(ValueError):
    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position} in {text!r}")
        self.text = text
        self.position = position


class UnknownVariable(ValueError):
    pass


class PoleAtPoint(ZeroDivisionError):
    def __init__(self, component, point):
        super().__init__(f"pole in component {tuple(i + 1 for i in component)} (1-based) at point ({', '.join(str(c) for c in point)})")
        self.component = component
        self.point = tuple(point)


# ---------------------------------------------------------------------------
# expression tree


class Expr:
    """Immutable expression node.  Arithmetic operators build folded trees."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, const(other))

    def __radd__(self, other):
        return add(const(other), self)

    def __sub__(self, other):
        return sub(self, const(other))

    def __rsub__(self, other):
        return sub(const(other), self)

    def __mul__(self, other):
        return mul(self, const(other))

    def __rmul__(self, other):
        return mul(const(other), self)

    def __truediv__(self, other):
        return div(self, const(other))

    def __rtruediv__(self, other):
        return div(const(other), self)

    def __neg__(self):
        return sub(Const(Fraction(0)), self)

    def __pow__(self, e: int):
        return power(self, e)

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True, eq=False)
class Const(Expr):
    value: Union[Fraction, float]

    def __eq__(self, other):
        return isinstance(other, Const) and self.value == other.value and \
            type(self.value) is type(other.value)

    def __hash__(self):
        return hash(("c", self.value))


@dataclass(frozen=True, eq=False)
class Var(Expr):
    index: int  # 1-based coordinate number

    def __eq__(self, other):
        return isinstance(other, Var) and self.index == other.index

    def __hash__(self):
        return hash(("v", self.index))


@dataclass(frozen=True, eq=False)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    @cached_property
    def _hash(self):
        return hash((self.op, self.left, self.right))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        return (isinstance(other, BinOp) and self._hash == other._hash and self.op == other.op
                and self.left == other.left and self.right == other.right)


@dataclass(frozen=True, eq=False)
class Pow(Expr):
    base: Expr
    exponent: int

    @cached_property
    def _hash(self):
        return hash(("^", self.base, self.exponent))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return (isinstance(other, Pow) and self.exponent == other.exponent
                and self.base == other.base)


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


def const(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (float, np.floating)):
        return Const(float(x))
    return Const(Fraction(x))


def var(k: int) -> Var:
    return Var(k)


def _is(e: Expr, v) -> bool:
    return isinstance(e, Const) and e.value == v


def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    return BinOp("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if _is(b, 0):
        return a
    return BinOp("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if _is(a, 0) or _is(b, 0):
        return ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    return BinOp("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is(b, 0):
        raise ZeroDivisionError("division by the constant 0")
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value / b.value)
    if _is(b, 1):
        return a
    return BinOp("/", a, b)


def power(b: Expr, e: int) -> Expr:
    e = int(e)
    if e == 0:
        return ONE
    if e == 1:
        return b
    if isinstance(b, Const):
        if b.value == 0 and e < 0:
            raise ZeroDivisionError("0 to a negative power")
        return Const(b.value ** e)
    return Pow(b, e)


# ---------------------------------------------------------------------------
# printing / parsing


def _const_text(v) -> str:
    if isinstance(v, float):
        s = repr(v)
        return f"({s})" if s.startswith("-") else s
    if v.denominator == 1:
        s = str(v.numerator)
    else:
        s = f"{v.numerator}/{v.denominator}"
    return f"({s})" if v < 0 else s


def to_text(e: Expr) -> str:
    """Print ``e`` so that :func:`parse_expression` rebuilds the same tree."""
    if isinstance(e, Const):
        return _const_text(e.value)
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, BinOp):
        return f"({to_text(e.left)} {e.op} {to_text(e.right)})"
    if isinstance(e, Pow):
        base = to_text(e.base)
        if isinstance(e.base, Const) and "/" in base and not base.startswith("("):
            base = f"({base})"
        return f"{base}^{e.exponent}"
    raise TypeError(f"not an expression: {e!r}")


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+|\d+)"
                    r"|(?P<var>x\d+)|(?P<op>[-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    out = []
    while True:
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip():
                raise ExpressionSyntaxError("unexpected character", text, pos)
            break
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, dim: int):
        self.text = text
        self.dim = dim
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg):
        raise ExpressionSyntaxError(msg, self.text, self.peek()[2])

    def expect(self, value):
        tok = self.peek()
        if tok[0] != "op" or tok[1] != value:
            self.error(f"expected {value!r}")
        self.take()

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek()[0] != "end":
            self.error("trailing input")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.term()
            e = BinOp(op, e, rhs)
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            rhs = self.factor()
            e = BinOp(op, e, rhs)
        return e

    def factor(self) -> Expr:
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            # unary minus binds looser than '^': -x1^2 is -(x1^2)
            self.take()
            inner = self.factor()
            if isinstance(inner, Const):
                return Const(-inner.value)
            return BinOp("-", ZERO, inner)
        b = self.base()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            e = self.signed_int()
            if e == 0 or e == 1:
                return power(b, e)
            if isinstance(b, Const):
                return power(b, e)
            return Pow(b, e)
        return b

    def signed_int(self) -> int:
        sign = 1
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            sign = -1
        kind, val, _ = self.peek()
        if kind != "num" or not val.isdigit():
            self.error("expected integer")
        self.take()
        return sign * int(val)

    def base(self) -> Expr:
        kind, val, pos = self.peek()
        if kind == "op" and val == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        if kind == "num":
            return self.literal()
        if kind == "var":
            self.take()
            k = int(val[1:])
            if k < 1 or k > self.dim:
                raise UnknownVariable(f"variable {val} outside dimension {self.dim} (position {pos})")
            return Var(k)
        self.error("expected number, variable or '('")

    def literal(self) -> Const:
        kind, val, _ = self.take()
        if not val.isdigit():
            return Const(float(val))
        num = int(val)
        nxt = self.toks[self.i]
        after = self.toks[self.i + 1] if self.i + 1 < len(self.toks) else ("end", "", 0)
        if nxt[0] == "op" and nxt[1] == "/" and after[0] == "num" and after[1].isdigit() and int(after[1]) > 0:
            self.i += 2
            return Const(Fraction(num, int(after[1])))
        return Const(Fraction(num))


def parse_expression(text: str, dim: int) -> Expr:
    return _Parser(text, dim).parse()


# ---------------------------------------------------------------------------
# differentiation and evaluation


@lru_cache(maxsize=None)
def diff_expression(f: Expr, k: int) -> Expr:
    """Exact partial derivative of ``f`` with respect to ``x_k`` (1-based)."""
    if isinstance(f, Const):
        return ZERO
    if isinstance(f, Var):
        return ONE if f.index == k else ZERO
    if isinstance(f, Pow):
        db = diff_expression(f.base, k)
        return mul(mul(Const(Fraction(f.exponent)), power(f.base, f.exponent - 1)), db)
    a, b = f.left, f.right
    da, db = diff_expression(a, k), diff_expression(b, k)
    if f.op == "+":
        return add(da, db)
    if f.op == "-":
        return sub(da, db)
    if f.op == "*":
        return add(mul(da, b), mul(a, db))
    # quotient rule
    return div(sub(mul(da, b), mul(a, db)), power(b, 2))


def evaluate(f: Expr, point: Sequence, backend: Backend = RATIONAL, _memo=None):
    """Evaluate ``f`` at ``point``; raises ZeroDivisionError at a pole."""
    memo = {} if _memo is None else _memo
    return _eval(f, tuple(backend.scalar(c) for c in point), backend, memo)


def _eval(f, pt, backend, memo):
    key = id(f)
    hit = memo.get(key)
    if hit is not None and hit[0] is f:
        return hit[1]
    if isinstance(f, Const):
        val = backend.scalar(f.value)
    elif isinstance(f, Var):
        if f.index > len(pt):
            raise UnknownVariable(f"x{f.index} at a {len(pt)}-dimensional point")
        val = pt[f.index - 1]
    elif isinstance(f, Pow):
        b = _eval(f.base, pt, backend, memo)
        if b == 0 and f.exponent < 0:
            raise ZeroDivisionError("negative power of zero")
        val = b ** f.exponent
    else:
        a = _eval(f.left, pt, backend, memo)
        b = _eval(f.right, pt, backend, memo)
        if f.op == "+":
            val = a + b
        elif f.op == "-":
            val = a - b
        elif f.op == "*":
            val = a * b
        else:
            if b == 0:
                raise ZeroDivisionError("division by zero")
            val = a / b
    memo[key] = (f, val)
    return val


def free_vars(f: Expr) -> set:
    if isinstance(f, Var):
        return {f.index}
    if isinstance(f, Const):
        return set()
    if isinstance(f, Pow):
        return free_vars(f.base)
    return free_vars(f.left) | free_vars(f.right)


def contains_float(f: Expr) -> bool:
    if isinstance(f, Const):
        return isinstance(f.value, float)
    if isinstance(f, Var):
        return False
    if isinstance(f, Pow):
        return contains_float(f.base)
    return contains_float(f.left) or contains_float(f.right)


# ---------------------------------------------------------------------------
# expression arrays and jets


def expr_array(data) -> np.ndarray:
    """Object array of expressions from nested lists of Expr / numbers."""
    arr = np.asarray(data, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = const(v)
    return out


def parse_array(data, dim: int) -> np.ndarray:
    arr = np.asarray(data, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = parse_expression(str(v), dim)
    return out


def text_array(field: np.ndarray) -> list:
    return np.vectorize(to_text, otypes=[object])(field).tolist() if field.size else field.tolist()


def expr_matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    n, m = A.shape
    m2, r = B.shape
    assert m == m2
    out = np.empty((n, r), dtype=object)
    for i in range(n):
        for j in range(r):
            acc = ZERO
            for k in range(m):
                acc = add(acc, mul(A[i, k], B[k, j]))
            out[i, j] = acc
    return out


@dataclass(frozen=True, eq=False)
class Jet1:
    """Value of a field at a point plus its first partials.

    ``grad[..., i]`` is the partial derivative along coordinate ``i`` (0-based).
    """

    value: np.ndarray
    grad: np.ndarray

    def __post_init__(self):
        if self.grad.shape[:-1] != self.value.shape:
            raise ValueError(f"gradient shape {self.grad.shape} does not extend value shape {self.value.shape}")

    @property
    def dim(self) -> int:
        return self.grad.shape[-1]

    @classmethod
    def constant(cls, value: np.ndarray, dim: int) -> "Jet1":
        value = np.asarray(value)
        if value.dtype == object:
            grad = np.empty(value.shape + (dim,), dtype=object)
            grad.fill(Fraction(0))
        else:
            grad = np.zeros(value.shape + (dim,))
        return cls(value, grad)


def jet_at(field: np.ndarray, point: Sequence, backend: Backend = RATIONAL) -> Jet1:
    """Evaluate an expression array and all its first partials at ``point``."""
    field = np.asarray(field, dtype=object)
    n = len(point)
    value = np.empty(field.shape, dtype=object)
    grad = np.empty(field.shape + (n,), dtype=object)
    memo: dict = {}
    for idx, f in np.ndenumerate(field):
        try:
            value[idx] = evaluate(f, point, backend, memo)
            for k in range(n):
                grad[idx + (k,)] = evaluate(diff_expression(f, k + 1), point, backend, memo)
        except ZeroDivisionError:
            raise PoleAtPoint(idx, point) from None
    if not backend.exact:
        value = value.astype(np.float64)
        grad = grad.astype(np.float64)
    return Jet1(value, grad)


def value_at(field: np.ndarray, point: Sequence, backend: Backend = RATIONAL) -> np.ndarray:
    field = np.asarray(field, dtype=object)
    out = np.empty(field.shape, dtype=object)
    memo: dict = {}
    for idx, f in np.ndenumerate(field):
        try:
            out[idx] = evaluate(f, point, backend, memo)
        except ZeroDivisionError:
            raise PoleAtPoint(idx, point) from None
    return out if backend.exact else out.astype(np.float64)
