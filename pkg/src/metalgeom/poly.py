"""Sparse multivariate polynomials used to assemble fixture fields.

Fixture fields are built here and only converted to expression trees at the
end, which keeps the stored expressions short and canonical.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Tuple

import numpy as np

from .fields import ONE, ZERO, Expr, Var, add, const, mul, power

Monomial = Tuple[int, ...]


class Poly:
    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Dict[Monomial, object] = None):
        self.n = n
        self.terms = {m: c for m, c in (terms or {}).items() if c != 0}

    @classmethod
    def const(cls, n: int, c) -> "Poly":
        return cls(n, {(0,) * n: c})

    @classmethod
    def var(cls, n: int, k: int) -> "Poly":
        """``x_k`` with 1-based ``k``."""
        exp = [0] * n
        exp[k - 1] = 1
        return cls(n, {tuple(exp): Fraction(1)})

    def _lift(self, other) -> "Poly":
        return other if isinstance(other, Poly) else Poly.const(self.n, other)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.n, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        out: Dict[Monomial, object] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(self.n, out)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return Poly(self.n, {m: v / c for m, v in self.terms.items()})

    def __eq__(self, other):
        other = self._lift(other)
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def diff(self, k: int) -> "Poly":
        out = {}
        for m, c in self.terms.items():
            e = m[k - 1]
            if e:
                mm = list(m)
                mm[k - 1] -= 1
                out[tuple(mm)] = c * e
        return Poly(self.n, out)

    def to_expr(self) -> Expr:
        acc = ZERO
        for m in sorted(self.terms, reverse=True):
            mono = ONE
            for k, e in enumerate(m, start=1):
                if e:
                    mono = mul(mono, power(Var(k), e))
            acc = add(acc, mul(const(self.terms[m]), mono))
        return acc


def poly_array(data, n: int) -> np.ndarray:
    arr = np.asarray(data, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = v if isinstance(v, Poly) else Poly.const(n, v)
    return out


def to_expr_array(P: np.ndarray) -> np.ndarray:
    out = np.empty(P.shape, dtype=object)
    for idx, v in np.ndenumerate(P):
        out[idx] = v.to_expr()
    return out


def pdiff(P: np.ndarray, k: int) -> np.ndarray:
    out = np.empty(P.shape, dtype=object)
    for idx, v in np.ndenumerate(P):
        out[idx] = v.diff(k)
    return out


def unitriangular_inverse(A: np.ndarray) -> np.ndarray:
    """Inverse of a lower or upper unitriangular polynomial matrix."""
    n = A.shape[0]
    nv = A[0, 0].n
    lower = all(A[i, j].is_zero() for i in range(n) for j in range(i + 1, n))
    M = A if lower else A.T
    # forward substitution for M X = I with unit diagonal
    X = poly_array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], nv)
    for i in range(n):
        for j in range(n):
            acc = Poly.const(nv, Fraction(int(i == j)))
            for k in range(i):
                acc = acc - M[i, k] * X[k, j]
            X[i, j] = acc
    return X if lower else X.T
