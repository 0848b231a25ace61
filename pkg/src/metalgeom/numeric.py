"""Scalar backends, small dense linear algebra and residual tolerances.

Two backends are supported. ``RATIONAL`` stores every component as a
:class:`fractions.Fraction` inside a numpy ``object`` array, so sums and
products are exact and residuals are literal zeros. ``FLOAT`` stores
``float64`` arrays and compares residuals against a relative tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

import numpy as np

Scalar = Union[Fraction, float]


class SingularMatrix(ArithmeticError):
    """Raised when a matrix has no inverse on the active backend."""


@dataclass(frozen=True)
class Backend:
    name: str

    @property
    def exact(self) -> bool:
        return self.name == "rational"

    @property
    def dtype(self):
        return object if self.exact else np.float64

    def scalar(self, x) -> Scalar:
        if self.exact:
            if isinstance(x, float):
                raise TypeError(f"float {x!r} cannot enter the rational backend")
            return Fraction(x)
        return float(x)

    def array(self, data) -> np.ndarray:
        arr = np.asarray(data, dtype=object)
        out = np.empty(arr.shape, dtype=object)
        for idx, v in np.ndenumerate(arr):
            out[idx] = self.scalar(v)
        return out if self.exact else out.astype(np.float64)

    def zeros(self, shape) -> np.ndarray:
        if self.exact:
            out = np.empty(shape, dtype=object)
            out.fill(Fraction(0))
            return out
        return np.zeros(shape)

    def identity(self, n: int) -> np.ndarray:
        out = self.zeros((n, n))
        for i in range(n):
            out[i, i] = self.scalar(1)
        return out


RATIONAL = Backend("rational")
FLOAT = Backend("float")


def get_backend(name: str) -> Backend:
    if name == "rational":
        return RATIONAL
    if name == "float":
        return FLOAT
    raise ValueError(f"unknown backend {name!r}")


def backend_of(arr: np.ndarray) -> Backend:
    return RATIONAL if arr.dtype == object else FLOAT


def _solve_in_place(A: np.ndarray, B: np.ndarray, tol: float) -> np.ndarray:
    n = A.shape[0]
    A = A.copy()
    B = B.copy()
    for col in range(n):
        # partial pivoting; strict '>' keeps the lowest row index on ties
        piv = col
        best = abs(A[col, col])
        for r in range(col + 1, n):
            if abs(A[r, col]) > best:
                piv, best = r, abs(A[r, col])
        if best == 0 or best <= tol:
            raise SingularMatrix(f"no usable pivot in column {col}")
        if piv != col:
            A[[col, piv]] = A[[piv, col]]
            B[[col, piv]] = B[[piv, col]]
        pivot = A[col, col]
        A[col] = A[col] / pivot
        B[col] = B[col] / pivot
        for r in range(n):
            if r != col and A[r, col] != 0:
                f = A[r, col]
                A[r] = A[r] - f * A[col]
                B[r] = B[r] - f * B[col]
    return B


def _pivot_tol(M: np.ndarray) -> float:
    if M.dtype == object:
        return 0.0
    scale = float(np.max(np.abs(M))) if M.size else 0.0
    return 1e-12 * max(scale, 1.0)


def solve_linear(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Return X with ``A @ X == B`` (Gauss-Jordan with partial pivoting)."""
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    vec = B.ndim == 1
    Bm = B.reshape(-1, 1) if vec else B
    if backend_of(A).exact:
        Bm = RATIONAL.array(Bm)
    else:
        Bm = np.asarray(Bm, dtype=np.float64)
    X = _solve_in_place(A, Bm, _pivot_tol(A))
    return X.reshape(-1) if vec else X


def mat_inverse(M: np.ndarray) -> np.ndarray:
    return solve_linear(M, backend_of(M).identity(M.shape[0]))


def residual_magnitude(T) -> Scalar:
    """Largest absolute entry of ``T`` (0 for an empty tensor)."""
    arr = np.asarray(T, dtype=object if _is_exact(T) else np.float64)
    if arr.size == 0:
        return Fraction(0) if arr.dtype == object else 0.0
    return max(abs(v) for v in arr.flat)


def _is_exact(T) -> bool:
    if isinstance(T, np.ndarray):
        return T.dtype == object
    return all(isinstance(v, (int, Fraction)) for v in np.asarray(T, dtype=object).flat)


def input_scale(*tensors: np.ndarray) -> float:
    scale = 0.0
    for t in tensors:
        if t is not None and np.size(t):
            scale = max(scale, float(residual_magnitude(t)))
    return scale


@dataclass(frozen=True)
class TolerancePolicy:
    """``Exact`` accepts only literal zero; ``Relative`` accepts
    ``|r| <= epsilon * (1 + scale)``."""

    mode: str = "Exact"
    epsilon: float = 0.0

    def __post_init__(self):
        if self.mode not in ("Exact", "Relative"):
            raise ValueError(f"unknown tolerance mode {self.mode!r}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")

    @classmethod
    def exact(cls) -> "TolerancePolicy":
        return cls("Exact", 0.0)

    @classmethod
    def relative(cls, epsilon: float = 1e-9) -> "TolerancePolicy":
        return cls("Relative", epsilon)

    def accepts(self, residual: Scalar, scale: float = 0.0) -> bool:
        if self.mode == "Exact":
            return residual == 0
        return abs(float(residual)) <= self.epsilon * (1.0 + scale)

    def describe(self) -> str:
        return "exact" if self.mode == "Exact" else f"relative:{self.epsilon!r}"


def format_scalar(x: Scalar) -> str:
    """``num/den`` for rationals (``den`` dropped when 1), 17 significant
    digits in scientific notation for floats."""
    if isinstance(x, (Fraction, int)):
        x = Fraction(x)
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.16e}"
    raise TypeError(f"not a scalar: {x!r}")


def parse_scalar(text: str) -> Scalar:
    text = text.strip()
    if any(c in text for c in ".eE") and "/" not in text:
        return float(text)
    return Fraction(text)


def is_perfect_square(n: Fraction) -> bool:
    n = Fraction(n)
    if n < 0:
        return False
    return all(math.isqrt(v) ** 2 == v for v in (n.numerator, n.denominator))


def exact_sqrt(n: Fraction) -> Fraction:
    n = Fraction(n)
    if not is_perfect_square(n):
        raise ValueError(f"{n} is not a rational square")
    return Fraction(math.isqrt(n.numerator), math.isqrt(n.denominator))


def flat(values: Iterable) -> list:
    return list(np.asarray(values, dtype=object).flat)
