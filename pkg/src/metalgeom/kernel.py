"""Pointwise operators on jets: metallic algebra, twin metric, adjoint,
Lie brackets, Nijenhuis tensor, torsion, covariant derivatives and the
Tachibana operator.

Index conventions
-----------------
* matrix jets: ``value[a, b]``, ``grad[a, b, i] = d_i value[a, b]``
* connection coefficients: ``conn[k, i, j]`` with ``nabla_{d_i} d_j = conn[k, i, j] d_k``
* ``(nabla J)[k, i, j]`` is the ``k``-component of ``(nabla_{d_i} J) d_j``
* ``C[x, y, z] = (nabla_{d_z} h)(d_x, d_y)``: the differentiating slot is last
* ``N[k, i, j]`` and ``T[k, i, j]`` are ``k``-components of ``N(d_i, d_j)`` and ``T(d_i, d_j)``

Every returned tensor lives on the coordinate frame of the chart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from .fields import Jet1
from .numeric import (RATIONAL, Scalar, TolerancePolicy, backend_of, exact_sqrt,
                      input_scale, is_perfect_square, mat_inverse, residual_magnitude)


class ZeroQ(ValueError):
    """The metallic parameter q vanishes, so J has no closed-form inverse."""


class TwinNotSymmetric(ValueError):
    pass


class PurityViolation(ValueError):
    pass


@dataclass(frozen=True)
class MetallicParams:
    p: Scalar
    q: Scalar

    @property
    def discriminant(self) -> Scalar:
        return self.p * self.p + 4 * self.q

    @property
    def rational_roots(self) -> bool:
        if isinstance(self.p, float) or isinstance(self.q, float):
            return False
        return is_perfect_square(self.discriminant)

    def roots(self, exact: bool = True) -> Tuple[Scalar, Scalar]:
        """``(sigma, sigma_bar)``; sigma is the metallic mean ``(p + sqrt(p^2+4q))/2``."""
        if exact:
            r = exact_sqrt(self.discriminant)
            return (Fraction(self.p) + r) / 2, (Fraction(self.p) - r) / 2
        d = float(self.discriminant)
        if d < 0:
            raise ValueError("complex metallic roots")
        r = math.sqrt(d)
        return (float(self.p) + r) / 2, (float(self.p) - r) / 2

    @property
    def sigma(self) -> float:
        return self.roots(exact=False)[0]


def _default_tol(arr: np.ndarray) -> TolerancePolicy:
    return TolerancePolicy.exact() if backend_of(arr).exact else TolerancePolicy.relative()


def _vanishes(residual: np.ndarray, *inputs: np.ndarray, tol: Optional[TolerancePolicy] = None) -> bool:
    tol = tol or _default_tol(residual)
    return tol.accepts(residual_magnitude(residual), input_scale(*inputs))


def _eye_like(M: np.ndarray) -> np.ndarray:
    return backend_of(M).identity(M.shape[0])


# ---------------------------------------------------------------------------
# algebraic operators


def metallic_residual(J: np.ndarray, params: MetallicParams) -> np.ndarray:
    """``J^2 - pJ - qI``."""
    return J @ J - params.p * J - params.q * _eye_like(J)


def purity_residual(g: np.ndarray, J: np.ndarray) -> np.ndarray:
    """``J^T g - g J``: the matrix of ``g(JX, Y) - g(X, JY)``."""
    return J.T @ g - g @ J


def metallic_inverse(J: np.ndarray, params: MetallicParams) -> np.ndarray:
    if params.q == 0:
        raise ZeroQ("J^{-1} = (J - pI)/q needs q != 0")
    return (J - params.p * _eye_like(J)) / params.q


def twin_metric(g: Jet1, J: Jet1, tol: Optional[TolerancePolicy] = None) -> Jet1:
    """``G(X, Y) = g(JX, Y)``, i.e. ``G = g J`` with product-rule gradient."""
    if not _vanishes(purity_residual(g.value, J.value), g.value, J.value, tol=tol):
        raise TwinNotSymmetric("g(JX, Y) != g(X, JY) at this point")
    return mat_mul_jet(g, J)


def mat_mul_jet(A: Jet1, B: Jet1) -> Jet1:
    value = A.value @ B.value
    grad = np.einsum("ami,mb->abi", A.grad, B.value) + np.einsum("am,mbi->abi", A.value, B.grad)
    return Jet1(value, grad)


def inverse_jet(A: Jet1) -> Jet1:
    inv = mat_inverse(A.value)
    grad = -np.einsum("am,mni,nb->abi", inv, A.grad, inv)
    return Jet1(inv, grad)


def transpose_jet(A: Jet1) -> Jet1:
    return Jet1(A.value.T, A.grad.transpose(1, 0, 2))


def g_adjoint(g: Jet1, J: Jet1) -> Jet1:
    """The endomorphism ``J*`` with ``g(JX, Y) = g(X, J*Y)``: ``J* = g^{-1} J^T g``."""
    return mat_mul_jet(inverse_jet(g), mat_mul_jet(transpose_jet(J), g))


def metallic_inverse_jet(J: Jet1, params: MetallicParams) -> Jet1:
    return Jet1(metallic_inverse(J.value, params), J.grad / params.q)


# ---------------------------------------------------------------------------
# vector fields


def frame_jet(i: int, dim: int, backend=RATIONAL) -> Jet1:
    """Constant coordinate field ``d_i`` (0-based)."""
    v = backend.zeros(dim)
    v[i] = backend.scalar(1)
    return Jet1.constant(v, dim)


def apply_jet(A: Jet1, X: Jet1) -> Jet1:
    """The vector field ``A X`` (``A`` a (1,1) jet)."""
    value = A.value @ X.value
    grad = np.einsum("kmi,m->ki", A.grad, X.value) + np.einsum("km,mi->ki", A.value, X.grad)
    return Jet1(value, grad)


def scale_jet(f: Jet1, X: Jet1) -> Jet1:
    """``f X`` for a scalar jet ``f`` (value shape ``()``)."""
    return Jet1(f.value * X.value, f.value * X.grad + np.multiply.outer(X.value, f.grad))


def lie_bracket(X: Jet1, Y: Jet1) -> np.ndarray:
    """``[X, Y]^k = X^i d_i Y^k - Y^i d_i X^k`` at the point."""
    return np.einsum("i,ki->k", X.value, Y.grad) - np.einsum("i,ki->k", Y.value, X.grad)


def lie_derivative_endo(X: Jet1, J: Jet1, Y: Jet1) -> np.ndarray:
    """``(L_X J) Y = [X, JY] - J [X, Y]``."""
    return lie_bracket(X, apply_jet(J, Y)) - J.value @ lie_bracket(X, Y)


def nijenhuis(J: Jet1) -> np.ndarray:
    """``N[k, i, j]``, built from brackets of the frame fields."""
    n = J.dim
    backend = backend_of(J.value)
    out = backend.zeros((n, n, n))
    frames = [frame_jet(i, n, backend) for i in range(n)]
    J2 = J.value @ J.value
    for i in range(n):
        X = frames[i]
        JX = apply_jet(J, X)
        for j in range(n):
            Y = frames[j]
            JY = apply_jet(J, Y)
            out[:, i, j] = (lie_bracket(JX, JY) - J.value @ lie_bracket(JX, Y)
                            - J.value @ lie_bracket(X, JY) + J2 @ lie_bracket(X, Y))
    return out


# ---------------------------------------------------------------------------
# connections


def torsion(conn: np.ndarray) -> np.ndarray:
    return conn - conn.transpose(0, 2, 1)


def covderiv_endo(conn: np.ndarray, J: Jet1) -> np.ndarray:
    """``(nabla J)[k, i, j] = d_i J^k_j + conn^k_{im} J^m_j - conn^m_{ij} J^k_m``."""
    return (J.grad.transpose(0, 2, 1)
            + np.einsum("kim,mj->kij", conn, J.value)
            - np.einsum("mij,km->kij", conn, J.value))


def covderiv_metric(conn: np.ndarray, h: Jet1) -> np.ndarray:
    """``C[j, k, i] = (nabla_{d_i} h)(d_j, d_k)``."""
    return (h.grad
            - np.einsum("mij,mk->jki", conn, h.value)
            - np.einsum("mik,jm->jki", conn, h.value))


def apply_endo_tensor(A: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Compose a (1,1) value with the output slot of a (1,2) tensor."""
    return np.einsum("km,mij->kij", A, T)


def lower(g: np.ndarray, T: np.ndarray) -> np.ndarray:
    """``g(T(d_i, d_j), d_l)`` stored at ``[i, j, l]``."""
    return np.einsum("kij,kl->ijl", T, g)


# ---------------------------------------------------------------------------
# Tachibana operator


def tachibana_metric(J: Jet1, g: Jet1, require_purity: bool = True,
                     tol: Optional[TolerancePolicy] = None) -> np.ndarray:
    """``(Phi_J g)(d_i, d_j, d_k)`` stored at ``[i, j, k]``.

    ``Phi = J^m_i d_m g_jk - d_i(J^m_j g_mk) + (d_j J^m_i) g_mk + (d_k J^m_i) g_jm``.
    Set ``require_purity=False`` to evaluate the raw formula on non-pure metrics.
    """
    if require_purity and not _vanishes(purity_residual(g.value, J.value), g.value, J.value, tol=tol):
        raise PurityViolation("the Tachibana operator is applied to pure metrics only")
    Jv, dJ, gv, dg = J.value, J.grad, g.value, g.grad
    return (np.einsum("mi,jkm->ijk", Jv, dg)
            - np.einsum("mji,mk->ijk", dJ, gv)
            - np.einsum("mj,mki->ijk", Jv, dg)
            + np.einsum("mij,mk->ijk", dJ, gv)
            + np.einsum("mik,jm->ijk", dJ, gv))


def pairing_jet(g: Jet1, Y: Jet1, Z: Jet1) -> Jet1:
    """Scalar jet of ``g(Y, Z)``."""
    value = Y.value @ g.value @ Z.value
    grad = (np.einsum("abi,a,b->i", g.grad, Y.value, Z.value)
            + np.einsum("ab,ai,b->i", g.value, Y.grad, Z.value)
            + np.einsum("ab,a,bi->i", g.value, Y.value, Z.grad))
    return Jet1(np.asarray(value, dtype=g.value.dtype), grad)


def derive(X: Jet1, f: Jet1) -> Scalar:
    """Directional derivative ``X f`` at the point."""
    return X.value @ f.grad


def tachibana_on_vectors(J: Jet1, g: Jet1, X: Jet1, Y: Jet1, Z: Jet1) -> Scalar:
    """Defining formula of ``(Phi_J g)(X, Y, Z)`` for arbitrary vector jets."""
    JX = apply_jet(J, X)
    term1 = derive(JX, pairing_jet(g, Y, Z))
    term2 = derive(X, pairing_jet(g, apply_jet(J, Y), Z))
    term3 = lie_derivative_endo(Y, J, X) @ g.value @ Z.value
    term4 = Y.value @ g.value @ lie_derivative_endo(Z, J, X)
    return term1 - term2 + term3 + term4

