"""Everything derivable from a scene at one sample point, computed lazily.

A :class:`PointContext` holds the jets of ``g`` and ``J``, the values of the
given connection and 1-form, and caches the derived objects (twin metric,
conjugate connections, covariant derivatives, ...) that several checks share.
"""

from __future__ import annotations

from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from . import codazzi as cz
from . import connections as cn
from . import kernel as kr
from .fields import Jet1, jet_at, value_at
from .numeric import Backend, TolerancePolicy, input_scale, residual_magnitude


class PointContext:
    def __init__(self, *, dim: int, params: kr.MetallicParams, backend: Backend,
                 g: np.ndarray, J: np.ndarray, conn: Optional[np.ndarray],
                 tau: Optional[np.ndarray], point: Sequence):
        self.dim = dim
        self.params = params
        self.backend = backend
        self.point = tuple(backend.scalar(c) for c in point)
        self.g = jet_at(g, self.point, backend)
        self.J = jet_at(J, self.point, backend)
        self.conn = value_at(conn, self.point, backend) if conn is not None else backend.zeros((dim,) * 3)
        self.tau = value_at(tau, self.point, backend) if tau is not None else backend.zeros(dim)

    # -- tolerance -----------------------------------------------------------

    @cached_property
    def scale(self) -> float:
        return input_scale(self.g.value, self.g.grad, self.J.value, self.J.grad, self.conn, self.tau,
                           np.asarray([self.params.p, self.params.q], dtype=object))

    def vanishes(self, tensor, tol: Optional[TolerancePolicy] = None) -> bool:
        tol = tol or self.default_tol
        return tol.accepts(residual_magnitude(tensor), self.scale)

    @property
    def default_tol(self) -> TolerancePolicy:
        return TolerancePolicy.exact() if self.backend.exact else TolerancePolicy.relative()

    # -- algebraic objects -----------------------------------------------------

    @cached_property
    def G(self) -> Jet1:
        """Twin metric ``G(X, Y) = g(JX, Y)``; symmetric only when ``g`` is pure."""
        return kr.mat_mul_jet(kr.transpose_jet(self.J), self.g)

    @cached_property
    def Jinv(self) -> Jet1:
        return kr.metallic_inverse_jet(self.J, self.params)

    @cached_property
    def Jstar(self) -> Jet1:
        return kr.g_adjoint(self.g, self.J)

    # -- connections ---------------------------------------------------------

    @cached_property
    def lc(self) -> np.ndarray:
        return cn.levi_civita(self.g)

    @cached_property
    def star(self) -> np.ndarray:
        return cn.metric_conjugate(self.conn, self.g)

    @cached_property
    def dagger(self) -> np.ndarray:
        return cn.metric_conjugate(self.conn, self.G)

    @cached_property
    def jconj(self) -> np.ndarray:
        return cn.j_conjugate(self.conn, self.J, self.params)

    @cached_property
    def gen_star(self) -> np.ndarray:
        return cn.generalized_conjugate(self.conn, self.g, self.tau)

    @cached_property
    def gen_dagger(self) -> np.ndarray:
        return cn.generalized_conjugate(self.conn, self.G, self.tau)

    @cached_property
    def dual_proj(self) -> np.ndarray:
        return cn.dual_projective(self.conn, self.g.value, self.tau)

    # -- derived tensors -----------------------------------------------------

    def nabla(self, conn: np.ndarray, endo: Jet1) -> np.ndarray:
        return kr.covderiv_endo(conn, endo)

    @cached_property
    def nJ(self) -> np.ndarray:
        return kr.covderiv_endo(self.conn, self.J)

    @cached_property
    def C(self) -> np.ndarray:
        return kr.covderiv_metric(self.conn, self.g)

    @cached_property
    def Gam(self) -> np.ndarray:
        return kr.covderiv_metric(self.conn, self.G)

    @cached_property
    def torsion(self) -> np.ndarray:
        return kr.torsion(self.conn)

    @cached_property
    def nijenhuis(self) -> np.ndarray:
        return kr.nijenhuis(self.J)

    def tachibana(self, endo: Optional[Jet1] = None, require_purity: bool = False) -> np.ndarray:
        return kr.tachibana_metric(endo if endo is not None else self.J, self.g,
                                   require_purity=require_purity)

    @cached_property
    def phi(self) -> np.ndarray:
        return kr.tachibana_metric(self.J, self.g, require_purity=False)

    def codazzi_endo(self, conn: np.ndarray, endo: Optional[Jet1] = None) -> np.ndarray:
        return cz.codazzi_residual_endo(conn, endo if endo is not None else self.J)
