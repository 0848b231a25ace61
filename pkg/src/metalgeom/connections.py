"""Connections built from a metric, a metallic structure or a 1-form.

All constructions work on coefficient arrays ``conn[k, i, j]`` at a single
point. Metric conjugations solve ``h X = rhs`` directly instead of forming
``h^{-1}``, so the g-, G- and tau-twisted variants share one code path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fields import Jet1
from .kernel import MetallicParams, metallic_inverse
from .numeric import backend_of, solve_linear


@dataclass(frozen=True)
class ConnectionLabel:
    """Provenance of a connection, e.g. ``gen_conj[G,tau](j_conj(given))``."""

    kind: str
    of: Optional["ConnectionLabel"] = None
    metric: Optional[str] = None

    def __str__(self):
        if self.of is None:
            return self.kind
        tag = f"[{self.metric}]" if self.metric else ""
        return f"{self.kind}{tag}({self.of})"


GIVEN = ConnectionLabel("given")
LEVI_CIVITA = ConnectionLabel("levi_civita")


def _solve_frame(h: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    # rhs[j, i, l]; returns X[k, i, l] with h[j, k] X[k, i, l] = rhs[j, i, l]
    n = h.shape[0]
    X = solve_linear(h, rhs.reshape(n, n * n))
    return X.reshape(n, n, n)


def levi_civita(g: Jet1) -> np.ndarray:
    """Christoffel symbols ``1/2 g^{kl}(d_i g_jl + d_j g_il - d_l g_ij)``."""
    dg = g.grad
    lowered = (np.einsum("jli->lij", dg) + np.einsum("ilj->lij", dg) - np.einsum("ijl->lij", dg)) / 2
    return _solve_frame(g.value, lowered)


def metric_conjugate(conn: np.ndarray, h: Jet1) -> np.ndarray:
    """Dual connection: ``Z h(X, Y) = h(nabla_Z X, Y) + h(X, nabla*_Z Y)``."""
    rhs = h.grad.transpose(0, 2, 1) - np.einsum("mij,ml->jil", conn, h.value)
    return _solve_frame(h.value, rhs)


def generalized_conjugate(conn: np.ndarray, h: Jet1, tau: np.ndarray) -> np.ndarray:
    """Dual connection twisted by a 1-form:
    ``X h(Y, Z) = h(nabla_X Y, Z) + h(Y, nabla'_X Z) - tau(X) h(Y, Z)``."""
    rhs = (h.grad.transpose(0, 2, 1) - np.einsum("mij,ml->jil", conn, h.value)
           + np.einsum("i,jl->jil", tau, h.value))
    return _solve_frame(h.value, rhs)


def raise_index(g: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """``tau#`` with ``g(X, tau#) = tau(X)``."""
    return solve_linear(g, tau)


def dual_projective(conn: np.ndarray, g: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """``nabla'_X Y = nabla_X Y - g(X, Y) tau#``."""
    sharp = raise_index(g, tau)
    return conn - np.einsum("ij,k->kij", g, sharp)


def j_conjugate(conn: np.ndarray, J: Jet1, params: MetallicParams) -> np.ndarray:
    """``nabla^J_X Y = J^{-1} nabla_X (J Y)`` using ``J^{-1} = (J - pI)/q``."""
    Jinv = metallic_inverse(J.value, params)
    inner = J.grad.transpose(0, 2, 1) + np.einsum("mil,lj->mij", conn, J.value)
    return np.einsum("km,mij->kij", Jinv, inner)


def zero_connection(n: int, like: np.ndarray) -> np.ndarray:
    return backend_of(like).zeros((n, n, n))
