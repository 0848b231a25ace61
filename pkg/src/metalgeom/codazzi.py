"""Residual functionals for Codazzi couplings, total symmetry and cyclic sums.

A residual tensor vanishes exactly when the corresponding condition holds at
the point. Tensors follow the index conventions of :mod:`metalgeom.kernel`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fields import Jet1
from .kernel import covderiv_endo, tachibana_metric
from .numeric import Scalar, TolerancePolicy, backend_of, input_scale, residual_magnitude


class SlotAsymmetry(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CouplingResidual:
    kind: str  # EndoCodazzi | MetricCodazzi | TotalSymmetry | QuasiMetallic | CyclicCovJ
    tensor: np.ndarray

    @property
    def magnitude(self) -> Scalar:
        return residual_magnitude(self.tensor)


def codazzi_residual_endo(conn: np.ndarray, J: Jet1) -> np.ndarray:
    """``(nabla_X J)Y - (nabla_Y J)X`` on the frame, stored at ``[k, i, j]``."""
    nJ = covderiv_endo(conn, J)
    return nJ - nJ.transpose(0, 2, 1)


def codazzi_residual_metric(C: np.ndarray, tol: Optional[TolerancePolicy] = None) -> np.ndarray:
    """``C(i, j; k) - C(k, j; i)`` for a (0,3) tensor symmetric in its first two slots."""
    asym = C - C.transpose(1, 0, 2)
    if tol is None:
        tol = TolerancePolicy.exact() if backend_of(C).exact else TolerancePolicy.relative()
    if not tol.accepts(residual_magnitude(asym), input_scale(C)):
        raise SlotAsymmetry("tensor is not symmetric in its first two slots")
    return C - C.transpose(2, 1, 0)


def total_symmetry_residual(T: np.ndarray) -> np.ndarray:
    """Stack of the two generating transposition residuals; zero iff ``T`` is
    invariant under all six slot permutations."""
    return np.stack([T - T.transpose(1, 0, 2), T - T.transpose(2, 1, 0)])


def cyclic_sum(T: np.ndarray) -> np.ndarray:
    """``T(X,Y,Z) + T(Y,Z,X) + T(Z,X,Y)``."""
    return T + T.transpose(1, 2, 0) + T.transpose(2, 0, 1)


def quasi_metallic_residual(J: Jet1, g: Jet1, require_purity: bool = True) -> np.ndarray:
    return cyclic_sum(tachibana_metric(J, g, require_purity=require_purity))


def cyclic_covJ_sum(conn: np.ndarray, J: Jet1, g: Jet1) -> np.ndarray:
    """``g((nabla_X J)Y, Z) + g((nabla_Y J)Z, X) + g((nabla_Z J)X, Y)``."""
    lowered = np.einsum("mij,mk->ijk", covderiv_endo(conn, J), g.value)
    return cyclic_sum(lowered)
