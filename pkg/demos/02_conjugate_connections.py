"""
Conjugate connections
=====================

Connections are coefficient arrays conn[k, i, j], the d_k component of
nabla_{d_i} d_j. Each conjugation is solved exactly from its defining
identity.
"""

from fractions import Fraction

import numpy as np

from metalgeom import connections as cn
from metalgeom import kernel as kr
from metalgeom.fields import jet_at, parse_array
from metalgeom.numeric import RATIONAL

point = (Fraction(1), Fraction(0))
g = jet_at(parse_array([["1 + x1^2", "0"], ["0", "1"]], 2), point)
flat = RATIONAL.zeros((2, 2, 2))

lc = cn.levi_civita(g)
print("Levi-Civita Gamma^1_11 =", lc[0, 0, 0])
star = cn.metric_conjugate(flat, g)
print("conjugate of the flat connection: Gamma*^1_11 =", star[0, 0, 0])
print("conjugating twice returns the flat connection:", not any(cn.metric_conjugate(star, g).flat))

# J-conjugation is not an involution once p != 0
params = kr.MetallicParams(Fraction(1), Fraction(6))
J = jet_at(parse_array([["3", "0"], ["x1", "-2"]], 2), (Fraction(0), Fraction(0)))
once = cn.j_conjugate(flat, J, params)
twice = cn.j_conjugate(once, J, params)
print("nabla^J_{d1} d1 =", list(once[:, 0, 0]))
print("((nabla^J)^J - nabla)_{d1} d1 =", list(twice[:, 0, 0]))

# a 1-form twists the conjugation; dual-projective change keeps torsion
tau = RATIONAL.array([1, 0])
gen = cn.generalized_conjugate(lc, g, tau)
print("generalized conjugate of Levi-Civita minus Levi-Civita, [k, 1, l]:\n", (gen - lc)[:, 0, :])
dp = cn.dual_projective(flat, RATIONAL.identity(2), tau)
print("dual-projective shift of the flat connection, nonzero entries:",
      {tuple(int(i) + 1 for i in idx): v for idx, v in np.ndenumerate(dp) if v})
print("torsion preserved:", np.array_equal(kr.torsion(dp), kr.torsion(flat)))
