"""
Metallic structures on a chart
==============================

A metallic structure is a field of endomorphisms J with J^2 = pJ + qI.
Fields are written as expression strings in the coordinates x1, x2, ...
and evaluated exactly (Fractions) together with their first derivatives.
"""

from fractions import Fraction

from metalgeom import kernel as kr
from metalgeom.fields import jet_at, parse_array

params = kr.MetallicParams(Fraction(1), Fraction(6))      # roots 3 and -2
point = (Fraction(1), Fraction(2))

# a shear of diag(3, -2) stays metallic at every point
J = jet_at(parse_array([["3", "-5*x1"], ["0", "-2"]], 2), point)
print("J at", point, "\n", J.value)
print("J^2 - pJ - qI =\n", kr.metallic_residual(J.value, params))

# the inverse is affine in J: J^-1 = (J - pI) / q
print("J^-1 =\n", kr.metallic_inverse(J.value, params))

# a metric for which J is self-adjoint, and its twin G(X, Y) = g(JX, Y)
g = jet_at(parse_array([["1 + x2^2", "0"], ["0", "4"]], 2), point)
Jd = jet_at(parse_array([["3", "0"], ["0", "-2"]], 2), point)
G = kr.twin_metric(g, Jd)
print("twin metric G =\n", G.value)
print("d G / d x2 =\n", G.grad[..., 1])

# without purity J has a distinct g-adjoint J*, and (J*)* = J
h = jet_at(parse_array([["1", "0"], ["0", "2"]], 2), point)
A = jet_at(parse_array([["1", "2"], ["3", "4"]], 2), point)
print("g-adjoint of [[1, 2], [3, 4]] under diag(1, 2) =\n", kr.g_adjoint(h, A).value)
print("double adjoint equals the original:", (kr.g_adjoint(h, kr.g_adjoint(h, A)).value == A.value).all())
