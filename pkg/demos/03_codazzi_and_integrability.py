"""
Codazzi couplings and integrability
===================================

(nabla, J) is Codazzi-coupled when (nabla_X J)Y = (nabla_Y J)X. The Nijenhuis
tensor measures integrability of J. On the contact-type fixture it is
nonzero with value p^2 + 4q.
"""

from fractions import Fraction

from metalgeom import codazzi as cz
from metalgeom.fields import jet_at, parse_array
from metalgeom.fixtures import build_fixture, recipe
from metalgeom.numeric import RATIONAL, residual_magnitude

flat = RATIONAL.zeros((2, 2, 2))
pt = (Fraction(1), Fraction(1))
for text in ("x1", "x2"):
    J = jet_at(parse_array([["3", "0"], [text, "-2"]], 2), pt)
    res = residual_magnitude(cz.codazzi_residual_endo(flat, J))
    print(f"J = [[3, 0], [{text}, -2]] with the flat connection: Codazzi residual {res}")

contact = build_fixture(recipe("contact_nonintegrable", 0, 3, 1, 6))
for ctx in contact.contexts():
    print("point", [str(c) for c in ctx.point], "N_J(d1, d2) =", [str(v) for v in ctx.nijenhuis[:, 0, 1]])

# a Codazzi-coupled, torsion-free pair forces N_J = 0
fx = build_fixture(recipe("codazzi_triangular", 4, 3, 1, 6))
print(fx.name, "flags:", sorted(fx.flags))
print("max |N_J| over sample points:", max(residual_magnitude(c.nijenhuis) for c in fx.contexts()))
