"""
The Tachibana operator
======================

For a pure metric, Phi_J g vanishes exactly when J is parallel for the
Levi-Civita connection. Compare a locally metallic fixture with a generic
pure one.
"""

from metalgeom import kernel as kr
from metalgeom.fixtures import build_fixture, recipe
from metalgeom.numeric import residual_magnitude

for fx in (build_fixture(recipe("locally_metallic", 2, 3, 1, 6)),
           build_fixture(recipe("conjugated_metallic", 2, 3, 1, 6))):
    print(fx.name)
    for ctx in fx.contexts():
        phi = residual_magnitude(ctx.tachibana(require_purity=True))
        nj = residual_magnitude(kr.covderiv_endo(ctx.lc, ctx.J))
        print(f"  point {[str(c) for c in ctx.point]}: |Phi_J g| = {phi}, |nabla^g J| = {nj}")
