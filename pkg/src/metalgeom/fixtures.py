"""Seeded generators of chart scenes whose properties hold by construction.

Most scenes are obtained from a constant model ``(J0, g0)`` with
``J0 = diag(sigma I_k, sigma_bar I_{n-k})`` transported by a unitriangular
polynomial matrix ``A(x)``::

    J = A J0 A^{-1},      g = A^{-T} g0 A^{-1}

so ``J`` is metallic and, when ``g0`` is block diagonal, pure. The frame
``E_a = A d_a`` is parallel for the connection ``-d_i A A^{-1}``, which makes
``J`` and ``g`` parallel as well; when ``A`` is the inverse Jacobian of a
triangular polynomial map this frame is holonomic and that connection is
torsion free (it is then the Levi-Civita connection of the flat metric ``g``).

Every flag is re-audited numerically at each sample point before a fixture is
returned; a failing audit is a bug in the recipe, not a property of the input.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from . import codazzi as cz
from . import kernel as kr
from .context import PointContext
from .fields import PoleAtPoint, expr_array
from .kernel import MetallicParams
from .numeric import FLOAT, RATIONAL, Backend, SingularMatrix, mat_inverse
from .poly import Poly, pdiff, poly_array, to_expr_array, unitriangular_inverse

FLAGS = (
    "Pure", "Metallic", "ParallelJ_LC", "ParallelJ_Given", "ParallelJStar_Given", "CodazziJ", "CodazziStarJ",
    "CodazziG_Metric", "CodazziTwin", "TorsionFree", "Statistical", "NonIntegrable", "MetallicLike",
)

EXACT_PARAMS = ((1, 6), (0, 4), (3, 4), (5, 6))
FLOAT_PARAMS = ((1, 1), (2, 1), (0, 2))
MAX_ATTEMPTS = 20


class IrrationalRootOnExactBackend(ValueError):
    pass


class FlagAuditError(ValueError):
    pass


class InadmissibleDraw(RuntimeError):
    """The random draw has too few usable sample points; the builder redraws."""


@dataclass(frozen=True)
class FixtureRecipe:
    family: str
    seed: int = 0
    dim: int = 2
    p: object = 1
    q: object = 6
    backend: str = "rational"
    options: Tuple[Tuple[str, object], ...] = ()

    @property
    def name(self) -> str:
        opts = "".join(f"_{k}" if v is True else f"_no{k}" if v is False else f"_{k}{v}"
                       for k, v in self.options)
        return f"{self.family}_n{self.dim}_p{self.p}_q{self.q}_s{self.seed}{opts}" + (
            "_float" if self.backend == "float" else "")

    def option(self, key, default=None):
        return dict(self.options).get(key, default)


@dataclass(frozen=True, eq=False)
class Fixture:
    name: str
    dim: int
    params: MetallicParams
    backend: Backend
    g: np.ndarray
    J: np.ndarray
    conn: Optional[np.ndarray]
    tau: Optional[np.ndarray]
    points: Tuple[tuple, ...]
    flags: FrozenSet[str]
    family: str = "scene"
    checks: Tuple[str, ...] = ()
    generic_points: bool = field(default=False)

    def context(self, point) -> PointContext:
        return PointContext(dim=self.dim, params=self.params, backend=self.backend, g=self.g,
                            J=self.J, conn=self.conn, tau=self.tau, point=point)

    def contexts(self) -> List[PointContext]:
        return [self.context(pt) for pt in self.points]


# ---------------------------------------------------------------------------
# flag audit


def _flag_holds(flag: str, ctx: PointContext) -> bool:
    z = ctx.vanishes
    if flag == "Pure":
        return z(kr.purity_residual(ctx.g.value, ctx.J.value))
    if flag == "Metallic":
        return z(kr.metallic_residual(ctx.J.value, ctx.params))
    if flag == "ParallelJ_LC":
        return z(kr.covderiv_endo(ctx.lc, ctx.J))
    if flag == "ParallelJ_Given":
        return z(ctx.nJ)
    if flag == "ParallelJStar_Given":
        return z(kr.covderiv_endo(ctx.conn, ctx.Jstar))
    if flag == "CodazziJ":
        return z(ctx.codazzi_endo(ctx.conn))
    if flag == "CodazziStarJ":
        return z(ctx.codazzi_endo(ctx.star))
    if flag == "CodazziG_Metric":
        return z(cz.codazzi_residual_metric(ctx.C))
    if flag == "CodazziTwin":
        return z(cz.total_symmetry_residual(ctx.Gam))
    if flag == "TorsionFree":
        return z(ctx.torsion)
    if flag == "Statistical":
        return z(ctx.torsion) and z(cz.codazzi_residual_metric(ctx.C))
    if flag == "NonIntegrable":
        return not z(ctx.nijenhuis)
    if flag == "MetallicLike":
        return (z(kr.metallic_residual(ctx.J.value, ctx.params))
                and z(kr.g_adjoint(ctx.g, ctx.Jstar).value - ctx.J.value))
    raise ValueError(f"unknown flag {flag!r}")


def audit_fixture(fx: Fixture) -> None:
    """Re-verify every asserted flag at every sample point."""
    unknown = set(fx.flags) - set(FLAGS)
    if unknown:
        raise FlagAuditError(f"unknown flags {sorted(unknown)}")
    if len(fx.points) < 1:
        raise FlagAuditError("scene has no sample points")
    for pt in fx.points:
        ctx = fx.context(pt)
        try:
            mat_inverse(ctx.g.value)
        except SingularMatrix:
            raise FlagAuditError(f"metric is degenerate at {pt}") from None
        for flag in sorted(fx.flags):
            if not _flag_holds(flag, ctx):
                raise FlagAuditError(f"flag {flag} fails at point ({', '.join(str(c) for c in pt)}) of {fx.name}")


# ---------------------------------------------------------------------------
# random building blocks


def _rand_int(rng: random.Random, lo=-2, hi=2, nonzero=False) -> int:
    while True:
        v = rng.randint(lo, hi)
        if v or not nonzero:
            return v


def _rand_poly(rng: random.Random, n: int, degree: int, variables: Sequence[int]) -> Poly:
    """Random polynomial in the given 1-based variables with terms of degree 1..degree."""
    p = Poly(n)
    if not variables or degree < 1:
        return p
    for _ in range(degree + 1):
        term = Poly.const(n, Fraction(_rand_int(rng, -2, 2, nonzero=True)))
        d = rng.randint(1, degree)
        for _ in range(d):
            term = term * Poly.var(n, rng.choice(list(variables)))
        p = p + term
    if p.is_zero():
        p = Poly.var(n, variables[0])
    return p


def _roots(params: MetallicParams, backend: Backend):
    if backend.exact:
        if not params.rational_roots:
            raise IrrationalRootOnExactBackend(
                f"p^2+4q = {params.discriminant} is not a rational square; use the float backend")
        return params.roots(exact=True)
    return params.roots(exact=False)


def _block_sizes(rng: random.Random, n: int) -> int:
    return rng.randint(1, n - 1) if n > 1 else 1


def _model_J(n: int, k: int, sigma, sigma_bar) -> np.ndarray:
    out = np.empty((n, n), dtype=object)
    out.fill(Fraction(0))
    for i in range(n):
        out[i, i] = sigma if i < k else sigma_bar
    return out


def _rand_sym_invertible(rng: random.Random, m: int) -> np.ndarray:
    while True:
        M = np.empty((m, m), dtype=object)
        for i in range(m):
            for j in range(i, m):
                v = Fraction(_rand_int(rng, -2, 3, nonzero=(i == j)))
                M[i, j] = M[j, i] = v
        try:
            mat_inverse(M)
            return M
        except SingularMatrix:
            continue


def _block_metric(rng: random.Random, n: int, k: int) -> np.ndarray:
    g0 = np.empty((n, n), dtype=object)
    g0.fill(Fraction(0))
    for lo, hi in ((0, k), (k, n)):
        if hi > lo:
            g0[lo:hi, lo:hi] = _rand_sym_invertible(rng, hi - lo)
    return g0


def _block_matrix(rng: random.Random, n: int, k: int) -> np.ndarray:
    B = np.empty((n, n), dtype=object)
    B.fill(Fraction(0))
    for i in range(n):
        for j in range(n):
            if (i < k) == (j < k):
                B[i, j] = Fraction(_rand_int(rng))
    return B


def _rand_unitriangular(rng: random.Random, n: int, degree: int, upper: bool) -> np.ndarray:
    A = poly_array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], n)
    if degree < 1:
        return A
    for i in range(n):
        for j in range(n):
            if (j > i) if upper else (j < i):
                A[i, j] = _rand_poly(rng, n, degree, range(1, n + 1))
    return A


def _holonomic_frame(rng: random.Random, n: int, degree: int) -> np.ndarray:
    """Inverse Jacobian of ``y_i = x_i + f_i(x_1..x_{i-1})``; its columns commute."""
    jac = poly_array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], n)
    for i in range(1, n):
        f = _rand_poly(rng, n, degree + 1, range(1, i + 1))
        for j in range(i):
            jac[i, j] = f.diff(j + 1)
    return unitriangular_inverse(jac)


def _transport(A: np.ndarray, J0: np.ndarray, g0: np.ndarray):
    n = A.shape[0]
    Ainv = unitriangular_inverse(A)
    J0p = poly_array(J0, n)
    g0p = poly_array(g0, n)
    J = A @ J0p @ Ainv
    g = Ainv.T @ g0p @ Ainv
    return J, g, Ainv


def _frame_connection(A: np.ndarray, Ainv: np.ndarray) -> np.ndarray:
    """Coefficients of the connection whose parallel frame is the columns of ``A``."""
    n = A.shape[0]
    out = np.empty((n, n, n), dtype=object)
    for i in range(n):
        out[:, i, :] = -(pdiff(A, i + 1) @ Ainv)
    return out


def _commuting_tensor(rng: random.Random, A, Ainv, n: int, k: int, symmetric: bool,
                      g0: Optional[np.ndarray] = None) -> np.ndarray:
    """A (1,2) tensor ``K[k,i,j]`` each of whose slices ``K[:, i, :]`` commutes with ``J``.

    With ``symmetric`` the frame components are ``g0^{-1} S`` for a totally
    symmetric ``S`` supported on single eigen-blocks, so ``K`` is symmetric in
    its lower slots and its ``g``-lowering is totally symmetric.
    """
    if symmetric:
        blocks = [list(range(0, k)), list(range(k, n))]
        S = np.empty((n, n, n), dtype=object)
        S.fill(Fraction(0))
        for blk in blocks:
            for a in blk:
                for b in blk:
                    for c in blk:
                        if a <= b <= c:
                            v = Fraction(_rand_int(rng))
                            for (x, y, z) in {(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)}:
                                S[x, y, z] = v
        Kf = np.einsum("ad,dbc->abc", mat_inverse(g0), S)
        Kf = poly_array(Kf, n)
        return np.einsum("ka,abc,bi,cj->kij", A, Kf, Ainv, Ainv)
    out = np.empty((n, n, n), dtype=object)
    for i in range(n):
        B = poly_array(_block_matrix(rng, n, k), n)
        out[:, i, :] = A @ B @ Ainv
    return out


def _random_connection(rng: random.Random, n: int, degree: int = 1) -> np.ndarray:
    out = np.empty((n, n, n), dtype=object)
    for idx in np.ndindex(n, n, n):
        out[idx] = _rand_poly(rng, n, degree, range(1, n + 1)) + Fraction(_rand_int(rng))
    return out


def _random_tau(rng: random.Random, n: int, degree: int = 1) -> np.ndarray:
    out = np.empty(n, dtype=object)
    for i in range(n):
        out[i] = _rand_poly(rng, n, degree, range(1, n + 1)) + Fraction(_rand_int(rng, nonzero=True))
    return out


def _const_tau(rng: random.Random, n: int) -> np.ndarray:
    return np.array([Poly.const(n, Fraction(_rand_int(rng, nonzero=True))) for _ in range(n)], dtype=object)


def _levi_civita_poly(g: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    n = g.shape[0]
    dg = [pdiff(g, i + 1) for i in range(n)]
    out = np.empty((n, n, n), dtype=object)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                acc = Poly(n)
                for l in range(n):
                    acc = acc + ginv[k, l] * (dg[i][j, l] + dg[j][i, l] - dg[l][i, j])
                out[k, i, j] = acc / 2
    return out


def _to_backend(P: np.ndarray, backend: Backend) -> np.ndarray:
    if backend.exact:
        return P
    out = np.empty(P.shape, dtype=object)
    for idx, v in np.ndenumerate(P):
        out[idx] = Poly(v.n, {m: float(c) for m, c in v.terms.items()})
    return out


MAX_CONDITION = 1e3


def _well_conditioned(ctx: PointContext) -> bool:
    """Float fixtures avoid nearly degenerate metrics, where round trips
    through two inverses lose about ``cond**2`` in relative accuracy."""
    for M in (ctx.g.value, ctx.G.value):
        if np.linalg.cond(np.asarray(M, dtype=float)) > MAX_CONDITION:
            return False
    return True


def _sample_points(rng: random.Random, fx_args: dict, count: int = 3, reject=None) -> Tuple[tuple, ...]:
    n = fx_args["dim"]
    pts: List[tuple] = []
    tries = 0
    while len(pts) < count:
        tries += 1
        if tries > 500:
            raise InadmissibleDraw(f"could not find {count} admissible sample points")
        pt = tuple(Fraction(rng.randint(-3, 3)) for _ in range(n))
        if pt in pts:
            continue
        probe = Fixture(points=(pt,), flags=frozenset(), **fx_args)
        try:
            ctx = probe.context(pt)
            mat_inverse(ctx.g.value)
            if ctx.params.q != 0:
                mat_inverse(ctx.G.value)
        except (PoleAtPoint, SingularMatrix):
            continue
        if not ctx.backend.exact and not _well_conditioned(ctx):
            continue
        if reject is not None and reject(ctx):
            continue
        pts.append(pt)
    return tuple(pts)


def _release(recipe: FixtureRecipe, *, params, backend, J, g, conn, tau, flags, rng,
             reject=None, generic_points=False, name=None) -> Fixture:
    n = recipe.dim
    args = dict(
        name=name or recipe.name, dim=n, params=params, backend=backend,
        g=to_expr_array(_to_backend(g, backend)), J=to_expr_array(_to_backend(J, backend)),
        conn=to_expr_array(_to_backend(conn, backend)) if conn is not None else None,
        tau=to_expr_array(_to_backend(tau, backend)) if tau is not None else None,
        family=recipe.family, generic_points=generic_points,
    )
    points = _sample_points(rng, args, count=recipe.option("points", 3), reject=reject)
    fx = Fixture(points=points, flags=frozenset(flags), **args)
    audit_fixture(fx)
    return fx


def _setup(recipe: FixtureRecipe, attempt: int = 0):
    backend = RATIONAL if recipe.backend == "rational" else FLOAT
    params = MetallicParams(Fraction(recipe.p), Fraction(recipe.q))
    sigma, sigma_bar = _roots(params, backend)
    if not backend.exact:
        params = MetallicParams(float(recipe.p), float(recipe.q))
    rng = random.Random(f"{recipe.family}:{recipe.seed}:{recipe.dim}:{recipe.p}:{recipe.q}:{attempt}")
    return backend, params, sigma, sigma_bar, rng


def _not_lc_parallel(ctx: PointContext) -> bool:
    return ctx.vanishes(kr.covderiv_endo(ctx.lc, ctx.J))


# ---------------------------------------------------------------------------
# families


def make_flat_parallel(recipe: FixtureRecipe, attempt: int = 0) -> Fixture:
    """Constant pure pair, flat connection."""
    backend, params, s, sb, rng = _setup(recipe, attempt)
    n = recipe.dim
    k = _block_sizes(rng, n)
    J0 = _model_J(n, k, s, sb)
    g0 = _block_metric(rng, n, k)
    zero = poly_array(np.full((n, n, n), Fraction(0), dtype=object), n)
    flags = {"Pure", "Metallic", "ParallelJ_LC", "ParallelJ_Given", "CodazziJ", "CodazziStarJ",
             "CodazziG_Metric", "CodazziTwin", "TorsionFree", "Statistical"}
    return _release(recipe, params=params, backend=backend, J=poly_array(J0, n), g=poly_array(g0, n),
                    conn=zero, tau=_const_tau(rng, n), flags=flags, rng=rng)


def make_conjugated_metallic(recipe: FixtureRecipe, attempt: int = 0) -> Fixture:
    """Position-dependent metallic ``J = A J0 A^{-1}`` with a generic connection.

    Options: ``purity`` (default True), ``a_degree`` (default 1), ``upper``.
    With purity the sample points avoid zeros of ``nabla^g J`` so they can
    serve as generic points.
    """
    backend, params, s, sb, rng = _setup(recipe, attempt)
    n = recipe.dim
    k = _block_sizes(rng, n)
    J0 = _model_J(n, k, s, sb)
    pure = recipe.option("purity", True)
    A = _rand_unitriangular(rng, n, recipe.option("a_degree", 1), upper=recipe.option("upper", True))
    if pure:
        g0 = _block_metric(rng, n, k)
        J, g, _ = _transport(A, J0, g0)
    else:
        J, _, _ = _transport(A, J0, _block_metric(rng, n, k))
        while True:
            g = poly_array(_rand_sym_invertible(rng, n), n)
            gv = np.array([[c.terms.get((0,) * n, Fraction(0)) for c in row] for row in g], dtype=object)
            if any(v != 0 for v in (J0.T @ gv - gv @ J0).flat):
                break
    flags = {"Metallic"} | ({"Pure"} if pure else set())
    reject = _not_lc_parallel if pure and recipe.option("a_degree", 1) > 0 else None
    return _release(recipe, params=params, backend=backend, J=J, g=g, conn=_random_connection(rng, n),
                    tau=_random_tau(rng, n), flags=flags, rng=rng, reject=reject,
                    generic_points=reject is not None)


def make_parallel_frame(recipe: FixtureRecipe, attempt: int = 0) -> Fixture:
    """``nabla J = 0`` with torsion: frame connection of a non-holonomic ``A``
    plus a random tensor commuting with ``J``."""
    backend, params, s, sb, rng = _setup(recipe, attempt)
    n = recipe.dim
    k = _block_sizes(rng, n)
    J0 = _model_J(n, k, s, sb)
    g0 = _block_metric(rng, n, k)
    A = _rand_unitriangular(rng, n, recipe.option("a_degree", 1), upper=True)
    J, g, Ainv = _transport(A, J0, g0)
    conn = _frame_connection(A, Ainv) + _commuting_tensor(rng, A, Ainv, n, k, symmetric=False)
    flags = {"Pure", "Metallic", "ParallelJ_Given", "CodazziJ", "CodazziStarJ"}
    return _release(recipe, params=params, backend=backend, J=J, g=g, conn=conn,
                    tau=_random_tau(rng, n), flags=flags, rng=rng)


def make_locally_metallic(recipe: FixtureRecipe, attempt: int = 0) -> Fixture:
    """Holonomic transport: ``J`` parallel for a torsion-free statistical
    connection ``nabla^g + K`` whose ``K`` commutes with ``J``."""
    backend, params, s, sb, rng = _setup(recipe, attempt)
    n = recipe.dim
    k = _block_sizes(rng, n)
    J0 = _model_J(n, k, s, sb)
    g0 = _block_metric(rng, n, k)
    A = _holonomic_frame(rng, n, recipe.option("a_degree", 1))
    J, g, Ainv = _transport(A, J0, g0)
    conn = _frame_connection(A, Ainv)
    if recipe.option("skew", True):
        conn = conn + _commuting_tensor(rng, A, Ainv, n, k, symmetric=True, g0=g0)
    flags = {"Pure", "Metallic", "ParallelJ_LC", "ParallelJ_Given", "CodazziJ", "CodazziStarJ",
             "CodazziG_Metric", "CodazziTwin", "TorsionFree", "Statistical"}
    return _release(recipe, params=params, backend=backend, J=J, g=g, conn=conn,
                    tau=_random_tau(rng, n), flags=flags, rng=rng)


def make_statistical(recipe: FixtureRecipe, attempt: int = 0) -> Fixture:
    """``nabla = nabla^g + g^{-1} S`` with ``S`` totally symmetric and constant.

    Option ``holonomic`` makes ``(J, g)`` locally metallic as well.
    """
    backend, params, s, sb, rng = _setup(recipe, attempt)
    n = recipe.dim
    k = _block_sizes(rng, n)
    J0 = _model_J(n, k, s, sb)
    g0 = _block_metric(rng, n, k)
    holonomic = recipe.option("holonomic", False)
    if holonomic:
        A = _holonomic_frame(rng, n, recipe.option("a_degree", 1))
    else:
        A = _rand_unitriangular(rng, n, recipe.option("a_degree", 1), upper=True)
    J, g, Ainv = _transport(A, J0, g0)
    ginv = A @ poly_array(mat_inverse(g0), n) @ A.T
    S = np.empty((n, n, n), dtype=object)
    if recipe.option("zero_skew", False):
        S.fill(Fraction(0))
    else:
        for a in range(n):
            for b in range(a, n):
                for c in range(b, n):
                    v = Fraction(_rand_int(rng))
                    for idx in {(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)}:
                        S[idx] = v
    conn = _levi_civita_poly(g, ginv) + np.einsum("kl,lij->kij", ginv, poly_array(S, n))
    flags = {"Pure", "Metallic", "TorsionFree", "CodazziG_Metric", "Statistical"}
    if holonomic:
        flags.add("ParallelJ_LC")
    reject = None if holonomic else _not_lc_parallel
    return _release(recipe, params=params, backend=backend, J=J, g=g, conn=conn,
                    tau=_random_tau(rng, n), flags=flags, rng=rng, reject=reject,
                    generic_points=not holonomic)


def make_codazzi_triangular(recipe: FixtureRecipe, attempt: int = 0) -> Fixture:
    """``J = [[sigma I, 0], [F, sigma_bar I]]`` whose rows are gradients, so the
    flat connection is Codazzi-coupled with ``J`` without being a J-connection.

    Option ``torsion`` adds a random tensor commuting with ``J``.
    """
    backend, params, s, sb, rng = _setup(recipe, attempt)
    n = recipe.dim
    if n < 2:
        raise ValueError("codazzi_triangular needs dim >= 2")
    if s == sb:
        raise ValueError("needs distinct metallic roots")
    k = _block_sizes(rng, n)
    J0 = _model_J(n, k, s, sb)
    first = list(range(1, k + 1))
    A = poly_array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], n)
    for r in range(k, n):
        # the square term keeps d(F) nonzero, so J is never accidentally parallel
        U = _rand_poly(rng, n, 2, first) + Fraction(_rand_int(rng, nonzero=True)) * Poly.var(n, 1) * Poly.var(n, 1)
        for c in range(k):
            A[r, c] = U.diff(c + 1) / (s - sb)
    g0 = _block_metric(rng, n, k)
    J, g, Ainv = _transport(A, J0, g0)
    conn = poly_array(np.full((n, n, n), Fraction(0), dtype=object), n)
    flags = {"Pure", "Metallic", "CodazziJ"}
    if recipe.option("torsion", False):
        conn = conn + _commuting_tensor(rng, A, Ainv, n, k, symmetric=False)
    else:
        flags.add("TorsionFree")
    return _release(recipe, params=params, backend=backend, J=J, g=g, conn=conn,
                    tau=_random_tau(rng, n), flags=flags, rng=rng)


def make_contact_nonintegrable(recipe: FixtureRecipe, attempt: int = 0) -> Fixture:
    """3-dimensional ``J`` with sigma-eigendistribution ``span{d1, d2 + x1 d3}``."""
    if recipe.dim != 3:
        raise ValueError("the contact fixture is 3-dimensional")
    backend, params, s, sb, rng = _setup(recipe, attempt)
    n = 3
    x1 = Poly.var(n, 1)
    A = poly_array([[1, 0, 0], [0, 1, 0], [0, x1, 1]], n)
    J0 = _model_J(n, 2, s, sb)
    g0 = _block_metric(rng, n, 2)
    J, g, _ = _transport(A, J0, g0)
    conn = poly_array(np.full((n, n, n), Fraction(0), dtype=object), n)
    if recipe.option("levi_civita", False):
        ginv = A @ poly_array(mat_inverse(g0), n) @ A.T
        conn = _levi_civita_poly(g, ginv)
        flags = {"Pure", "Metallic", "NonIntegrable", "TorsionFree", "CodazziG_Metric", "Statistical"}
    else:
        flags = {"Pure", "Metallic", "NonIntegrable", "TorsionFree"}
    return _release(recipe, params=params, backend=backend, J=J, g=g, conn=conn,
                    tau=_random_tau(rng, n), flags=flags, rng=rng)


def make_metallic_like(recipe: FixtureRecipe, attempt: int = 0) -> Fixture:
    """Metallic ``J`` with a metric that is not pure.

    With option ``parallel`` the pair is transported holonomically from a
    constant model, so ``nabla J = nabla J* = 0`` for the torsion-free frame
    connection, which also satisfies ``nabla g = 0``. Otherwise the metric and
    connection are random polynomials.
    """
    backend, params, s, sb, rng = _setup(recipe, attempt)
    n = recipe.dim
    k = _block_sizes(rng, n)
    J0 = _model_J(n, k, s, sb)
    while True:
        g1 = _rand_sym_invertible(rng, n)
        if any(v != 0 for v in (J0.T @ g1 - g1 @ J0).flat):
            break
    if recipe.option("parallel", False):
        A = _holonomic_frame(rng, n, recipe.option("a_degree", 1))
        J, g, Ainv = _transport(A, J0, g1)
        conn = _frame_connection(A, Ainv)
        flags = {"Metallic", "MetallicLike", "ParallelJ_Given", "ParallelJStar_Given", "TorsionFree",
                 "CodazziG_Metric"}
    else:
        A = _rand_unitriangular(rng, n, recipe.option("a_degree", 1), upper=True)
        J, _, _ = _transport(A, J0, g1)
        g = poly_array(g1, n)
        for i in range(n):
            for j in range(i, n):
                extra = _rand_poly(rng, n, 1, range(1, n + 1)) / 4
                g[i, j] = g[i, j] + extra
                if i != j:
                    g[j, i] = g[i, j]
        conn = _random_connection(rng, n)
        flags = {"Metallic", "MetallicLike"}
    return _release(recipe, params=params, backend=backend, J=J, g=g, conn=conn,
                    tau=_random_tau(rng, n), flags=flags, rng=rng)


FAMILIES = {
    "flat_parallel": make_flat_parallel,
    "conjugated_metallic": make_conjugated_metallic,
    "parallel_frame": make_parallel_frame,
    "locally_metallic": make_locally_metallic,
    "statistical": make_statistical,
    "codazzi_triangular": make_codazzi_triangular,
    "contact_nonintegrable": make_contact_nonintegrable,
    "metallic_like": make_metallic_like,
}


def build_fixture(recipe: FixtureRecipe) -> Fixture:
    try:
        family = FAMILIES[recipe.family]
    except KeyError:
        raise ValueError(f"unknown fixture family {recipe.family!r}") from None
    for attempt in range(MAX_ATTEMPTS):
        try:
            return family(recipe, attempt)
        except InadmissibleDraw:
            continue
    raise InadmissibleDraw(f"no admissible draw for {recipe.name} after {MAX_ATTEMPTS} attempts")


def recipe(family: str, seed: int = 0, dim: int = 2, p=1, q=6, backend: str = "rational",
           **options) -> FixtureRecipe:
    return FixtureRecipe(family, seed, dim, p, q, backend, tuple(sorted(options.items())))


def default_recipes(backend: str = "rational", seed: int = 0) -> List[FixtureRecipe]:
    """The recipe inventory used by the default verification suite."""
    out: List[FixtureRecipe] = []
    if backend == "float":
        for (p, q) in FLOAT_PARAMS:
            for dim in (2, 3):
                s = seed + dim
                out += [
                    recipe("flat_parallel", s, dim, p, q, "float"),
                    recipe("conjugated_metallic", s, dim, p, q, "float"),
                    recipe("parallel_frame", s, dim, p, q, "float"),
                    recipe("locally_metallic", s, dim, p, q, "float"),
                    recipe("statistical", s, dim, p, q, "float"),
                    recipe("codazzi_triangular", s, dim, p, q, "float"),
                    recipe("metallic_like", s, dim, p, q, "float", parallel=True),
                    recipe("metallic_like", s, dim, p, q, "float"),
                ]
            out.append(recipe("contact_nonintegrable", seed, 3, p, q, "float"))
        return out
    for (p, q) in EXACT_PARAMS:
        for dim in (2, 3):
            s = seed + dim
            out += [
                recipe("flat_parallel", s, dim, p, q),
                recipe("conjugated_metallic", s, dim, p, q),
                recipe("conjugated_metallic", s, dim, p, q, purity=False),
                recipe("parallel_frame", s, dim, p, q),
                recipe("locally_metallic", s, dim, p, q),
                recipe("statistical", s, dim, p, q),
                recipe("statistical", s, dim, p, q, holonomic=True),
                recipe("codazzi_triangular", s, dim, p, q),
                recipe("codazzi_triangular", s, dim, p, q, torsion=True),
                recipe("metallic_like", s, dim, p, q, parallel=True),
                recipe("metallic_like", s, dim, p, q),
            ]
        out.append(recipe("contact_nonintegrable", seed, 3, p, q))
        out.append(recipe("contact_nonintegrable", seed, 3, p, q, levi_civita=True))
    return out
