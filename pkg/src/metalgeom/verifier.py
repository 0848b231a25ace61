"""Registry of checks binding fixtures, residual operators and pass criteria.

Every check evaluates one or more named residual tensors at a sample point;
a cell passes when all of them vanish under the fixture's tolerance policy
(literally zero on the exact backend). Checks with hypotheses are evaluated
on fixtures that certify those hypotheses by construction and, as negative
controls, on designated counter-fixtures that lack them: there the conclusion
is expected to fail and the cell is marked ``expectedFail``. A control whose
conclusion holds anyway is counted as a failure rather than a silent pass.

Some checks also carry *agreement groups*: tensors that the underlying
equivalence says must vanish together. A cell whose group is partly zero and
partly nonzero fails regardless of its residual.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import codazzi as cz
from . import connections as cn
from . import kernel as kr
from .context import PointContext
from .fixtures import Fixture, FixtureRecipe, build_fixture
from .numeric import TolerancePolicy, format_scalar, mat_inverse, residual_magnitude

E = np.einsum


class HypothesisNotCertified(ValueError):
    pass


class EmptyApplicableSet(ValueError):
    pass


class UnknownCheck(KeyError):
    pass


Parts = Dict[str, np.ndarray]


@dataclass(frozen=True)
class Check:
    id: str
    parts: Callable[[PointContext], Parts]
    requires: FrozenSet[str] = frozenset({"Metallic"})
    hypotheses: FrozenSet[str] = frozenset()
    params: Optional[Callable[[kr.MetallicParams], bool]] = None
    conclusion: Tuple[str, ...] = ()
    control: Optional[Callable[[Fixture], bool]] = None
    control_per_point: bool = False
    agreement: Optional[Callable[[PointContext], Sequence[Sequence[np.ndarray]]]] = None
    agreement_needs_hypotheses: bool = False
    info: Optional[Callable[[PointContext], dict]] = None
    witness: Optional[Callable[[Fixture], Optional[dict]]] = None

    @property
    def conditional(self) -> bool:
        return bool(self.hypotheses) or self.params is not None

    def certified(self, fx: Fixture) -> bool:
        return (self.requires | self.hypotheses) <= fx.flags and (self.params is None or self.params(fx.params))

    def computable(self, fx: Fixture) -> bool:
        return self.requires <= fx.flags


@dataclass(frozen=True)
class CheckResult:
    check: str
    fixture: str
    point: Tuple
    residual: str
    passed: bool
    expected_fail: bool = False
    info: Optional[dict] = None
    witness: Optional[dict] = None

    @property
    def outcome(self) -> str:
        if self.expected_fail:
            return "expectedFail" if not self.passed else "fail"
        return "pass" if self.passed else "fail"

    def to_json(self) -> dict:
        out = {"check": self.check, "fixture": self.fixture,
               "point": [format_scalar(c) for c in self.point],
               "residual": self.residual, "pass": self.passed, "expectedFail": self.expected_fail}
        if self.info:
            out["info"] = self.info
        if self.witness:
            out["witness"] = self.witness
        return out


@dataclass
class Report:
    meta: dict
    results: List[CheckResult] = field(default_factory=list)

    @property
    def summary(self) -> Dict[str, int]:
        counts = {"pass": 0, "fail": 0, "expectedFail": 0}
        for r in self.results:
            counts[r.outcome] += 1
        return counts

    @property
    def ok(self) -> bool:
        return self.summary["fail"] == 0

    def to_json(self) -> dict:
        return {"meta": self.meta, "results": [r.to_json() for r in self.results], "summary": self.summary}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# shared tensor helpers; (0,3) tensors are indexed [x, y, z] with the
# differentiation direction last, (1,2) tensors as [k, i, j].


def _j_first(T, J):
    """``T(JX, Y, Z)``."""
    return E("myz,mx->xyz", T, J)


def _j_second(T, J):
    """``T(X, JY, Z)``."""
    return E("xmz,my->xyz", T, J)


def _endo_apply(A, T):
    return E("km,mij->kij", A, T)


def _covJ(ctx: PointContext, conn, endo=None):
    return kr.covderiv_endo(conn, endo if endo is not None else ctx.J)


def _Cstar(ctx):
    return kr.covderiv_metric(ctx.star, ctx.g)


def _Cdagger(ctx):
    return kr.covderiv_metric(ctx.dagger, ctx.g)


def _Gamma_dagger(ctx):
    return kr.covderiv_metric(ctx.dagger, ctx.G)


def _Gamma_star(ctx):
    return kr.covderiv_metric(ctx.star, ctx.G)


def _identity(ctx):
    return ctx.backend.identity(ctx.dim)


def _nij_from_torsion(ctx, printed: bool = False):
    T, J = ctx.torsion, ctx.J.value
    t_x_jy = E("kim,mj->kij", T, J)
    t_jx_y = E("kmj,mi->kij", T, J)
    t_jx_jy = E("kab,ai,bj->kij", T, J, J)
    middle = t_x_jy if printed else _endo_apply(J, t_x_jy)
    return -_endo_apply(J @ J, T) + middle + _endo_apply(J, t_jx_y) - t_jx_jy


def _tachibana_decomposition(ctx):
    C, Gm, nJ, g, J = ctx.C, ctx.Gam, ctx.nJ, ctx.g.value, ctx.J.value
    return (E("yzm,mx->xyz", C, J) - E("yzx->xyz", Gm)
            + E("myx,mz->xyz", nJ, g) + E("mzx,my->xyz", nJ, g))


# ---------------------------------------------------------------------------
# residual parts per check


def _conj_involution(ctx):
    return {"g": cn.metric_conjugate(ctx.star, ctx.g) - ctx.conn,
            "G": cn.metric_conjugate(ctx.dagger, ctx.G) - ctx.conn}


def _gen_conj_involution(ctx):
    return {"g": cn.generalized_conjugate(ctx.gen_star, ctx.g, ctx.tau) - ctx.conn}


def _gd6_gd7(ctx):
    return {"C": _Cstar(ctx) + ctx.C, "Gamma": _Gamma_dagger(ctx) + ctx.Gam}


def _gd8(ctx):
    return {"gd8": ctx.Gam - _j_second(ctx.C, ctx.J.value) - E("xm,mzy->xyz", ctx.g.value, ctx.nJ)}


def _twin_props(ctx):
    G, g, J, Ji = ctx.G.value, ctx.g.value, ctx.J.value, ctx.Jinv.value
    return {"symmetric": G - G.T, "pure": J.T @ G - G @ J,
            "inverse_pure_g": Ji.T @ g - g @ Ji, "inverse_pure_G": Ji.T @ G - G @ Ji}


def _dualproj_torsion(ctx):
    return {"torsion": kr.torsion(ctx.dual_proj) - ctx.torsion}


def _codazzi_equiv(ctx):
    R = ctx.codazzi_endo(ctx.conn)
    gap = kr.torsion(ctx.jconj) - ctx.torsion
    RJ = cz.codazzi_residual_endo(ctx.jconj, ctx.Jinv)
    return {"gd10": _endo_apply(ctx.Jinv.value, R) - gap,
            "gd11": _endo_apply(ctx.J.value, RJ) + gap,
            "torsion_gap": gap, "inverse_codazzi": RJ}


def _codazzi_equiv_groups(ctx):
    return [[ctx.codazzi_endo(ctx.conn), kr.torsion(ctx.jconj) - ctx.torsion,
             cz.codazzi_residual_endo(ctx.jconj, ctx.Jinv)]]


def _double_jconj(ctx):
    return cn.j_conjugate(ctx.jconj, ctx.J, ctx.params) - ctx.conn


def _jj_trivial(ctx):
    return {"double_conjugate": _double_jconj(ctx)}


def _noninvolutive(ctx):
    Ji = ctx.Jinv.value
    return {"expansion": _double_jconj(ctx) - ctx.params.p * _endo_apply(Ji @ Ji, ctx.nJ)}


def _noninvolutive_witness(fx: Fixture) -> Optional[dict]:
    for pt in fx.points:
        ctx = fx.context(pt)
        diff = _double_jconj(ctx)
        for i in range(fx.dim):
            for j in range(fx.dim):
                vec = diff[:, i, j]
                if not ctx.vanishes(vec):
                    return {"point": pt, "direction": [i + 1, j + 1],
                            "vector": [format_scalar(v) for v in vec],
                            "magnitude": residual_magnitude(vec)}
    return None


def _propagates(ctx):
    return {"jconj_codazzi": ctx.codazzi_endo(ctx.jconj)}


def _nj_via_torsion(ctx):
    return {"nijenhuis": ctx.nijenhuis - _nij_from_torsion(ctx)}


def _nj_info(ctx):
    return {"printed_form_residual": format_scalar(residual_magnitude(ctx.nijenhuis - _nij_from_torsion(ctx, True)))}


def _integrable(ctx):
    return {"nijenhuis": ctx.nijenhuis}


def _totalsym_statuses(ctx):
    Gd = _Gamma_dagger(ctx)
    T_gap = kr.torsion(ctx.dagger) - ctx.torsion
    return [cz.codazzi_residual_metric(ctx.Gam), cz.codazzi_residual_metric(Gd),
            cz.total_symmetry_residual(ctx.Gam), cz.total_symmetry_residual(Gd), T_gap]


def _totalsym(ctx):
    r1, r2, r3, r4, r5 = _totalsym_statuses(ctx)
    Gm = ctx.Gam
    # G(X, T'(Z, Y) - T(Z, Y)) = Gamma(X, Y, Z) - Gamma(X, Z, Y) links the torsion gap to Gamma
    lowered_gap = E("kzy,kx->xyz", r5, ctx.G.value)
    return {"codazzi_G": r1, "codazzi_G_dagger": r2, "totally_symmetric": r3,
            "totally_symmetric_dagger": r4, "torsion_gap": r5,
            "link_dagger": r1 + r2, "link_torsion": lowered_gap - (Gm - Gm.transpose(0, 2, 1))}


def _dagger_identity(ctx):
    Dd = _covJ(ctx, ctx.dagger)
    G = ctx.G.value
    lhs = E("kxy,kz->xyz", Dd - Dd.transpose(0, 2, 1), G)
    rhs = E("yk,kzx->xyz", G, ctx.nJ - Dd)
    return {"identity": lhs - rhs}


def _star_j_codazzi(ctx):
    return {"star_codazzi": ctx.codazzi_endo(ctx.star)}


def _star_equals(ctx):
    return {"starJ_minus_nablaJ": _covJ(ctx, ctx.star) - ctx.nJ}


def _star_equals_info(ctx):
    diff = ctx.star - ctx.conn
    return {"connection_gap": format_scalar(residual_magnitude(diff)),
            "connections_equal": bool(ctx.vanishes(diff))}


def _prop4(ctx):
    return {"star": _covJ(ctx, ctx.star), "dagger": _covJ(ctx, ctx.dagger)}


def _prop3(ctx):
    J = ctx.J.value
    cJ = _j_second(ctx.C, J)
    return {"C_Cstar": cJ + _j_second(_Cstar(ctx), J), "C_Cdagger": cJ + _j_second(_Cdagger(ctx), J),
            "C_Gamma": cJ - ctx.Gam, "C_Gamma_dagger": cJ + _Gamma_dagger(ctx),
            "C_Gamma_star": cJ + _Gamma_star(ctx)}


def _prop6(ctx):
    J = ctx.J.value
    tensors = {"C": ctx.C, "Cstar": _Cstar(ctx), "Cdagger": _Cdagger(ctx),
               "Gamma": ctx.Gam, "Gamma_star": _Gamma_star(ctx), "Gamma_dagger": _Gamma_dagger(ctx)}
    return {k: _j_first(T, J) - _j_second(T, J) for k, T in tensors.items()}


def _prop5(ctx):
    return {"decomposition": ctx.phi - _tachibana_decomposition(ctx)}


def _thm_locally(ctx):
    return {"tachibana": ctx.phi, "levi_civita_J": _covJ(ctx, ctx.lc)}


def _prop7(ctx):
    return {"tachibana": ctx.phi, "levi_civita_J": _covJ(ctx, ctx.lc)}


def _prop7_groups(ctx):
    return [[ctx.phi, _covJ(ctx, ctx.lc)]]


def _quasi(ctx):
    cyc = cz.quasi_metallic_residual(ctx.J, ctx.g)
    return {"cyclic_identity": cyc - cz.cyclic_covJ_sum(ctx.conn, ctx.J, ctx.g)}


def _quasi_groups(ctx):
    return [[cz.quasi_metallic_residual(ctx.J, ctx.g), cz.cyclic_covJ_sum(ctx.conn, ctx.J, ctx.g)]]


def _gen_conj_iff(ctx):
    sJ = _covJ(ctx, ctx.gen_star)
    g = ctx.g.value
    return {"gen_conj_J": sJ,
            "adjoint_link": E("ym,mxz->xyz", g, sJ) - E("mxy,mz->xyz", ctx.nJ, g)}


def _gen_conj_iff_groups(ctx):
    return [[ctx.nJ, _covJ(ctx, ctx.gen_star)]]


def _gen_conj_equal(ctx):
    return {"g_vs_G": ctx.gen_star - ctx.gen_dagger}


def _gen_conj_of_jconj(ctx):
    return {"jconj_G": cn.generalized_conjugate(ctx.jconj, ctx.G, ctx.tau) - ctx.gen_star}


def _dualproj_codazzi(ctx):
    dp = ctx.dual_proj
    dpj = cn.dual_projective(ctx.jconj, ctx.g.value, ctx.tau)
    return {"dp_J": ctx.codazzi_endo(dp), "dp_Jinv": ctx.codazzi_endo(dp, ctx.Jinv),
            "dpjconj_J": ctx.codazzi_endo(dpj), "dpjconj_Jinv": ctx.codazzi_endo(dpj, ctx.Jinv)}


def _mlike_tensors(ctx):
    nJs = _covJ(ctx, ctx.conn, ctx.Jstar)
    sJ = _covJ(ctx, ctx.star)
    sJs = _covJ(ctx, ctx.star, ctx.Jstar)
    return ctx.nJ, nJs, sJ, sJs


def _mlike_prop8(ctx):
    g, J, Js = ctx.g.value, ctx.J.value, ctx.Jstar.value
    p, q = ctx.params.p, ctx.params.q
    I = _identity(ctx)
    Jsi = mat_inverse(Js)
    nJ, nJs, sJ, sJs = _mlike_tensors(ctx)
    return {
        "metallic": Js @ Js - p * Js - q * I,
        "inverse": Jsi - (Js / q - (p / q) * I),
        "inverse_adjoint": ctx.Jinv.value.T @ g - g @ Jsi,
        "mixed": J.T @ g @ Js - p * (g @ Js) - q * g,
        "nabla_Jstar": E("mxy,mz->xyz", nJs, g) - E("mxz,ym->xyz", sJ, g),
        "star_Jstar": E("mxy,mz->xyz", sJs, g) - E("mxz,ym->xyz", nJ, g),
        "adjoint_involution": kr.g_adjoint(ctx.g, ctx.Jstar).value - J,
    }


def _mlike_prop9(ctx):
    nJ, nJs, sJ, sJs = _mlike_tensors(ctx)
    return {"star_J": sJ, "star_Jstar": sJs}


def _mlike_prop9_groups(ctx):
    nJ, nJs, sJ, sJs = _mlike_tensors(ctx)
    return [[nJs, sJ], [nJ, sJs]]


def _mlike_nablajstar(ctx):
    nJ, nJs, sJ, sJs = _mlike_tensors(ctx)
    return {"item1": nJs - sJ, "item2": sJs - nJ}


def _mlike_prop10(ctx):
    g, J, Js = ctx.g.value, ctx.J.value, ctx.Jstar.value
    nJ, nJs, sJ, sJs = _mlike_tensors(ctx)
    C, Cs = ctx.C, _Cstar(ctx)
    return {"C": _j_first(C, J) - _j_second(C, Js) - E("ym,mzx->xyz", g, sJ - nJ),
            "Cstar": _j_first(Cs, J) - _j_second(Cs, Js) - E("xm,mzy->xyz", g, sJs - nJs)}


def _mlike_note(ctx):
    J, Js = ctx.J.value, ctx.Jstar.value
    C, Cs = ctx.C, _Cstar(ctx)
    a, b = _j_first(C, J), _j_second(C, Js)
    c, d = -_j_first(Cs, J), -_j_second(Cs, Js)
    return {"a_b": a - b, "b_c": b - c, "c_d": c - d}


def _mlike_theorem(ctx):
    g, J, Js = ctx.g.value, ctx.J.value, ctx.Jstar.value
    phi_star = kr.tachibana_metric(ctx.Jstar, ctx.g, require_purity=False)
    phi = ctx.phi
    # g(Y, (J* - J) nabla_X Z) on the coordinate frame
    frame_term = E("ym,mn,nxz->xyz", g, Js - J, ctx.conn)
    return {"phi_Jstar": phi_star - frame_term, "phi_J": phi + frame_term, "sum": phi_star + phi}


def _nij_contact(ctx):
    target = ctx.backend.zeros(3)
    target[2] = ctx.params.discriminant
    return {"value": ctx.nijenhuis[:, 0, 1] - target}


def _nij_contact_info(ctx):
    return {"N12": [format_scalar(v) for v in ctx.nijenhuis[:, 0, 1]]}


# ---------------------------------------------------------------------------
# control selectors


def _family(*names, pure=None, p_nonzero=False, generic=False, extra=None):
    def pick(fx: Fixture) -> bool:
        if names and fx.family not in names:
            return False
        if pure is not None and ("Pure" in fx.flags) != pure:
            return False
        if p_nonzero and fx.params.p == 0:
            return False
        if generic and not fx.generic_points:
            return False
        if extra is not None and not extra(fx):
            return False
        return True
    return pick


_GENERIC_PURE = _family("conjugated_metallic", pure=True)
_NONPURE = _family("conjugated_metallic", pure=False)
_MLIKE_GENERIC = _family("metallic_like", extra=lambda fx: "ParallelJ_Given" not in fx.flags)

_PM = frozenset({"Pure", "Metallic"})
_ML = frozenset({"Metallic", "MetallicLike"})


def _fs(*names):
    return frozenset(names)


REGISTRY: Dict[str, Check] = {c.id: c for c in [
    Check("CONJ_INVOLUTION", _conj_involution, requires=_PM),
    Check("CODAZZI_EQUIV_TORSION", _codazzi_equiv, hypotheses=_fs("CodazziJ"),
          conclusion=("torsion_gap", "inverse_codazzi"), control=_GENERIC_PURE,
          agreement=_codazzi_equiv_groups),
    Check("JJ_TRIVIAL", _jj_trivial, params=lambda pq: pq.p == 0,
          control=_family("conjugated_metallic", p_nonzero=True)),
    Check("NONINVOLUTIVE_JCONJ", _noninvolutive, params=lambda pq: pq.p != 0,
          witness=_noninvolutive_witness,
          control=_family("conjugated_metallic", "statistical", extra=lambda fx: fx.params.p == 0)),
    Check("CODAZZI_PROPAGATES_J", _propagates, hypotheses=_fs("CodazziJ"),
          control=_family("conjugated_metallic", p_nonzero=True)),
    Check("NJ_VIA_TORSION", _nj_via_torsion, hypotheses=_fs("CodazziJ"),
          control=_family("conjugated_metallic", extra=lambda fx: fx.dim >= 3), info=_nj_info),
    Check("INTEGRABLE_IF_CODAZZI_TF", _integrable, hypotheses=_fs("CodazziJ", "TorsionFree"),
          control=_family("contact_nonintegrable")),
    Check("TWIN_PROPS", _twin_props, hypotheses=_fs("Pure"), control=_NONPURE),
    Check("GD6_GD7", _gd6_gd7, requires=_PM),
    Check("GD8", _gd8, hypotheses=_fs("Pure"), control=_NONPURE),
    Check("TOTALSYM_EQUIV", _totalsym, requires=_PM, hypotheses=_fs("CodazziTwin"),
          conclusion=("codazzi_G", "codazzi_G_dagger", "totally_symmetric", "totally_symmetric_dagger",
                      "torsion_gap"),
          control=_family("statistical", "conjugated_metallic", pure=True),
          agreement=lambda ctx: [_totalsym_statuses(ctx)]),
    Check("DAGGER_CODAZZI_IDENTITY", _dagger_identity, requires=_PM, hypotheses=_fs("CodazziJ", "CodazziTwin"),
          control=_GENERIC_PURE),
    Check("STAR_J_CODAZZI", _star_j_codazzi, requires=_PM, hypotheses=_fs("CodazziG_Metric", "CodazziTwin"),
          control=_family("statistical", extra=lambda fx: "ParallelJ_LC" not in fx.flags)),
    Check("STAR_EQUALS_NABLA_ON_J", _star_equals, requires=_PM, hypotheses=_fs("CodazziJ", "CodazziStarJ"),
          control=_family("codazzi_triangular"), info=_star_equals_info),
    Check("PROP4_JCONN", _prop4, requires=_PM, hypotheses=_fs("ParallelJ_Given"), control=_GENERIC_PURE),
    Check("PROP3_CHAIN", _prop3, requires=_PM, hypotheses=_fs("ParallelJ_Given"), control=_GENERIC_PURE),
    Check("PROP6_PURITY", _prop6, requires=_PM, hypotheses=_fs("ParallelJ_Given"), control=_GENERIC_PURE),
    Check("PROP5_TACHIBANA_DECOMP", _prop5, requires=_PM, hypotheses=_fs("TorsionFree"),
          control=_family("parallel_frame", "codazzi_triangular", extra=lambda fx: "TorsionFree" not in fx.flags)),
    Check("THM_LOCALLY_METALLIC", _thm_locally, requires=_PM,
          hypotheses=_fs("TorsionFree", "ParallelJ_Given", "CodazziG_Metric"),
          conclusion=("tachibana",), control=_family("statistical", generic=True)),
    Check("PROP7_EQUIV", _prop7, requires=_PM, hypotheses=_fs("ParallelJ_LC"), conclusion=("tachibana",),
          control=_family(generic=True), control_per_point=True, agreement=_prop7_groups),
    Check("QUASI_CYCLIC", _quasi, requires=_PM, hypotheses=_fs("TorsionFree", "CodazziG_Metric"),
          control=_family("codazzi_triangular", extra=lambda fx: "TorsionFree" in fx.flags),
          agreement=_quasi_groups, agreement_needs_hypotheses=True),
    Check("GEN_CONJ_INVOLUTION", _gen_conj_involution),
    Check("GEN_CONJ_JCONN_IFF", _gen_conj_iff, requires=_PM, hypotheses=_fs("ParallelJ_Given"),
          conclusion=("gen_conj_J",), control=_GENERIC_PURE, agreement=_gen_conj_iff_groups),
    Check("GEN_CONJ_EQUAL", _gen_conj_equal, requires=_PM, hypotheses=_fs("ParallelJ_Given"),
          control=_GENERIC_PURE),
    Check("GEN_CONJ_OF_JCONJ", _gen_conj_of_jconj, requires=_PM),
    Check("DUALPROJ_CODAZZI", _dualproj_codazzi, requires=_PM, hypotheses=_fs("CodazziJ"),
          control=_GENERIC_PURE),
    Check("DUALPROJ_TORSION", _dualproj_torsion),
    Check("MLIKE_PROP8", _mlike_prop8, requires=_ML),
    Check("MLIKE_PROP9", _mlike_prop9, requires=_ML, hypotheses=_fs("ParallelJ_Given", "ParallelJStar_Given"),
          control=_MLIKE_GENERIC, agreement=_mlike_prop9_groups),
    Check("MLIKE_NABLAJSTAR", _mlike_nablajstar, requires=_ML,
          hypotheses=_fs("ParallelJ_Given", "ParallelJStar_Given"), control=_MLIKE_GENERIC),
    Check("MLIKE_PROP10", _mlike_prop10, requires=_ML),
    Check("MLIKE_PARALLEL_NOTE", _mlike_note, requires=_ML,
          hypotheses=_fs("ParallelJ_Given", "ParallelJStar_Given"), control=_MLIKE_GENERIC),
    Check("MLIKE_THEOREM", _mlike_theorem, requires=_ML,
          hypotheses=_fs("ParallelJ_Given", "ParallelJStar_Given", "CodazziG_Metric", "TorsionFree"),
          conclusion=("sum",), control=_MLIKE_GENERIC),
    Check("NIJENHUIS_CONTACT", _nij_contact, requires=_fs("Metallic", "NonIntegrable"),
          params=None, info=_nij_contact_info),
]}

CHECK_IDS: Tuple[str, ...] = tuple(REGISTRY)
UNCONDITIONAL = tuple(c.id for c in REGISTRY.values() if not c.conditional)
CONDITIONAL = tuple(c.id for c in REGISTRY.values() if c.conditional)


def get_check(check_id: str) -> Check:
    try:
        return REGISTRY[check_id]
    except KeyError:
        raise UnknownCheck(check_id) from None


# ---------------------------------------------------------------------------
# execution


def _evaluate(check: Check, ctx: PointContext, tol: TolerancePolicy, keys: Optional[Sequence[str]] = None,
              certified: bool = True):
    parts = check.parts(ctx)
    if keys:
        parts = {k: parts[k] for k in keys}
    mags = {k: residual_magnitude(v) for k, v in parts.items()}
    holds = all(ctx.vanishes(v, tol) for v in parts.values())
    info: dict = {}
    if len(mags) > 1:
        info["parts"] = {k: format_scalar(v) for k, v in mags.items()}
    agrees = True
    if check.agreement is not None and (certified or not check.agreement_needs_hypotheses):
        statuses = [[bool(ctx.vanishes(t, tol)) for t in group] for group in check.agreement(ctx)]
        agrees = all(len(set(s)) == 1 for s in statuses)
        info["agreement"] = ["disagree" if len(set(s)) > 1 else "zero" if s[0] else "nonzero"
                             for s in statuses]
    if check.info is not None:
        info.update(check.info(ctx))
    magnitude = max(mags.values()) if mags else ctx.backend.scalar(0)
    return magnitude, holds, agrees, info


def _tol_for(fx: Fixture, tol: Optional[TolerancePolicy]) -> TolerancePolicy:
    if fx.backend.exact:
        return TolerancePolicy.exact()
    return tol or TolerancePolicy.relative()


def run_check(check_id: str, fx: Fixture, tol: Optional[TolerancePolicy] = None) -> List[CheckResult]:
    """One result per sample point on a fixture that certifies the check's hypotheses."""
    check = get_check(check_id)
    missing = (check.requires | check.hypotheses) - fx.flags
    if missing:
        raise HypothesisNotCertified(f"{check_id} needs flags {sorted(missing)} on {fx.name}")
    if check.params is not None and not check.params(fx.params):
        raise HypothesisNotCertified(f"{check_id} does not apply to (p, q) = ({fx.params.p}, {fx.params.q})")
    tol = _tol_for(fx, tol)
    out = []
    for pt in fx.points:
        ctx = fx.context(pt)
        magnitude, holds, agrees, info = _evaluate(check, ctx, tol)
        out.append(CheckResult(check_id, fx.name, tuple(pt), format_scalar(magnitude), holds and agrees,
                               info=info or None))
    if check.witness is not None:
        w = check.witness(fx)
        if w is not None:
            pt = w.pop("point")
            out.append(CheckResult(check_id, fx.name, tuple(pt), format_scalar(w.pop("magnitude")), True,
                                   witness=w))
        elif "ParallelJ_Given" not in fx.flags and fx.family != "scene":
            # generated families with non-parallel J are built to carry a witness
            out.append(CheckResult(check_id, fx.name, tuple(fx.points[0]), "0", False,
                                   witness={"found": False}))
    return out


def run_control(check_id: str, fx: Fixture, tol: Optional[TolerancePolicy] = None) -> List[CheckResult]:
    """Evaluate the check's conclusion on a fixture lacking its hypotheses.

    The conclusion is expected to fail. By default one result is reported at
    the point of largest residual; checks with ``control_per_point`` report
    every point.
    """
    check = get_check(check_id)
    if not check.computable(fx):
        raise HypothesisNotCertified(f"{check_id} cannot be evaluated on {fx.name}: needs {sorted(check.requires)}")
    tol = _tol_for(fx, tol)
    if check.witness is not None:
        # the negated claim of an existence check: no witness on this fixture
        w = check.witness(fx)
        if w is None:
            return [CheckResult(check_id, fx.name, tuple(fx.points[0]), "0", False, True,
                                {"control": True, "witness_found": False})]
        pt = w.pop("point")
        return [CheckResult(check_id, fx.name, tuple(pt), format_scalar(w.pop("magnitude")), True, True,
                            {"control": True, "witness_found": True}, witness=w)]
    cells = []
    for pt in fx.points:
        ctx = fx.context(pt)
        magnitude, holds, agrees, info = _evaluate(check, ctx, tol, keys=check.conclusion or None,
                                                     certified=False)
        info = dict(info)
        info["control"] = True
        cells.append((pt, magnitude, holds, agrees, info))
    if not check.control_per_point:
        best = cells[0]
        for c in cells[1:]:
            if c[1] > best[1]:
                best = c
        cells = [best]
    out = []
    for pt, magnitude, holds, agrees, info in cells:
        if not agrees:
            out.append(CheckResult(check_id, fx.name, tuple(pt), format_scalar(magnitude), False, False, info))
        else:
            out.append(CheckResult(check_id, fx.name, tuple(pt), format_scalar(magnitude), holds, True, info))
    return out


def _meta(seed, backend: str, tol: Optional[TolerancePolicy]) -> dict:
    if backend == "rational":
        t = TolerancePolicy.exact()
    else:
        t = tol or TolerancePolicy.relative()
    return {"seed": seed, "backend": backend, "tolerance": t.describe()}


def run_fixtures(fixtures: Sequence[Fixture], checks: Optional[Sequence[str]] = None,
                 tol: Optional[TolerancePolicy] = None, seed=None, require_applicable: bool = True,
                 designated_controls: bool = True) -> Report:
    """Run ``checks`` over already-built fixtures.

    With ``designated_controls`` only fixtures picked by a check's control
    selector serve as counter-fixtures; otherwise every computable fixture
    lacking the hypotheses does (used for single scenes).
    """
    checks = list(checks) if checks is not None else list(CHECK_IDS)
    backends = sorted({fx.backend.name for fx in fixtures})
    report = Report(meta=_meta(seed, backends[0] if len(backends) == 1 else "mixed", tol))
    for cid in checks:
        check = get_check(cid)
        applicable = [fx for fx in fixtures if check.certified(fx)]
        if require_applicable and not applicable:
            raise EmptyApplicableSet(f"no fixture certifies the hypotheses of {cid}")
        for fx in fixtures:
            if check.certified(fx):
                report.results.extend(run_check(cid, fx, tol))
            elif check.conditional and check.computable(fx):
                if designated_controls and (check.control is None or not check.control(fx)):
                    continue
                report.results.extend(run_control(cid, fx, tol))
    return report


def run_suite(recipes: Iterable[FixtureRecipe], checks: Optional[Sequence[str]] = None,
              tol: Optional[TolerancePolicy] = None, seed=None) -> Report:
    return run_fixtures([build_fixture(r) for r in recipes], checks, tol, seed)
