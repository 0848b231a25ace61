"""Command-line front end.

``metalgeom check SCENE [--tol R] [--report PATH]``
    run the scene's checks; exit 0 when everything passes (expected failures
    of negative controls included), 2 on an unexpected failure, 1 on input error.
``metalgeom eval SCENE --tensor NAME --point c1,c2,...``
    print one derived tensor at a point.
``metalgeom fixtures --seed N --dim D --count K --out DIR``
    write generated scenes.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import kernel as kr
from .fields import ExpressionSyntaxError, PoleAtPoint, UnknownVariable
from .fixtures import (EXACT_PARAMS, FlagAuditError, InadmissibleDraw, IrrationalRootOnExactBackend,
                       build_fixture, recipe)
from .numeric import SingularMatrix, TolerancePolicy, format_scalar, parse_scalar
from .scene import SceneError, dumps_scene, load_scene
from .verifier import CHECK_IDS, HypothesisNotCertified, get_check, run_fixtures


class UnknownTensor(KeyError):
    pass


EXIT_OK, EXIT_INPUT, EXIT_FAIL = 0, 1, 2


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def resolve_scene(path: str) -> Path:
    """A scene path, falling back to the scenes bundled with the package."""
    p = Path(path)
    if p.exists():
        return p
    bundled = resources.files("metalgeom") / "scenes" / p.name
    if bundled.is_file():
        return Path(str(bundled))
    return p


def _input_errors():
    return (SceneError, ExpressionSyntaxError, UnknownVariable, PoleAtPoint, SingularMatrix, FlagAuditError,
            HypothesisNotCertified, IrrationalRootOnExactBackend, kr.PurityViolation, kr.TwinNotSymmetric, kr.ZeroQ, OSError)


def _describe(exc: Exception) -> str:
    kinds = {
        ExpressionSyntaxError: "parse error",
        UnknownVariable: "parse error",
        PoleAtPoint: "pole at point",
        SingularMatrix: "degenerate metric",
        FlagAuditError: "uncertified flag",
        HypothesisNotCertified: "hypothesis not certified",
        kr.PurityViolation: "purity violated",
    }
    for cls, label in kinds.items():
        if isinstance(exc, cls):
            return f"{label}: {exc}"
    return f"{type(exc).__name__}: {exc}"


# ---------------------------------------------------------------------------
# check


def cmd_check(scene_path: str, tol: Optional[float] = None, report_path: Optional[str] = None) -> int:
    try:
        fx = load_scene(resolve_scene(scene_path))
        checks = list(fx.checks) or applicable_checks(fx)
        for cid in checks:
            check = get_check(cid)
            missing = check.requires - fx.flags
            if missing:
                raise HypothesisNotCertified(f"{cid} needs flags {sorted(missing)}")
        policy = TolerancePolicy.relative(tol) if tol is not None else None
        report = run_fixtures([fx], checks, policy, seed=None, require_applicable=False,
                              designated_controls=False)
    except _input_errors() as exc:
        _err(_describe(exc))
        return EXIT_INPUT
    text = report.dumps()
    if report_path:
        Path(report_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    s = report.summary
    print(f"{fx.name}: {s['pass']} pass, {s['fail']} fail, {s['expectedFail']} expected-fail", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# eval


TENSORS: Dict[str, tuple] = {
    # name: (function, legend)
    "twin": (lambda c: c.G.value, "G[i, j] = g(J d_i, d_j)"),
    "j_inverse": (lambda c: c.Jinv.value, "J^-1[i, j]: row i, column j"),
    "j_adjoint": (lambda c: c.Jstar.value, "J*[i, j] = (g^-1 J^T g)[i, j]: row i, column j"),
    "nijenhuis": (lambda c: c.nijenhuis, "N[k; i, j] = k-th component of N(d_i, d_j)"),
    "torsion": (lambda c: c.torsion, "T[k; i, j] = k-th component of T(d_i, d_j)"),
    "cov_g": (lambda c: c.C, "C[x, y; z] = (nabla_z g)(d_x, d_y)"),
    "cov_G": (lambda c: c.Gam, "Gamma[x, y; z] = (nabla_z G)(d_x, d_y)"),
    "tachibana": (lambda c: c.tachibana(require_purity=True), "Phi[x, y, z] = (Phi_J g)(d_x, d_y, d_z)"),
    "levi_civita": (lambda c: c.lc, "Gamma[k; i, j] = k-th component of nabla_{d_i} d_j"),
    "conj_g": (lambda c: c.star, "Gamma*[k; i, j] = k-th component of nabla*_{d_i} d_j"),
    "conj_G": (lambda c: c.dagger, "Gamma+[k; i, j] = k-th component of nabla+_{d_i} d_j (G-conjugate)"),
    "conj_J": (lambda c: c.jconj, "Gamma^J[k; i, j] = k-th component of J^-1 nabla_{d_i}(J d_j)"),
    "gen_conj": (lambda c: c.gen_star, "Gamma*'[k; i, j] = generalized g-conjugate by tau"),
    "dual_proj": (lambda c: c.dual_proj, "Gamma'[k; i, j] = Gamma[k; i, j] - g_ij tau^k"),
}


def _row_major(T: np.ndarray) -> str:
    if T.ndim == 1:
        return ", ".join(format_scalar(v) for v in T)
    return " / ".join(_row_major(row) for row in T)


def format_tensor(T: np.ndarray) -> List[str]:
    """Row-major text, rows separated by " / "; 3-arrays get one line per first index."""
    T = np.asarray(T, dtype=object)
    if T.ndim < 3:
        return [_row_major(T)]
    return [f"[{k + 1}; *, *] {_row_major(T[k])}" for k in range(T.shape[0])]


def cmd_eval(scene_path: str, tensor: str, point: str) -> int:
    try:
        if tensor not in TENSORS:
            raise UnknownTensor(tensor)
        fx = load_scene(resolve_scene(scene_path))
        coords = [parse_scalar(c) for c in point.split(",")]
        if len(coords) != fx.dim:
            raise SceneError(f"point needs {fx.dim} coordinates")
        ctx = fx.context(coords)
        fn, legend = TENSORS[tensor]
        value = fn(ctx)
    except UnknownTensor:
        _err(f"unknown tensor {tensor!r}; choose from {', '.join(TENSORS)}")
        return EXIT_INPUT
    except (ValueError, ZeroDivisionError) + _input_errors() as exc:
        _err(_describe(exc))
        return EXIT_INPUT
    print(f"{tensor} at ({', '.join(format_scalar(c) for c in ctx.point)})")
    print(f"legend: {legend}; indices are 1-based")
    for line in format_tensor(value):
        print(line)
    return EXIT_OK


# ---------------------------------------------------------------------------
# fixtures


def fixture_inventory(dim: int) -> List[tuple]:
    """(family, options) pairs emitted by the ``fixtures`` command."""
    inv = [
        ("flat_parallel", {}),
        ("conjugated_metallic", {}),
        ("conjugated_metallic", {"purity": False}),
        ("parallel_frame", {}),
        ("locally_metallic", {}),
        ("statistical", {}),
        ("statistical", {"holonomic": True}),
        ("codazzi_triangular", {}),
        ("codazzi_triangular", {"torsion": True}),
        ("metallic_like", {"parallel": True}),
        ("metallic_like", {}),
    ]
    if dim == 3:
        inv.append(("contact_nonintegrable", {}))
    return inv


def applicable_checks(fx) -> List[str]:
    return [cid for cid in CHECK_IDS if get_check(cid).certified(fx)]


def cmd_fixtures(seed: int, dim: int, count: int, out_dir: str) -> int:
    if dim < 2:
        _err("fixtures need dimension >= 2")
        return EXIT_INPUT
    if count < 0:
        _err("count must be non-negative")
        return EXIT_INPUT
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for family, options in fixture_inventory(dim):
            for k in range(count):
                p, q = EXACT_PARAMS[k % len(EXACT_PARAMS)]
                fx = build_fixture(recipe(family, seed + k, dim, p, q, **options))
                (out / f"{fx.name}.json").write_text(dumps_scene(fx, applicable_checks(fx)), encoding="utf-8")
    except (OSError, InadmissibleDraw) as exc:
        _err(str(exc))
        return EXIT_INPUT
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="metalgeom", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    c = sub.add_parser("check", help="run the checks listed in a scene")
    c.add_argument("scene")
    c.add_argument("--tol", type=float, default=None, help="relative tolerance for float scenes")
    c.add_argument("--report", default=None, help="write the JSON report here instead of stdout")
    e = sub.add_parser("eval", help="print a derived tensor at a point")
    e.add_argument("scene")
    e.add_argument("--tensor", required=True, help=", ".join(TENSORS))
    e.add_argument("--point", required=True, help="comma-separated coordinates, e.g. 0,1/2")
    f = sub.add_parser("fixtures", help="write generated scenes")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--dim", type=int, default=2)
    f.add_argument("--count", type=int, default=1)
    f.add_argument("--out", required=True)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "check":
        return cmd_check(args.scene, args.tol, args.report)
    if args.command == "eval":
        return cmd_eval(args.scene, args.tensor, args.point)
    return cmd_fixtures(args.seed, args.dim, args.count, args.out)


if __name__ == "__main__":
    sys.exit(main())
