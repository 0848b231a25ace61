"""Acceptance suite: one test per criterion.

Each test prints a PASS/FAIL line (visible with ``-s``); the terminal summary
repeats them after the run.
"""

import json
import time
from fractions import Fraction

import pytest

from metalgeom import connections as cn
from metalgeom import kernel as kr
from metalgeom.cli import main
from metalgeom.fields import parse_array
from metalgeom.fixtures import Fixture, build_fixture, default_recipes, recipe
from metalgeom.kernel import MetallicParams
from metalgeom.numeric import RATIONAL, format_scalar, residual_magnitude
from metalgeom.scene import dumps_scene, load_scene
from metalgeom.verifier import CONDITIONAL, run_check, run_fixtures, run_suite

UNCONDITIONAL_SET = ["CONJ_INVOLUTION", "GEN_CONJ_INVOLUTION", "GD6_GD7", "GD8", "TWIN_PROPS", "MLIKE_PROP8",
                     "MLIKE_PROP10", "DUALPROJ_TORSION"]
CONDITIONAL_SET = ["CODAZZI_EQUIV_TORSION", "CODAZZI_PROPAGATES_J", "NJ_VIA_TORSION", "INTEGRABLE_IF_CODAZZI_TF",
                   "TOTALSYM_EQUIV", "PROP3_CHAIN", "PROP4_JCONN", "PROP5_TACHIBANA_DECOMP", "PROP6_PURITY",
                   "THM_LOCALLY_METALLIC", "QUASI_CYCLIC", "GEN_CONJ_INVOLUTION", "GEN_CONJ_JCONN_IFF",
                   "GEN_CONJ_EQUAL", "GEN_CONJ_OF_JCONJ", "DUALPROJ_CODAZZI", "MLIKE_PROP9", "MLIKE_NABLAJSTAR",
                   "MLIKE_PARALLEL_NOTE", "MLIKE_THEOREM"]


def _line(n, ok, detail):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


@pytest.fixture(scope="module")
def exact_fixtures():
    return [build_fixture(r) for r in default_recipes("rational")]


@pytest.fixture(scope="module")
def exact_report(exact_fixtures):
    return run_fixtures(exact_fixtures, seed=0)


def _cells(report, checks):
    return [r for r in report.results if r.check in checks and not r.expected_fail]


@pytest.mark.criterion(1, "unconditional identities: >= 100 exact cells, literal zeros, < 10 s")
def test_unconditional_identities():
    start = time.perf_counter()
    rs = [r for r in default_recipes("rational") if (r.p, r.q) == (1, 6)]
    report = run_suite(rs, UNCONDITIONAL_SET, seed=0)
    elapsed = time.perf_counter() - start
    cells = _cells(report, UNCONDITIONAL_SET)
    covered = {r.check for r in cells}
    ok = (len(cells) >= 100 and all(r.residual == "0" and r.passed for r in cells)
          and covered == set(UNCONDITIONAL_SET) and elapsed < 10)
    assert _line(1, ok, f"{len(cells)} cells over {len(covered)} checks in {elapsed:.1f}s")


@pytest.mark.criterion(2, "conditional theorems: literal zeros exact, <= 1e-9 relative golden float")
def test_conditional_theorems(exact_report):
    exact = _cells(exact_report, CONDITIONAL_SET)
    exact_ok = (all(r.passed and r.residual == "0" for r in exact)
                and {r.check for r in exact} == set(CONDITIONAL_SET))
    golden = [r for r in default_recipes("float") if (r.p, r.q) == (1, 1)]
    float_report = run_suite(golden, CONDITIONAL_SET, seed=0)
    floats = _cells(float_report, CONDITIONAL_SET)
    float_ok = (all(r.passed for r in floats) and {r.check for r in floats} == set(CONDITIONAL_SET)
                and float_report.meta["tolerance"] == "relative:1e-09")
    worst = max(float(r.residual) for r in floats)
    assert _line(2, exact_ok and float_ok,
                 f"{len(exact)} exact cells, {len(floats)} golden cells, worst float residual {worst:.2e}")


@pytest.mark.criterion(3, "non-involutive J-conjugation witness (0, 1/4); JJ_TRIVIAL on every p = 0 fixture")
def test_noninvolutivity_witness(exact_fixtures):
    n = 2
    fx = Fixture(name="shear_witness", dim=n, params=MetallicParams(Fraction(1), Fraction(6)), backend=RATIONAL,
                 g=parse_array([["1", "0"], ["0", "1"]], n), J=parse_array([["3", "0"], ["x1", "-2"]], n),
                 conn=None, tau=None, points=((Fraction(0), Fraction(0)), (Fraction(2), Fraction(-1))),
                 flags=frozenset({"Metallic"}))
    # direct computation at every point, then the registered witness
    direct = []
    for ctx in fx.contexts():
        twice = cn.j_conjugate(cn.j_conjugate(ctx.conn, ctx.J, ctx.params), ctx.J, ctx.params)
        direct.append([format_scalar(v) for v in (twice - ctx.conn)[:, 0, 0]])
    w = [r.witness for r in run_check("NONINVOLUTIVE_JCONJ", fx) if r.witness][0]
    witness_ok = all(d == ["0", "1/4"] for d in direct) and w["direction"] == [1, 1] and w["vector"] == ["0", "1/4"]
    p0 = [f for f in exact_fixtures if f.params.p == 0 and "Metallic" in f.flags]
    jj = [r for f in p0 for r in run_check("JJ_TRIVIAL", f)]
    jj_ok = bool(p0) and all(r.passed and r.residual == "0" for r in jj)
    assert _line(3, witness_ok and jj_ok, f"witness {w['vector']}; JJ_TRIVIAL exact on {len(p0)} p=0 fixtures")


@pytest.mark.criterion(4, "contact fixture: N_J(d1, d2) = (0, 0, 25) at every sample point")
def test_nonintegrability_witness():
    seen = []
    for seed in range(5):
        fx = build_fixture(recipe("contact_nonintegrable", seed, 3, 1, 6))
        for ctx in fx.contexts():
            seen.append([format_scalar(v) for v in ctx.nijenhuis[:, 0, 1]])
    p, q = 1, 6
    ok = seen and all(v == ["0", "0", str(p * p + 4 * q)] for v in seen)
    assert _line(4, ok, f"{len(seen)} points over 5 seeds, all (0, 0, 25)")


@pytest.mark.criterion(5, "Tachibana/Levi-Civita equivalence: >= 10 parallel and >= 10 generic pure fixtures")
def test_tachibana_equivalence(exact_fixtures):
    parallel = [f for f in exact_fixtures if "ParallelJ_LC" in f.flags and "Pure" in f.flags]
    generic = [f for f in exact_fixtures
               if f.generic_points and "Pure" in f.flags and "ParallelJ_LC" not in f.flags]
    zero_ok = all(residual_magnitude(ctx.tachibana(require_purity=True)) == 0
                  and residual_magnitude(kr.covderiv_endo(ctx.lc, ctx.J)) == 0
                  for f in parallel for ctx in f.contexts())
    nonzero_ok = all(residual_magnitude(ctx.tachibana(require_purity=True)) != 0
                     and residual_magnitude(kr.covderiv_endo(ctx.lc, ctx.J)) != 0
                     for f in generic for ctx in f.contexts())
    points = sum(len(f.points) for f in parallel + generic)
    ok = len(parallel) >= 10 and len(generic) >= 10 and zero_ok and nonzero_ok
    assert _line(5, ok, f"{len(parallel)} parallel, {len(generic)} generic fixtures, {points} points agree")


@pytest.mark.criterion(6, "negative controls: every conditional check has an expectedFail counter-fixture")
def test_negative_controls(exact_report):
    outcomes = {cid: {"pass": 0, "fail": 0, "expectedFail": 0} for cid in CONDITIONAL}
    for r in exact_report.results:
        if r.check in outcomes:
            outcomes[r.check][r.outcome] += 1
    missing = [cid for cid, c in outcomes.items() if c["expectedFail"] < 1]
    failing = [cid for cid, c in outcomes.items() if c["fail"]]
    star = [r for r in exact_report.results if r.check == "STAR_EQUALS_NABLA_ON_J" and not r.expected_fail]
    star_ok = bool(star) and all(r.passed and "connections_equal" in r.info for r in star)
    ok = not missing and not failing and star_ok and exact_report.summary["fail"] == 0
    assert _line(6, ok, f"{len(outcomes)} conditional checks; missing controls {missing}; "
                        f"unexpected failures {failing}; STAR_EQUALS logged on {len(star)} cells")


@pytest.mark.criterion(7, "determinism and lossless scene round-trip")
def test_determinism_and_round_trip(tmp_path, capsys):
    rs = [r for r in default_recipes("rational", seed=5) if (r.p, r.q) == (3, 4)]
    a = run_fixtures([build_fixture(r) for r in rs], seed=5, require_applicable=False).dumps()
    b = run_fixtures([build_fixture(r) for r in rs], seed=5, require_applicable=False).dumps()
    reports_ok = a == b
    dirs = [tmp_path / "a", tmp_path / "b"]
    for d in dirs:
        assert main(["fixtures", "--seed", "7", "--dim", "3", "--count", "2", "--out", str(d)]) == 0
    files = sorted(p.name for p in dirs[0].iterdir())
    files_ok = files == sorted(p.name for p in dirs[1].iterdir()) and all(
        (dirs[0] / f).read_bytes() == (dirs[1] / f).read_bytes() for f in files)
    trip_ok = all(dumps_scene(load_scene(dirs[0] / f)) == (dirs[0] / f).read_text(encoding="utf-8") for f in files)
    reports = []
    for d in dirs:
        assert main(["check", str(d / files[0]), "--report", str(d / "report.json")]) == 0
        reports.append((d / "report.json").read_bytes())
    capsys.readouterr()
    ok = reports_ok and files_ok and trip_ok and reports[0] == reports[1] and json.loads(reports[0])
    assert _line(7, bool(ok), f"{len(files)} scene files identical and round-trip; suite and CLI reports identical")
