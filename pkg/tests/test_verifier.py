from dataclasses import replace
from fractions import Fraction

import pytest

from metalgeom.fields import parse_array
from metalgeom.fixtures import Fixture, build_fixture, recipe
from metalgeom.kernel import MetallicParams
from metalgeom.numeric import RATIONAL
from metalgeom.verifier import (CHECK_IDS, CONDITIONAL, UNCONDITIONAL, EmptyApplicableSet, HypothesisNotCertified,
                                UnknownCheck, get_check, run_check, run_control, run_fixtures, run_suite)


def _witness_fixture(points=((0, 0), (1, 2), (-2, 1))):
    n = 2
    return Fixture(name="shear_witness", dim=n, params=MetallicParams(Fraction(1), Fraction(6)), backend=RATIONAL,
                   g=parse_array([["1", "0"], ["0", "1"]], n), J=parse_array([["3", "0"], ["x1", "-2"]], n),
                   conn=None, tau=None, points=tuple(tuple(map(Fraction, p)) for p in points),
                   flags=frozenset({"Metallic"}))


def test_registry_partition():
    assert len(set(CHECK_IDS)) == len(CHECK_IDS)
    assert set(UNCONDITIONAL) | set(CONDITIONAL) == set(CHECK_IDS)
    assert not set(UNCONDITIONAL) & set(CONDITIONAL)
    for cid in ["CONJ_INVOLUTION", "GEN_CONJ_INVOLUTION", "GD6_GD7", "MLIKE_PROP8", "MLIKE_PROP10",
                "DUALPROJ_TORSION"]:
        assert cid in UNCONDITIONAL
    with pytest.raises(UnknownCheck):
        get_check("NOT_A_CHECK")


def test_every_conditional_check_names_a_control():
    for cid in CONDITIONAL:
        check = get_check(cid)
        assert check.control is not None or check.params is not None, cid


def test_conj_involution_is_literal_zero():
    fx = build_fixture(recipe("statistical", 4, 3, 1, 6))
    results = run_check("CONJ_INVOLUTION", fx)
    assert len(results) == len(fx.points)
    assert all(r.residual == "0" and r.outcome == "pass" for r in results)


def test_hypotheses_are_enforced():
    fx = build_fixture(recipe("conjugated_metallic", 0, 2, 1, 6, purity=False))
    with pytest.raises(HypothesisNotCertified):
        run_check("GD8", fx)
    p0 = build_fixture(recipe("flat_parallel", 0, 2, 0, 4))
    with pytest.raises(HypothesisNotCertified):
        run_check("NONINVOLUTIVE_JCONJ", p0)


def test_noninvolutive_witness_on_shear_fixture():
    results = run_check("NONINVOLUTIVE_JCONJ", _witness_fixture())
    witness = [r for r in results if r.witness]
    assert len(witness) == 1
    w = witness[0]
    assert w.witness["direction"] == [1, 1]
    assert w.witness["vector"] == ["0", "1/4"]
    assert w.residual == "1/4" and w.outcome == "pass"
    assert all(r.residual == "0" for r in results if not r.witness)


def test_jj_trivial_on_p_zero():
    fx = build_fixture(recipe("conjugated_metallic", 9, 3, 0, 4))
    assert all(r.residual == "0" and r.passed for r in run_check("JJ_TRIVIAL", fx))


def test_empty_applicable_set():
    p0 = [recipe("flat_parallel", 0, 2, 0, 4), recipe("conjugated_metallic", 1, 2, 0, 4)]
    with pytest.raises(EmptyApplicableSet):
        run_suite(p0, ["NONINVOLUTIVE_JCONJ"])


def test_contact_records_nijenhuis_value():
    fx = build_fixture(recipe("contact_nonintegrable", 0, 3, 1, 6))
    for r in run_check("NIJENHUIS_CONTACT", fx):
        assert r.passed and r.info["N12"] == ["0", "0", "25"]


def test_vacuous_control_is_a_failure():
    # a pure fixture stripped of its Pure flag satisfies the conclusion anyway
    fx = build_fixture(recipe("flat_parallel", 0, 2, 1, 6))
    stripped = replace(fx, flags=fx.flags - {"Pure"})
    (r,) = run_control("TWIN_PROPS", stripped)
    assert r.expected_fail and r.passed and r.outcome == "fail"


def test_genuine_control_is_expected_fail():
    fx = build_fixture(recipe("conjugated_metallic", 0, 2, 1, 6, purity=False))
    (r,) = run_control("GD8", fx)
    assert r.outcome == "expectedFail" and r.residual != "0"


def test_nijenhuis_torsion_formula_reports_printed_form():
    fx = build_fixture(recipe("codazzi_triangular", 2, 3, 1, 6, torsion=True))
    results = run_check("NJ_VIA_TORSION", fx)
    assert all(r.passed for r in results)
    assert all("printed_form_residual" in r.info for r in results)


def test_star_equals_logs_stronger_statement():
    fx = build_fixture(recipe("flat_parallel", 0, 2, 1, 6))
    for r in run_check("STAR_EQUALS_NABLA_ON_J", fx):
        assert r.passed
        assert "connections_equal" in r.info


def test_report_counts_and_determinism():
    rs = [recipe("flat_parallel", 1, 2, 1, 6), recipe("conjugated_metallic", 1, 2, 1, 6, purity=False)]
    a = run_suite(rs, ["GD8", "TWIN_PROPS", "CONJ_INVOLUTION"], seed=1)
    b = run_suite(rs, ["GD8", "TWIN_PROPS", "CONJ_INVOLUTION"], seed=1)
    assert a.dumps() == b.dumps()
    s = a.summary
    assert s["fail"] == 0 and s["expectedFail"] == 2 and a.ok
    doc = a.to_json()
    assert doc["meta"] == {"seed": 1, "backend": "rational", "tolerance": "exact"}
    assert set(doc["results"][0]) >= {"check", "fixture", "point", "residual", "pass", "expectedFail"}


def test_nijenhuis_printed_middle_term_does_not_hold():
    # T(X, JY) in the middle term must read J T(X, JY); the uncorrected form leaves a residual
    fx = build_fixture(recipe("parallel_frame", 2, 2, 1, 6))
    results = run_check("NJ_VIA_TORSION", fx)
    assert all(r.passed for r in results)
    assert [r.info["printed_form_residual"] for r in results] == ["120", "175", "40"]


def test_existence_check_control_finds_no_witness_when_p_is_zero():
    fx = build_fixture(recipe("conjugated_metallic", 2, 2, 0, 4))
    (r,) = run_control("NONINVOLUTIVE_JCONJ", fx)
    assert r.outcome == "expectedFail" and r.info["witness_found"] is False
