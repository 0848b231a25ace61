from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from metalgeom import kernel as kr
from metalgeom.fields import evaluate, expr_matmul, parse_array, text_array
from metalgeom.fixtures import (EXACT_PARAMS, FAMILIES, FlagAuditError, IrrationalRootOnExactBackend, audit_fixture,
                                build_fixture, default_recipes, recipe)
from metalgeom.numeric import RATIONAL, mat_inverse, residual_magnitude


def test_flat_parallel_model_structures():
    fx = build_fixture(recipe("flat_parallel", 0, 2, 1, 6))
    ctx = fx.context(fx.points[0])
    assert sorted(np.diag(ctx.J.value)) == [-2, 3]
    assert ctx.g.value[0, 1] == 0 and ctx.g.value[0, 0] != 0
    fx = build_fixture(recipe("flat_parallel", 0, 2, 0, 4))
    assert sorted(np.diag(fx.context(fx.points[0]).J.value)) == [-2, 2]


def test_golden_float_model():
    fx = build_fixture(recipe("flat_parallel", 1, 3, 1, 1, backend="float"))
    ev = np.linalg.eigvals(fx.context(fx.points[0]).J.value.astype(float))
    sigma = (1 + 5 ** 0.5) / 2
    assert all(min(abs(e - sigma), abs(e - (1 - sigma))) < 1e-9 for e in ev)
    assert any(abs(e - sigma) < 1e-9 for e in ev) and any(abs(e - (1 - sigma)) < 1e-9 for e in ev)


def test_irrational_roots_need_float_backend():
    with pytest.raises(IrrationalRootOnExactBackend):
        build_fixture(recipe("flat_parallel", 0, 2, 1, 1))


def test_conjugation_by_shear():
    A = parse_array([["1", "x1"], ["0", "1"]], 2)
    Ainv = parse_array([["1", "-x1"], ["0", "1"]], 2)
    J0 = parse_array([["3", "0"], ["0", "-2"]], 2)
    J = expr_matmul(expr_matmul(A, J0), Ainv)
    expected = parse_array([["3", "-5*x1"], ["0", "-2"]], 2)
    params = kr.MetallicParams(Fraction(1), Fraction(6))
    for pt in [(0, 0), (2, -1), (Fraction(1, 3), 5)]:
        pt = tuple(map(Fraction, pt))
        val = np.vectorize(lambda e: evaluate(e, pt), otypes=[object])
        assert np.array_equal(val(J), val(expected))
        assert residual_magnitude(kr.metallic_residual(val(J), params)) == 0


def test_constant_frame_reduces_to_flat_model():
    fx = build_fixture(recipe("conjugated_metallic", 3, 2, 1, 6, a_degree=0))
    for ctx in fx.contexts():
        assert not any(ctx.J.grad.flat) and not any(ctx.g.grad.flat)


def test_pure_conjugated_fixture_is_pure():
    fx = build_fixture(recipe("conjugated_metallic", 5, 3, 3, 4))
    for ctx in fx.contexts():
        assert residual_magnitude(kr.purity_residual(ctx.g.value, ctx.J.value)) == 0
        assert residual_magnitude(kr.metallic_residual(ctx.J.value, ctx.params)) == 0


@pytest.mark.parametrize("pq, expected", [((1, 6), 25), ((0, 4), 16)])
def test_contact_fixture_nijenhuis(pq, expected):
    fx = build_fixture(recipe("contact_nonintegrable", 0, 3, *pq))
    for ctx in fx.contexts():
        assert list(ctx.nijenhuis[:, 0, 1]) == [0, 0, expected]
        assert residual_magnitude(kr.metallic_residual(ctx.J.value, ctx.params)) == 0


def test_metallic_like_fixture():
    fx = build_fixture(recipe("metallic_like", 2, 2, 1, 6, parallel=True))
    assert "Pure" not in fx.flags
    for ctx in fx.contexts():
        assert residual_magnitude(kr.purity_residual(ctx.g.value, ctx.J.value)) != 0
        assert residual_magnitude(ctx.nJ) == 0
        assert residual_magnitude(kr.covderiv_endo(ctx.conn, ctx.Jstar)) == 0
        assert residual_magnitude(ctx.torsion) == 0
        p, q = ctx.params.p, ctx.params.q
        Js = ctx.Jstar.value
        assert residual_magnitude(mat_inverse(Js) - (Js / q - (p / q) * RATIONAL.identity(2))) == 0


def test_statistical_fixture_is_statistical():
    fx = build_fixture(recipe("statistical", 1, 3, 5, 6, holonomic=True))
    for ctx in fx.contexts():
        assert residual_magnitude(ctx.torsion) == 0
        C = ctx.C
        assert residual_magnitude(C - C.transpose(2, 1, 0)) == 0


@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_every_family_builds_deterministically_and_passes_audit(family):
    dim = 3 if family == "contact_nonintegrable" else 2
    r = recipe(family, 11, dim, 1, 6)
    a, b = build_fixture(r), build_fixture(r)
    assert a.name == b.name == r.name
    assert text_array(a.g) == text_array(b.g) and text_array(a.J) == text_array(b.J)
    assert a.points == b.points and a.flags == b.flags
    audit_fixture(a)


def test_seed_changes_the_draw():
    a = build_fixture(recipe("conjugated_metallic", 1, 2, 1, 6))
    b = build_fixture(recipe("conjugated_metallic", 2, 2, 1, 6))
    assert text_array(a.g) != text_array(b.g) or a.points != b.points


def test_audit_rejects_false_flags():
    fx = build_fixture(recipe("conjugated_metallic", 0, 2, 1, 6, purity=False))
    with pytest.raises(FlagAuditError, match="Pure"):
        audit_fixture(replace(fx, flags=fx.flags | {"Pure"}))
    with pytest.raises(FlagAuditError, match="unknown"):
        audit_fixture(replace(fx, flags=fx.flags | {"Shiny"}))
    contact = build_fixture(recipe("contact_nonintegrable", 0, 3, 1, 6))
    with pytest.raises(FlagAuditError, match="CodazziJ"):
        audit_fixture(replace(contact, flags=contact.flags | {"CodazziJ"}))


def test_default_inventory_shape():
    rs = default_recipes("rational")
    assert len(rs) == len(EXACT_PARAMS) * (2 * 11 + 2)
    assert len({r.name for r in rs}) == len(rs)
    assert all(r.backend == "float" for r in default_recipes("float"))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(EXACT_PARAMS), st.sampled_from([2, 3]))
def test_generated_pure_pairs_are_metallic_and_pure(seed, pq, dim):
    fx = build_fixture(recipe("conjugated_metallic", seed, dim, *pq))
    audit_fixture(fx)
    assert {"Pure", "Metallic"} <= fx.flags
