from fractions import Fraction

import numpy as np
from hypothesis import given, settings, strategies as st

from conftest import const_jet, fr, jet, jets, metric_jets, metrics, rational_arrays
from metalgeom import connections as cn
from metalgeom import kernel as kr
from metalgeom.numeric import RATIONAL, residual_magnitude

P16 = kr.MetallicParams(Fraction(1), Fraction(6))


def _only(n, entries):
    out = RATIONAL.zeros((n, n, n))
    for idx, v in entries.items():
        out[idx] = Fraction(v)
    return out


def test_levi_civita_values():
    assert not any(cn.levi_civita(const_jet([[2, 1], [1, 3]])).flat)
    g = jet([["1 + x1^2", "0"], ["0", "1"]], (1, 0))
    assert np.array_equal(cn.levi_civita(g), _only(2, {(0, 0, 0): "1/2"}))


def test_metric_conjugate_values():
    g = jet([["1 + x1^2", "0"], ["0", "1"]], (1, 0))
    assert np.array_equal(cn.metric_conjugate(cn.zero_connection(2, g.value), g), _only(2, {(0, 0, 0): 1}))
    lc = cn.levi_civita(g)
    assert np.array_equal(cn.metric_conjugate(lc, g), lc)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 3).flatmap(lambda n: st.tuples(metric_jets(n), rational_arrays((n, n, n)))))
def test_metric_conjugation_is_involutive(args):
    g, conn = args
    assert np.array_equal(cn.metric_conjugate(cn.metric_conjugate(conn, g), g), conn)


@settings(max_examples=30, deadline=None)
@given(metric_jets(2), rational_arrays((2, 2, 2)))
def test_conjugate_pair_satisfies_duality(g, conn):
    # Z g(X, Y) = g(nabla_Z X, Y) + g(X, nabla*_Z Y) on coordinate fields
    star = cn.metric_conjugate(conn, g)
    lhs = g.grad
    rhs = np.einsum("mzx,my->xyz", conn, g.value) + np.einsum("mzy,xm->xyz", star, g.value)
    assert np.array_equal(lhs, rhs)


def test_j_conjugate_values():
    J = jet([["3", "0"], ["x1", "-2"]], (2, 5))
    Jc = cn.j_conjugate(cn.zero_connection(2, J.value), J, P16)
    assert np.array_equal(Jc, _only(2, {(1, 0, 0): "-1/2"}))
    Jk = const_jet([[3, 0], [0, -2]])
    assert not any(cn.j_conjugate(cn.zero_connection(2, Jk.value), Jk, P16).flat)


def test_double_j_conjugate_witness():
    J = jet([["3", "0"], ["x1", "-2"]], (0, 0))
    once = cn.j_conjugate(cn.zero_connection(2, J.value), J, P16)
    twice = cn.j_conjugate(once, J, P16)
    assert list(twice[:, 0, 0]) == [0, Fraction(1, 4)]
    # the same vector from p J^-2 ((nabla_1 J) d_1)
    Ji = kr.metallic_inverse(J.value, P16)
    nJ = kr.covderiv_endo(cn.zero_connection(2, J.value), J)
    assert np.array_equal(twice[:, 0, 0], P16.p * (Ji @ Ji @ nJ[:, 0, 0]))


@settings(max_examples=30, deadline=None)
@given(rational_arrays((2, 2, 2)), st.fractions(-3, 3, max_denominator=3), st.fractions(-3, 3, max_denominator=3))
def test_double_j_conjugate_trivial_when_p_zero(conn, a, b):
    # J = [[2, a*x1 + b*x2], [0, -2]] squares to 4I
    texts = [["2", f"({a})*x1 + ({b})*x2"], ["0", "-2"]]
    J = jet(texts, (1, -1))
    params = kr.MetallicParams(Fraction(0), Fraction(4))
    assert residual_magnitude(kr.metallic_residual(J.value, params)) == 0
    assert np.array_equal(cn.j_conjugate(cn.j_conjugate(conn, J, params), J, params), conn)


def test_generalized_conjugate_reductions():
    g = jet([["1 + x1^2", "x2"], ["x2", "3"]], (1, 1))
    conn = fr([[[1, 0], [2, 1]], [[0, "1/2"], [1, -1]]])
    assert np.array_equal(cn.generalized_conjugate(conn, g, RATIONAL.zeros(2)), cn.metric_conjugate(conn, g))
    lc = cn.levi_civita(g)
    tau = fr([2, -3])
    expected = lc + np.einsum("i,kl->kil", tau, RATIONAL.identity(2))
    assert np.array_equal(cn.generalized_conjugate(lc, g, tau), expected)


@settings(max_examples=30, deadline=None)
@given(metric_jets(3), rational_arrays((3, 3, 3)), rational_arrays((3,)))
def test_generalized_conjugation_is_involutive(g, conn, tau):
    once = cn.generalized_conjugate(conn, g, tau)
    assert np.array_equal(cn.generalized_conjugate(once, g, tau), conn)


def test_dual_projective_values():
    conn = fr([[[1, 0], [2, 1]], [[0, "1/2"], [1, -1]]])
    g = fr([[1, 0], [0, 1]])
    assert np.array_equal(cn.dual_projective(conn, g, RATIONAL.zeros(2)), conn)
    out = cn.dual_projective(RATIONAL.zeros((2, 2, 2)), g, fr([1, 0]))
    assert np.array_equal(out, _only(2, {(0, 0, 0): -1, (0, 1, 1): -1}))


@settings(max_examples=40, deadline=None)
@given(metrics(3), rational_arrays((3, 3, 3)), rational_arrays((3,)))
def test_dual_projective_preserves_torsion(g, conn, tau):
    assert np.array_equal(kr.torsion(cn.dual_projective(conn, g, tau)), kr.torsion(conn))


def test_raise_index_values():
    assert np.array_equal(cn.raise_index(RATIONAL.identity(2), fr([3, -1])), fr([3, -1]))
    assert np.array_equal(cn.raise_index(fr([[1, 0], [0, 4]]), fr([2, 8])), fr([2, 2]))


@settings(max_examples=40, deadline=None)
@given(metrics(3), rational_arrays((3,)))
def test_raised_index_lowers_back(g, tau):
    assert np.array_equal(g @ cn.raise_index(g, tau), tau)
