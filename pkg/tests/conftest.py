from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from metalgeom.fields import Jet1, jet_at, parse_array
from metalgeom.numeric import RATIONAL


def fr(rows) -> np.ndarray:
    """Object array of Fractions from nested ints/strings."""
    return RATIONAL.array(np.vectorize(Fraction, otypes=[object])(np.asarray(rows, dtype=object)))


def jet(texts, point) -> Jet1:
    """Jet of an expression array (nested strings) at an integer or rational point."""
    return jet_at(parse_array(texts, len(point)), [Fraction(c) for c in point])


def const_jet(rows) -> Jet1:
    value = fr(rows)
    return Jet1.constant(value, value.shape[0])


rationals = st.fractions(min_value=-4, max_value=4, max_denominator=5)
nonzero = rationals.filter(lambda v: v != 0)


@st.composite
def rational_arrays(draw, shape):
    data = [draw(rationals) for _ in range(int(np.prod(shape)))]
    out = np.empty(len(data), dtype=object)
    out[:] = data
    return out.reshape(shape)


@st.composite
def unit_lower(draw, n):
    """Unitriangular matrix: always invertible."""
    L = RATIONAL.identity(n)
    for i in range(n):
        for j in range(i):
            L[i, j] = draw(rationals)
    return L


@st.composite
def metrics(draw, n):
    """Symmetric invertible ``L D L^T`` with nonzero diagonal ``D``."""
    L = draw(unit_lower(n))
    D = RATIONAL.zeros((n, n))
    for i in range(n):
        D[i, i] = draw(nonzero)
    return L @ D @ L.T


@st.composite
def jets(draw, shape, n):
    return Jet1(draw(rational_arrays(shape)), draw(rational_arrays(tuple(shape) + (n,))))


@st.composite
def metric_jets(draw, n):
    g = draw(metrics(n))
    dg = draw(rational_arrays((n, n, n)))
    dg = (dg + dg.transpose(1, 0, 2)) / 2
    return Jet1(g, dg)


# -- acceptance reporting ----------------------------------------------------------
# Tests marked ``criterion(n, title)`` get one PASS/FAIL line in the terminal summary.

import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    n, title = mark.args
    ok = rep.passed
    if rep.when == "setup" and ok:
        return
    prev = _CRITERIA.get(n, (title, True))
    _CRITERIA[n] = (title, prev[1] and ok)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, ok = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}")
