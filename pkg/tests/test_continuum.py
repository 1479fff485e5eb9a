import math

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bm_grade_reference
from restart_grade.continuum import (
    BmProblem,
    agreement,
    bm_grade,
    bm_grade_quadrature,
    bm_gradient_sq,
    bm_h,
    default_grid,
    lattice_ratio,
)
from restart_grade.errors import ConfigError, DomainTooSmallError


def test_h_examples():
    assert bm_h(1.0, BmProblem(2, 1.0)) == 0.0
    assert bm_h(3.0, BmProblem(1, 1.0)) == 2.0
    assert bm_h(2.0, BmProblem(3, 1.0)) == 0.5


def test_gradient_examples():
    assert bm_gradient_sq(7.0, BmProblem(1, 1.0)) == 1.0
    assert bm_gradient_sq(10.0, BmProblem(2, 1.0)) == pytest.approx(0.01)
    assert bm_gradient_sq(2.0, BmProblem(3, 1.0)) == 0.0625


def test_grade_examples():
    assert bm_grade(3.0, BmProblem(1, 1.0)) == 4.0
    assert bm_grade(1.0, BmProblem(2, 1.0)) == 0.0
    assert bm_grade(2.0, BmProblem(3, 1.0)) == pytest.approx(5 / 3, rel=1e-15)
    assert bm_grade(5.0, BmProblem(1, 0.0)) == 25.0


def test_problem_validation():
    with pytest.raises(ConfigError):
        BmProblem(2, 0.0)
    with pytest.raises(ConfigError):
        BmProblem(0, 1.0)
    with pytest.raises(DomainTooSmallError):
        bm_grade(0.5, BmProblem(3, 1.0))


@pytest.mark.parametrize("d", [2, 3, 4])
def test_closed_form_matches_symbolic_integral(d):
    # F(t) = int_0^t 2s / g(s) ds done symbolically, then mapped back to |x|
    s, t, r0, r = sp.symbols("s t r0 r", positive=True)
    if d == 2:
        g = sp.exp(-2 * s) / r0**2
        h = sp.log(r / r0)
    else:
        g = (d - 2) ** 2 * (r0 ** (2 - d) - s) ** sp.Rational(2 * d - 2, d - 2)
        h = r0 ** (2 - d) - r ** (2 - d)
    F = sp.integrate(2 * s / g, (s, 0, t))
    for rv, r0v in [(3.0, 1.0), (1.7, 0.5), (9.0, 2.0)]:
        val = float(F.subs(t, h).subs({r: rv, r0: r0v}).evalf(30))
        assert bm_grade(rv, BmProblem(d, r0v)) == pytest.approx(val, rel=1e-12)


def test_agreement_on_grid():
    assert len(default_grid()) == 30
    rows = agreement()
    assert rows[:, -1].max() <= 1e-10


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.floats(0.1, 10), st.floats(1.0, 6.0))
def test_closed_form_properties(d, r0, ratio):
    p = BmProblem(d, r0)
    r = r0 * ratio
    g = bm_grade(r, p)
    assert g >= 0
    assert bm_grade(r0, p) == 0.0
    assert g == pytest.approx(bm_grade_reference(d, r0, r), rel=1e-9, abs=1e-12 * r0 * r0)
    assert bm_grade_quadrature(r, p) == pytest.approx(g, rel=1e-10, abs=1e-14 * r0 * r0)
    assert bm_grade(r * 1.01, p) > g


def test_near_boundary_is_accurate():
    # rearranged forms keep relative accuracy where the naive ones cancel
    p = BmProblem(3, 1.0)
    r = 1 + 1e-6
    assert bm_grade(r, p) == pytest.approx(1e-12, rel=1e-5)
    assert bm_grade_quadrature(r, p) == pytest.approx(bm_grade(r, p), rel=1e-10)


def test_lattice_limit_1d():
    for n in range(1, 51):
        g = n * (n + 1)
        assert abs(g / n**2 - 1) <= 1 / n + 1e-15


def test_time_scale_ratio():
    # (1/2) gamma_Z2 / gamma_BM with exact planar grades at |x| = 8 and 16
    r8 = lattice_ratio(455.5642475872461, 8)
    r16 = lattice_ratio(2113.0597371886774, 16)
    assert 1 < r16 < r8
    assert math.isfinite(r8)
