import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import grade_1d, grade_bruteforce
from restart_grade.errors import BracketError
from restart_grade.grade import (
    RestartProblem,
    _grow_bracket,
    bellman_residual,
    evaluate_policy,
    extract_strategy,
    restart_value_iteration,
    solve_grade,
    threshold_gap,
)
from restart_grade.lattice import LatticePoint


def test_value_iteration_hand_examples(backend):
    p = RestartProblem(1, (1,), L=6)
    W = restart_value_iteration(p, 2.0, backend)
    assert W[(0,)] == 0.0
    assert W[(1,)] == pytest.approx(2.0, abs=1e-9)
    assert W[(2,)] == pytest.approx(3.0, abs=1e-9)
    W0 = restart_value_iteration(p, 0.0, backend)
    assert W0[(1,)] == pytest.approx(1.0, abs=1e-12)


def test_value_iteration_rejects_negative_g():
    with pytest.raises(ValueError):
        restart_value_iteration(RestartProblem(1, (1,)), -1.0)


def test_value_iteration_fixed_point(backend):
    p = RestartProblem(2, (3, 1), L=6)
    g = 30.0
    W = restart_value_iteration(p, g, backend)
    assert W[(0, 0)] == 0.0
    assert np.all(W.values >= 0)
    assert bellman_residual(W, g) < 1e-9


def test_monotone_in_g():
    p = RestartProblem(2, (3, 0), L=6)
    gs = np.linspace(0, 60, 13)
    Ws = [restart_value_iteration(p, g).values for g in gs]
    for a, b in zip(Ws, Ws[1:]):
        assert np.all(b >= a - 1e-9)
    gap = [W[tuple(c + 6 for c in (3, 0))] - g for W, g in zip(Ws, gs)]
    # d/dg W_g(x0) is the restart probability before absorption: the gap is
    # flat (= 1) while every move from x0 triggers a restart, then strictly falls
    assert all(b <= a + 1e-9 for a, b in zip(gap, gap[1:]))
    moving = [v for v in gap if v < 1 - 1e-9]
    assert len(moving) >= 8
    assert all(b < a for a, b in zip(moving, moving[1:]))


@pytest.mark.parametrize("n", [1, 2, 3, 7])
def test_grade_1d(n, backend):
    sol = solve_grade(RestartProblem(1, (n,)), backend=backend)
    assert sol.g_star == pytest.approx(grade_1d(n), abs=1e-8)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 50), st.integers(0, 30))
def test_grade_1d_any_box(n, extra):
    sol = solve_grade(RestartProblem(1, (n,), L=2 * n + extra))
    assert abs(sol.g_star - n * (n + 1)) <= 1e-8


@pytest.mark.parametrize("d, x0, L", [(2, (2, 1), 4), (2, (3, 0), 5), (3, (1, 1, 0), 3)])
@pytest.mark.filterwarnings("ignore:box radius")
def test_grade_matches_bruteforce(d, x0, L, backend):
    sol = solve_grade(RestartProblem(d, x0, L=L), backend=backend)
    assert sol.g_star == pytest.approx(grade_bruteforce(d, x0, L), rel=1e-8)


def test_grade_adjacent_to_target_pinned():
    # restarting from everything but the target is optimal: 4 moves on average
    values = [solve_grade(RestartProblem(2, (1, 0), L=L)).g_star for L in (8, 16, 32, 64)]
    assert max(values) - min(values) < 1e-6
    assert values[0] == pytest.approx(4.0, abs=1e-9)


def test_solution_invariants():
    p = RestartProblem(2, (6, 0))
    sol = solve_grade(p)
    W = sol.W
    assert W[(0, 0)] == 0.0
    assert np.all(W.values >= 0)
    assert bellman_residual(W, sol.g_star) < 1e-9
    assert W[(6, 0)] == pytest.approx(sol.g_star, rel=1e-9)
    assert sol.bracket[0] <= sol.g_star <= sol.bracket[1]


@pytest.mark.filterwarnings("ignore:box radius")
def test_truncation_consistency():
    g = [solve_grade(RestartProblem(2, (8, 0), L=L)).g_star for L in (12, 16, 32, 64)]
    assert all(b <= a + 1e-9 * a for a, b in zip(g, g[1:]))
    assert abs(g[2] - g[3]) / g[3] < 1e-6


def test_default_box_and_warning():
    assert RestartProblem(2, (5, 2)).L >= 2 * math.hypot(5, 2)
    with pytest.warns(UserWarning):
        RestartProblem(2, (5, 0), L=6)
    with pytest.raises(ValueError):
        RestartProblem(2, (0, 0))


def test_policy_value_equals_grade():
    sol = solve_grade(RestartProblem(2, (7, 3)))
    pv = evaluate_policy(2, (7, 3), sol.restart_mask)
    assert pv.grade == pytest.approx(sol.g_star, rel=1e-12)
    # a worse policy costs more
    never = np.zeros_like(sol.restart_mask)
    assert evaluate_policy(2, (7, 3), never).grade > sol.g_star


@pytest.mark.filterwarnings("ignore:box radius")
def test_backends_bit_identical():
    from restart_grade.kernels import compiled_available

    if not compiled_available():
        pytest.skip("compiled kernels not built")
    p = RestartProblem(2, (5, 2), L=10)
    a = solve_grade(p, backend="python")
    b = solve_grade(p, backend="compiled")
    assert a.g_star == b.g_star
    assert np.array_equal(a.W.values, b.W.values)
    assert a.iterations == b.iterations


def test_bracket_failure():
    class Never:
        def gap(self, g):
            return 1.0

    with pytest.raises(BracketError):
        _grow_bracket(Never(), None, cap=1e6)


def test_upper_hint_bracket():
    p = RestartProblem(2, (6, 0))
    plain = solve_grade(p).g_star
    hinted = solve_grade(p, upper_hint=2 * plain)
    assert hinted.bracket[1] == 2 * plain
    assert hinted.g_star == pytest.approx(plain, rel=1e-12)
    # a hint below the grade still works through geometric growth
    assert solve_grade(p, upper_hint=10.0).g_star == pytest.approx(plain, rel=1e-12)


def test_extract_strategy_1d():
    sol = solve_grade(RestartProblem(1, (3,)))
    S = extract_strategy(sol)
    assert LatticePoint((4,)) in S
    assert LatticePoint((2,)) not in S
    assert LatticePoint((0,)) not in S
    assert LatticePoint((-4,)) in S
    assert threshold_gap(sol) == (0.0, 0.0)


def test_extract_strategy_ties_not_restarted():
    sol = solve_grade(RestartProblem(2, (4, 0)))
    # the start point and its mirror images tie with g* and stay unrestarted
    S = extract_strategy(sol)
    for p in [(4, 0), (0, 4), (-4, 0), (0, -4)]:
        assert LatticePoint(p) not in S
    assert LatticePoint((0, 0)) not in S
    assert sol.restart_set == S


def test_threshold_gap_planar():
    sol = solve_grade(RestartProblem(2, (10, 0)))
    gap = threshold_gap(sol)
    assert 0 <= gap.c_out <= 3 and 0 <= gap.c_in <= 3
    near = solve_grade(RestartProblem(2, (1, 0)))
    assert threshold_gap(near).c_in == 0.0


def test_no_edge_warning_at_default_box():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        solve_grade(RestartProblem(2, (8, 0)))
