"""Exact grades on truncated lattices.

For a candidate restart value g the value function solves

    W(y) = 1 + (1/2d) sum_{w ~ y} min(W(w), g),   W(z) = 0,

with states outside the box counted as forced restarts (min(., g) = g).  The
grade is the fixed point g* = W_{g*}(x0).  We iterate on V = min(W, g), which
turns the equation into an obstacle problem solved by red-black projected
SOR, bracket the root of g -> W_g(x0) - g and refine it with Brent's method,
then polish by evaluating the resulting restart policy exactly.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import sparse
from scipy.optimize import brentq
from scipy.sparse.linalg import splu

from .errors import BracketError, NumericFailureError
from .kernels import get_backend
from .lattice import LatticeField, LatticePoint, as_point

log = logging.getLogger(__name__)


@dataclass
class RestartProblem:
    """Grade problem on Z^d with target at the origin.

    ``L`` defaults to the smallest integer >= 2|x0| (at least 2); smaller
    boxes are accepted with a warning.
    """

    d: int
    x0: tuple
    L: int | None = None
    vi_tol: float = 1e-10
    bisect_rtol: float = 1e-9
    max_sweeps: int = 2_000_000
    omega: float | None = None

    def __post_init__(self):
        self.x0 = as_point(self.x0, self.d)
        r = self.x0.norm
        if r == 0:
            raise ValueError("x0 must differ from the target")
        need = max(2, math.ceil(2 * r - 1e-12))
        if self.L is None:
            self.L = need
        elif self.L < need:
            warnings.warn(f"box radius {self.L} < 2|x0| = {2 * r:.3g}; the grade may be biased up")
        if max(abs(c) for c in self.x0) > self.L - 1:
            raise ValueError("x0 and its neighbours must lie inside the box")

    def relaxation(self):
        if self.omega is not None:
            return self.omega
        n = 2 * self.x0.norm + 4
        return 2.0 / (1.0 + math.sin(math.pi / n))


class _PaddedBox:
    """Flat indexing for ``[-L-1, L+1]^d``; the outer layer holds fixed values."""

    def __init__(self, d, L):
        self.d, self.L = d, L
        n = 2 * L + 3
        self.n = n
        self.shape = (n,) * d
        strides = [n ** (d - 1 - k) for k in range(d)]
        self.strides = strides
        offs = []
        for s in strides:
            offs += [s, -s]
        self.offsets = np.array(offs, dtype=np.intp)
        axes = [np.arange(-L - 1, L + 2)] * d
        coords = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        self.in_box = np.all(np.abs(coords) <= L, axis=1)
        self.origin = self.flat((0,) * d)
        free = self.in_box.copy()
        free[self.origin] = False
        parity = np.sum(coords, axis=1) % 2 == 0
        self.red = np.flatnonzero(free & parity).astype(np.intp)
        self.black = np.flatnonzero(free & ~parity).astype(np.intp)

    def flat(self, x):
        return sum((int(c) + self.L + 1) * s for c, s in zip(x, self.strides))

    def box(self, arr):
        return arr.reshape(self.shape)[(slice(1, -1),) * self.d]

    def mean_neighbors(self, arr):
        """Mean of ``arr`` over the 2d neighbours, on the box."""
        full = arr.reshape(self.shape)
        s = None
        for axis in range(self.d):
            for step in (1, -1):
                sl = tuple(
                    slice(1 + step, self.n - 1 + step) if a == axis else slice(1, -1)
                    for a in range(self.d)
                )
                s = full[sl].copy() if s is None else s + full[sl]
        return s / (2 * self.d)


class _ObstacleSolver:
    """Holds the warm-started V array across evaluations of g."""

    def __init__(self, problem, backend=None):
        self.p = problem
        self.grid = _PaddedBox(problem.d, problem.L)
        self.kern = get_backend(backend)
        self.v = np.zeros(int(np.prod(self.grid.shape)))
        self.sweeps = 0
        self.x0_nbrs = self.grid.flat(problem.x0) + self.grid.offsets
        self.history = []

    def solve(self, g):
        grid, v = self.grid, self.v
        v[~grid.in_box] = g
        np.minimum(v, g, out=v)
        v[grid.origin] = 0.0
        sweeps, res = self.kern.restart_psor(
            v, grid.red, grid.black, grid.offsets, float(g), self.p.relaxation(),
            self.p.max_sweeps, self.p.vi_tol, 10,
        )
        self.sweeps += sweeps
        if not res < self.p.vi_tol:
            raise NumericFailureError(
                f"value iteration did not reach {self.p.vi_tol:g} at g={g:.6g}", res, "grade"
            )
        return res

    def w_x0(self):
        return 1.0 + float(np.sum(self.v[self.x0_nbrs])) / (2 * self.p.d)

    def gap(self, g):
        self.solve(g)
        out = self.w_x0() - g
        self.history.append((float(g), out))
        return out

    def value_field(self):
        W = 1.0 + self.grid.mean_neighbors(self.v)
        W[(self.p.L,) * self.p.d] = 0.0
        return LatticeField(W, self.p.L)


def bellman_residual(W, g):
    """sup over the box minus the target of |W - 1 - mean min(W, g)|."""
    d, L = W.d, W.L
    grid = _PaddedBox(d, L)
    pad = np.full(grid.shape, float(g))
    grid.box(pad)[...] = np.minimum(W.values, g)
    r = np.abs(W.values - 1.0 - grid.mean_neighbors(pad.ravel()))
    r[(L,) * d] = 0.0
    return float(np.max(r))


def restart_value_iteration(problem, g, backend=None):
    """Value function W_g on the box for restart value ``g`` (cold start)."""
    if g < 0:
        raise ValueError("g must be nonnegative")
    solver = _ObstacleSolver(problem, backend)
    solver.solve(g)
    return solver.value_field()


class PolicyValue(NamedTuple):
    grade: float
    T: LatticeField


def evaluate_policy(d, x0, restart_mask):
    """Exact expected hitting time from ``x0`` for a stationary restart set.

    ``restart_mask`` is a boolean array on the box ``[-L, L]^d``; states
    outside the box are restarts.  Writing T = u + T(x0) v, where u counts
    moves until absorption or restart and v is the restart probability, gives
    T(x0) = u(x0) / (1 - v(x0)).  Two sparse solves on the continuation set.
    """
    restart_mask = np.asarray(restart_mask, dtype=bool)
    L = (restart_mask.shape[0] - 1) // 2
    x0 = as_point(x0, d)
    grid = _PaddedBox(d, L)
    cont = np.zeros(grid.shape, dtype=bool)
    grid.box(cont)[...] = ~restart_mask
    cont = cont.ravel()
    cont[grid.flat(x0)] = True
    cont[grid.origin] = False
    unknowns = np.flatnonzero(cont)
    index = np.full(cont.size, -1, dtype=np.intp)
    index[unknowns] = np.arange(len(unknowns))
    twod = 2 * d
    rows, cols = [], []
    restart_weight = np.zeros(len(unknowns))
    for off in grid.offsets:
        nb = unknowns + off
        j = index[nb]
        ok = j >= 0
        rows.append(np.flatnonzero(ok))
        cols.append(j[ok])
        restart_weight += ((j < 0) & (nb != grid.origin)) / twod
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    n = len(unknowns)
    P = sparse.csc_matrix((np.full(len(rows), 1.0 / twod), (rows, cols)), shape=(n, n))
    lu = splu((sparse.identity(n, format="csc") - P).tocsc())
    u = lu.solve(np.ones(n))
    v = lu.solve(restart_weight)
    i0 = index[grid.flat(x0)]
    grade = u[i0] / (1.0 - v[i0])
    T = np.full(cont.size, np.nan)
    T[unknowns] = u + grade * v
    T[grid.origin] = 0.0
    return PolicyValue(float(grade), LatticeField(grid.box(T).copy(), L))


@dataclass
class GradeSolution:
    """Converged grade with its value function and diagnostics."""

    problem: RestartProblem
    g_star: float
    W: LatticeField
    residual: float
    iterations: int
    bracket: tuple
    evaluations: list = field(default_factory=list)
    backend: str = ""

    @property
    def tie_tolerance(self):
        return 1e-7 * max(1.0, self.g_star)

    @property
    def restart_mask(self):
        return self.W.values > self.g_star + self.tie_tolerance

    @property
    def restart_set(self):
        return extract_strategy(self)


def _grow_bracket(solver, upper_hint, cap=1e15):
    lo = 0.0
    if upper_hint is not None and upper_hint > 0:
        if solver.gap(upper_hint) < 0:
            return lo, float(upper_hint)
        lo = float(upper_hint)
    g = max(1.0, 2 * lo)
    while solver.gap(g) >= 0:
        lo = g
        g *= 2
        if g > cap:
            raise BracketError(f"no sign change of W_g(x0) - g below {cap:g}")
    return lo, g


def solve_grade(problem, upper_hint=None, backend=None, polish=True):
    """Compute the grade gamma(x0, 0) on the truncated box.

    Parameters
    ----------
    problem : RestartProblem
    upper_hint : float, optional
        A value believed to exceed the grade (e.g. twice an upper bound);
        if it does not, geometric growth from it takes over.
    backend : {"compiled", "python"}, optional
    polish : bool
        Re-evaluate the converged restart policy exactly and adopt that value
        when it agrees with the bracketed root.

    Returns
    -------
    GradeSolution
    """
    solver = _ObstacleSolver(problem, backend)
    lo, hi = _grow_bracket(solver, upper_hint)
    rt = problem.bisect_rtol
    root = brentq(solver.gap, lo, hi, xtol=rt, rtol=rt, maxiter=500)
    g_star = root
    if polish:
        solver.solve(root)
        W = solver.value_field()
        mask = W.values > root + 1e-7 * max(1.0, root)
        exact = evaluate_policy(problem.d, problem.x0, mask).grade
        if abs(exact - root) <= 1e-6 * max(1.0, root):
            g_star = exact
        else:
            log.warning("policy polish disagrees with bracketed root (%r vs %r)", exact, root)
    res = solver.solve(g_star)
    W = solver.value_field()
    sol = GradeSolution(
        problem, float(g_star), W, float(res), solver.sweeps, (lo, hi),
        list(solver.history), solver.kern.BACKEND,
    )
    edge = np.zeros(W.values.shape, dtype=bool)
    for axis in range(problem.d):
        sl = [slice(None)] * problem.d
        sl[axis] = [0, -1]
        edge[tuple(sl)] = True
    if np.any(edge & ~sol.restart_mask):
        warnings.warn("continuation region reaches the box edge; increase L")
    return sol


def extract_strategy(sol, tie_tol=None):
    """Restart set {y in box : W(y) > g* + tie_tol}; ties are not restarted."""
    tol = sol.tie_tolerance if tie_tol is None else tie_tol
    mask = sol.W.values > sol.g_star + tol
    L = sol.W.L
    return frozenset(LatticePoint(idx - L for idx in ix) for ix in np.argwhere(mask))


class ThresholdGap(NamedTuple):
    c_out: float
    c_in: float


def threshold_gap(sol, tie_tol=None):
    """Distances by which the restart set departs from the ball |y| <= |x0|.

    ``c_out`` is the largest |y| - |x0| over non-restarted y outside the ball;
    ``c_in`` is the largest |x0| - |y| over restarted y inside it.  Both are
    clipped at 0.
    """
    tol = sol.tie_tolerance if tie_tol is None else tie_tol
    mask = sol.W.values > sol.g_star + tol
    r = sol.W.norms()
    r0 = sol.problem.x0.norm
    over = (r - r0)[~mask & (r > r0)]
    under = (r0 - r)[mask & (r < r0)]
    c_out = float(over.max()) if over.size else 0.0
    c_in = float(under.max()) if under.size else 0.0
    return ThresholdGap(max(c_out, 0.0), max(c_in, 0.0))
