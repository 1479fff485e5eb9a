"""Grades of Brownian motion with restarts, aiming at a ball B(0, r0).

For radial problems the natural harmonic function is

    h(r) = r - r0             (d = 1)
           log(r / r0)        (d = 2)
           r0^(2-d) - r^(2-d) (d >= 3)

and |grad h|^2 = g(h) is a function of h alone, so the grade is

    gamma(r) = F(h(r)),   F(t) = int_0^t 2s / g(s) ds.

Closed forms are provided together with the quadrature of F.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ConfigError, DomainTooSmallError, NumericFailureError


@dataclass(frozen=True)
class BmProblem:
    """Radial restart problem: start radius |x| >= r0, target ball B(0, r0)."""

    d: int
    r0: float

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ConfigError(f"dimension must be a positive integer, got {self.d!r}")
        if not (self.r0 >= 0 and math.isfinite(self.r0)):
            raise ConfigError(f"target radius must be finite and >= 0, got {self.r0!r}")
        if self.r0 == 0 and self.d != 1:
            raise ConfigError("r0 = 0 is only allowed for d = 1")

    def check(self, r):
        r = float(r)
        if not r >= self.r0:
            raise DomainTooSmallError(f"|x| = {r} lies inside the target ball of radius {self.r0}", "continuum")
        return r


def bm_h(r, problem):
    r = problem.check(r)
    d, r0 = problem.d, problem.r0
    if d == 1:
        return r - r0
    if d == 2:
        return math.log(r / r0)
    return r0 ** (2 - d) - r ** (2 - d)


def bm_gradient_sq(r, problem):
    """|grad h|^2 at radius r."""
    r = problem.check(r)
    d = problem.d
    if d == 1:
        return 1.0
    if d == 2:
        return r**-2
    return (d - 2) ** 2 * r ** (2 - 2 * d)


def _g_of_h(s, problem):
    # |grad h|^2 as a function of the level s = h(r)
    d, r0 = problem.d, problem.r0
    if d == 1:
        return 1.0
    if d == 2:
        return math.exp(-2 * s) / (r0 * r0)
    t = r0 ** (2 - d) - s  # = r^(2-d)
    return (d - 2) ** 2 * t ** ((2 * d - 2) / (d - 2))


def bm_grade(r, problem):
    """Closed-form grade at radius r.

    The d = 2 and d >= 3 forms are rearranged around r0 to avoid cancellation
    near the boundary:

    d = 2:  r0^2 (u e^(2u) - expm1(2u)/2),            u = log(r/r0)
    d >= 3: r0^2 (2 rho^d - d rho^2 + d - 2) / (d(d-2)),  rho = r/r0
    """
    r = problem.check(r)
    d, r0 = problem.d, problem.r0
    if d == 1:
        return (r - r0) ** 2
    if d == 2:
        u = math.log(r / r0)
        return r0 * r0 * (u * math.exp(2 * u) - 0.5 * math.expm1(2 * u))
    rho = r / r0
    # 2 rho^d - d rho^2 + d - 2 vanishes to second order at rho = 1; expand
    # in e = rho - 1 through binomial sums to keep full relative precision
    e = rho - 1.0
    poly = sum(2 * math.comb(d, k) * e**k for k in range(3, d + 1)) + (d * (d - 1) - d) * e * e
    return r0 * r0 * poly / (d * (d - 2))


def bm_grade_quadrature(r, problem, epsrel=1e-13):
    """The grade as int_0^h(r) 2s / g(s) ds by adaptive quadrature."""
    top = bm_h(r, problem)
    if top <= 0:
        return 0.0
    d = problem.d
    points = None
    if d >= 3:
        # the integrand steepens as s approaches r0^(2-d); split by decades of t
        t_top = r ** (2 - d)
        t0 = problem.r0 ** (2 - d)
        points = [t0 - t_top * 10.0**k for k in range(1, 12) if 0 < t0 - t_top * 10.0**k < top]
    val, err = integrate.quad(
        lambda s: 2 * s / _g_of_h(s, problem), 0.0, top,
        points=points, epsabs=0.0, epsrel=epsrel, limit=500,
    )
    if not abs(err) <= 1e-11 * abs(val):
        raise NumericFailureError(f"quadrature error {err:g} on value {val:g}", err, "continuum")
    return val


def lattice_ratio(g_lattice, r, d=2, r0=1.0):
    """(1/d) gamma_lattice / gamma_BM: the time-scale comparison of the walk."""
    return g_lattice / (d * bm_grade(r, BmProblem(d, r0)))


def default_grid():
    """30 (d, r0, |x|) triples spanning d = 1..5 and a range of radii."""
    out = []
    for d in (1, 2, 3, 4, 5):
        for r0 in (0.5, 1.0, 2.0):
            for ratio in (1.25, 3.0):
                out.append((d, r0, r0 * ratio))
    return out


def agreement(grid=None):
    """Relative closed-form vs quadrature differences on ``grid``."""
    grid = default_grid() if grid is None else grid
    rows = []
    for d, r0, r in grid:
        p = BmProblem(d, r0)
        a = bm_grade(r, p)
        q = bm_grade_quadrature(r, p)
        rows.append((d, r0, r, a, q, abs(a - q) / abs(a)))
    return np.array(rows)
