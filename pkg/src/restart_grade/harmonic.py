"""Discrete harmonic potentials of simple random walk.

* ``potential_kernel`` -- the recurrent potential kernel a(x) on Z^2 (and the
  trivial a(x) = |x| on Z), built exactly from the McCrea-Whipple diagonal
  values and the mean-value relation.
* ``green_table`` -- the Green function G(x) = G(x, 0) on Z^d, d = 3..5, from a
  Dirichlet problem on a larger box with asymptotic boundary data.
* ``build_profile`` -- the normalised harmonic function h used by the bounds:
  h = (pi/2) a on Z^2, h = (G(0) - G(x)) / a_d on Z^d, d >= 3.

Two independent quadrature oracles (Fourier integral for a, Bessel-function
integral for G) are provided for cross-checking.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np
from scipy import integrate, special
from scipy.sparse.linalg import LinearOperator, cg

from .errors import NumericFailureError, OutOfTableError
from .lattice import LatticeField, as_point, neighbors

log = logging.getLogger(__name__)

EULER_GAMMA = 0.5772156649015329
#: additive constant in h(x) = log|x| + b + O(|x|^-2) on Z^2
B_CONST = EULER_GAMMA + 1.5 * math.log(2.0)


def unit_ball_volume(d):
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def green_constant(d):
    """a_d = 2 / ((d - 2) omega_d), so that G(x) ~ a_d |x|^(2-d)."""
    if d < 3:
        raise ValueError("a_d is defined for d >= 3")
    return 2.0 / ((d - 2) * unit_ball_volume(d))


@dataclass
class PotentialTable:
    d: int
    kind: str  # "potential-kernel" or "green"
    L: int
    field: LatticeField
    method: str
    accuracy: float

    @property
    def values(self):
        return self.field.values

    def __getitem__(self, x):
        return self.field[x]


# -- neighbour-sum helpers on dense arrays -------------------------------------------


def _inner(d, k=1):
    return (slice(k, -k),) * d


def _shifted(d, axis, step, k=1):
    """Slice selecting the ``step``-shifted copy of the radius-(L-k) core."""
    sl = []
    for a in range(d):
        if a == axis:
            sl.append(slice(k + step, -k + step if -k + step != 0 else None))
        else:
            sl.append(slice(k, -k))
    return tuple(sl)


def neighbor_sum(values):
    """Sum over the 2d neighbours, in canonical order, on the inner box."""
    d = values.ndim
    s = None
    for axis in range(d):
        for step in (1, -1):
            part = values[_shifted(d, axis, step)]
            s = part.copy() if s is None else s + part
    return s


def mean_value_defect(table):
    """avg over neighbours minus value, on the box of radius L - 1."""
    v = table.values
    return neighbor_sum(v) / (2 * v.ndim) - v[_inner(v.ndim)]


# -- potential kernel ---------------------------------------------------------------


def _kernel_octant(L):
    """Exact a(x, y) for 0 <= y <= x <= L as floats.

    Every value has the form p + Q / (D pi) with integers p, Q and
    D = lcm(1, 3, ..., 2L - 1); the recursion is run in exact integer
    arithmetic because it amplifies rounding error geometrically.
    """
    D = 1
    for k in range(1, L + 1):
        D = math.lcm(D, 2 * k - 1)
    P = {(0, 0): 0, (1, 0): 1, (1, 1): 0}
    Q = {(0, 0): 0, (1, 0): 0, (1, 1): 4 * D}
    diag = D

    def at(tab, x, y):
        x, y = abs(x), abs(y)
        return tab[(x, y) if x >= y else (y, x)]

    for n in range(1, L):
        for k in range(n):
            for tab in (P, Q):
                tab[(n + 1, k)] = (
                    4 * tab[(n, k)] - at(tab, n - 1, k) - at(tab, n, k + 1) - at(tab, n, k - 1)
                )
        P[(n + 1, n)] = 2 * P[(n, n)] - P[(n, n - 1)]
        Q[(n + 1, n)] = 2 * Q[(n, n)] - Q[(n, n - 1)]
        diag += D // (2 * n + 1)
        P[(n + 1, n + 1)] = 0
        Q[(n + 1, n + 1)] = 4 * diag

    bits = max(abs(p) for p in P.values()).bit_length()
    with mpmath.workdps(int(bits * 0.30103) + 30):
        dpi = D * mpmath.pi
        return {k: float(P[k] + mpmath.mpf(Q[k]) / dpi) for k in P}


def potential_kernel(L, d=2, cache=None):
    """Potential kernel a(x) on the box ``[-L, L]^d`` for d in {1, 2}.

    Parameters
    ----------
    L : int
        Box radius, at least 2.
    d : int
        2 for the planar lattice; 1 gives the exact a(x) = |x|.
    cache : TableCache, optional
        Read-through cache keyed by (d, kind, L, method).
    """
    if L < 2:
        raise ValueError("potential_kernel needs L >= 2")
    if d not in (1, 2):
        raise ValueError("the potential kernel is only used for d = 1, 2")
    method = "exact-abs" if d == 1 else "mccrea-whipple-exact"
    if cache is not None:
        hit = cache.load(d, "potential-kernel", L, method)
        if hit is not None:
            fld, meta = hit
            return PotentialTable(d, "potential-kernel", L, fld, method, meta["accuracy"])

    if d == 1:
        values = np.abs(np.arange(-L, L + 1)).astype(float)
    else:
        octant = _kernel_octant(L)
        n = 2 * L + 1
        values = np.empty((n, n))
        for i in range(-L, L + 1):
            for j in range(-L, L + 1):
                x, y = abs(i), abs(j)
                values[i + L, j + L] = octant[(x, y) if x >= y else (y, x)]
    table = PotentialTable(d, "potential-kernel", L, LatticeField(values, L), method, 0.0)
    table.accuracy = _kernel_accuracy(table)
    if cache is not None:
        cache.store(table.field, d, table.kind, L, method, table.accuracy)
    return table


def _kernel_accuracy(table):
    defect = mean_value_defect(table)
    c = (table.L - 1,) * table.d
    origin_err = abs(defect[c] - 1.0)
    defect[c] = 0.0
    return float(max(np.max(np.abs(defect)), origin_err))


def potential_kernel_quadrature(x):
    """a(x) on Z^2 from its Fourier representation, reduced to one integral.

    Integrating the first angle in closed form gives
    a(x) = (1/pi) int_0^pi 2 (1 - lam^|x1| cos(x2 t)) / sqrt(c^2 - 1) dt
    with c = 2 - cos t and lam = c - sqrt(c^2 - 1).
    """
    x1, x2 = abs(int(x[0])), abs(int(x[1]))

    def f(t):
        omc = 2.0 * math.sin(t / 2) ** 2
        root = math.sqrt(omc * (2.0 + omc))
        lam = 1.0 + omc - root
        if root == 0.0:
            return 2.0 * x1
        return 2.0 * (1.0 - lam**x1 * math.cos(x2 * t)) / root

    val, _ = integrate.quad(f, 0.0, math.pi, epsabs=1e-15, epsrel=1e-13, limit=400)
    return val / math.pi


# -- Green function -----------------------------------------------------------------


# G(x) = a_d (r^(2-d) + alpha r^(-d) + beta sum(x_i^4) r^(-d-4)) + O(r^(-d-2));
# the correction comes from the fourth-order term of the lattice Laplacian.
_GREEN_CORRECTION = {3: (-3 / 8, 5 / 8), 4: (-1.0, 2.0), 5: (-15 / 8, 35 / 8)}


def green_asymptotic(x):
    """Two-term large-|x| expansion of G(x); used as boundary data."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    alpha, beta = _GREEN_CORRECTION[d]
    r2 = np.sum(x * x, axis=-1)
    s4 = np.sum(x**4, axis=-1)
    return green_constant(d) * (
        r2 ** ((2 - d) / 2) + alpha * r2 ** (-d / 2) + beta * s4 * r2 ** (-(d + 4) / 2)
    )


def _green_dirichlet(d, M, rtol=1e-13):
    """Solve G = delta_0 + mean(G over neighbours) on ``|x|_inf < M`` with
    the two-term asymptotic on the shell ``|x|_inf = M``.  Returns the full
    array."""
    n = 2 * M + 1
    axes = [np.arange(-M, M + 1)] * d
    coords = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    full = np.zeros((n,) * d)
    shell = np.ones((n,) * d, dtype=bool)
    shell[_inner(d)] = False
    full[shell] = green_asymptotic(coords[shell])
    twod = 2 * d
    inner_shape = (n - 2,) * d

    rhs = neighbor_sum(full) / twod
    rhs[(M - 1,) * d] += 1.0
    work = np.zeros((n,) * d)

    def matvec(v):
        work[_inner(d)] = v.reshape(inner_shape)
        return (v.reshape(inner_shape) - neighbor_sum(work) / twod).ravel()

    size = int(np.prod(inner_shape))
    op = LinearOperator((size, size), matvec=matvec, dtype=float)
    sol, info = cg(op, rhs.ravel(), rtol=rtol, atol=0.0, maxiter=20 * n + 1000)
    if info != 0:
        res = float(np.max(np.abs(matvec(sol) - rhs.ravel())))
        raise NumericFailureError(f"Green CG did not converge (info={info})", res, "harmonic")
    full[_inner(d)] = sol.reshape(inner_shape)
    return full


def green_table(L, d=3, cache=None, outer=3):
    """Green function G(x) on ``[-L, L]^d`` for 3 <= d <= 5.

    The Dirichlet problem is solved on a box of radius ``outer * L`` with
    asymptotic boundary data and the central radius-L block is kept.  The accuracy estimate is the largest
    change on the inner half-box when the outer radius shrinks to
    ``(outer - 1) * L``.
    """
    if L < 4 or not 3 <= d <= 5:
        raise ValueError("green_table needs L >= 4 and 3 <= d <= 5")
    method = f"dirichlet-cg-{outer}L"
    if cache is not None:
        hit = cache.load(d, "green", L, method)
        if hit is not None:
            fld, meta = hit
            return PotentialTable(d, "green", L, fld, method, meta["accuracy"])
    M = outer * L
    big = _green_dirichlet(d, M)
    small = _green_dirichlet(d, (outer - 1) * L)
    core_big = big[(slice(M - L, M + L + 1),) * d]
    h = L // 2
    mid_big = big[(slice(M - h, M + h + 1),) * d]
    m2 = (outer - 1) * L
    mid_small = small[(slice(m2 - h, m2 + h + 1),) * d]
    accuracy = float(np.max(np.abs(mid_big - mid_small)))
    table = PotentialTable(d, "green", L, LatticeField(core_big.copy(), L), method, accuracy)
    log.debug("green d=%d L=%d G(0)=%.12f accuracy=%.2e", d, L, table[(0,) * d], accuracy)
    if cache is not None:
        cache.store(table.field, d, "green", L, method, accuracy)
    return table


def green_quadrature(x):
    """G(x) on Z^d (d >= 3) as int_0^inf prod_i e^{-t/d} I_{x_i}(t/d) dt.

    This is the continuous-time representation of the Green function; the
    t^(-d/2) tail beyond the last breakpoint is added in closed form.
    """
    d = len(x)
    if d < 3:
        raise ValueError("Green function needs d >= 3")
    orders = [abs(int(c)) for c in x]

    def f(t):
        out = 1.0
        for k in orders:
            out *= special.ive(k, t / d)
        return out

    edges = np.concatenate([[0.0], np.logspace(-2, 8, 60)])
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-12, limit=200)[0]
    T = edges[-1]
    total += (2 * math.pi / d) ** (-d / 2) * 2.0 / (d - 2) * T ** (1 - d / 2)
    return total


@lru_cache(maxsize=None)
def _escape_probability(d, L):
    return 1.0 / green_table(L, d)[(0,) * d]


def escape_probability(d, L=8, cache=None):
    """p_d = 1 / G(0) from a Green table of radius L."""
    if cache is None:
        return _escape_probability(d, L)
    return 1.0 / green_table(L, d, cache=cache)[(0,) * d]


# -- harmonic profile ----------------------------------------------------------------


@dataclass
class HarmonicProfile:
    """The function h of the bounds, with the constants it is normalised by."""

    table: PotentialTable
    h: LatticeField
    h_inf: float | None
    constants: dict = field(default_factory=dict)

    @property
    def d(self):
        return self.table.d

    @property
    def L(self):
        return self.table.L

    def __getitem__(self, x):
        return self.h[x]


def build_profile(table, z=None):
    """Normalise a potential table into the harmonic profile h (target at 0)."""
    d = table.d
    if z is not None and any(as_point(z, d)):
        raise ValueError("only z = origin is supported; translate the problem instead")
    consts = {"gamma_e": EULER_GAMMA}
    if table.kind == "potential-kernel":
        if d == 1:
            h = table.values.copy()
        elif d == 2:
            h = (math.pi / 2) * table.values
            consts["b"] = B_CONST
        else:
            raise ValueError("potential-kernel tables exist only for d <= 2")
        h_inf = None
    elif table.kind == "green":
        if d < 3:
            raise ValueError("green tables need d >= 3")
        ad = green_constant(d)
        g0 = table[(0,) * d]
        h = (g0 - table.values) / ad
        h_inf = g0 / ad
        consts.update(a_d=ad, omega_d=unit_ball_volume(d), p_d=1.0 / g0)
    else:
        raise ValueError(f"unknown table kind {table.kind!r}")
    return HarmonicProfile(table, LatticeField(h, table.L), h_inf, consts)


def local_variance(profile, x):
    """V_h(x) = (1/2d) sum over neighbours y of (h(y) - h(x))^2."""
    x = as_point(x, profile.d)
    hx = profile.h[x]
    try:
        diffs = [profile.h[y] - hx for y in neighbors(x)]
    except OutOfTableError:
        raise OutOfTableError(f"neighbours of {tuple(x)} leave the table") from None
    return sum(v * v for v in diffs) / (2 * profile.d)


def local_variance_field(profile):
    """V_h on the box of radius L - 1, vectorised."""
    h = profile.h.values
    d = h.ndim
    core = h[_inner(d)]
    acc = np.zeros_like(core)
    for axis in range(d):
        for step in (1, -1):
            acc += (h[_shifted(d, axis, step)] - core) ** 2
    return LatticeField(acc / (2 * d), profile.L - 1)
