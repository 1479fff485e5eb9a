"""Hitting times of simple random walk confined to a finite lattice domain.

Inside D the walk moves to a uniformly chosen neighbour in D, so a vertex
with deg_D(x) < 2d neighbours in D spreads its mass over those only.  Exact
expected hitting times and effective resistances come from sparse solves on
the graph Laplacian; the harmonic-profile bounds reuse the envelopes of
``bounds`` integrated up to h_1 (the lowest h on the two-layer inner
boundary), plus the correction mu(B) R(x0 <-> z).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import cg

from .bounds import fit_envelope, lower_integral, upper_integral
from .errors import DomainTooSmallError, NumericFailureError, OutOfTableError
from .harmonic import build_profile, potential_kernel
from .lattice import Domain, LatticePoint, as_point, disk_points, unit_offsets

log = logging.getLogger(__name__)

SOLVER_TOL = 1e-9
DENSE_LIMIT = 400  # unknowns up to which the dense oracle is cheap


class DiskGraph:
    """Adjacency structure of a domain, with deg_D and point lookup."""

    def __init__(self, domain: Domain):
        self.domain = domain
        self.points = domain.points()
        self.index = {LatticePoint(p): i for i, p in enumerate(map(tuple, self.points))}
        n = len(self.points)
        rows, cols = [], []
        for off in unit_offsets(domain.d):
            for i, p in enumerate(self.points):
                j = self.index.get(LatticePoint(tuple(p + off)))
                if j is not None:
                    rows.append(i)
                    cols.append(j)
        A = sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        self.A = A
        self.deg = np.asarray(A.sum(axis=1)).ravel()
        self.laplacian = (sparse.diags(self.deg) - A).tocsr()

    def __len__(self):
        return len(self.points)

    def locate(self, x):
        x = as_point(x, self.domain.d)
        try:
            return self.index[x]
        except KeyError:
            raise DomainTooSmallError(f"{tuple(x)} is not in the domain", "disk") from None

    @property
    def mu(self):
        return float(self.deg.sum())


def _as_graph(D):
    return D if isinstance(D, DiskGraph) else DiskGraph(D)


def _grounded_solve(graph, grounded, rhs, dense=None):
    """Solve L x = rhs on the vertices not in ``grounded`` (x = 0 there).

    Jacobi-preconditioned CG, then residual correction until the residual of
    the row-normalised equation is below SOLVER_TOL in sup norm.
    """
    n = len(graph)
    keep = np.ones(n, dtype=bool)
    keep[list(grounded)] = False
    idx = np.flatnonzero(keep)
    Lr = graph.laplacian[idx][:, idx].tocsr()
    b = rhs[idx]
    deg = graph.deg[idx]
    if dense is None:
        dense = len(idx) <= DENSE_LIMIT
    if dense:
        x = np.linalg.solve(Lr.toarray(), b)
    else:
        M = sparse.diags(1.0 / deg)
        x = np.zeros(len(idx))
        for _ in range(20):
            r = b - Lr @ x
            if np.max(np.abs(r) / deg) < 0.1 * SOLVER_TOL:
                break
            dx, info = cg(Lr, r, M=M, rtol=1e-13, atol=0.0, maxiter=20 * len(idx))
            x += dx
    res = float(np.max(np.abs(b - Lr @ x) / deg)) if len(idx) else 0.0
    if not res < SOLVER_TOL:
        raise NumericFailureError(f"Laplacian solve residual {res:g}", res, "disk")
    out = np.zeros(n)
    out[idx] = x
    return out, res


class HittingTimes(NamedTuple):
    graph: DiskGraph
    values: np.ndarray
    residual: float

    def __getitem__(self, x):
        return float(self.values[self.graph.locate(x)])


def solve_hitting_times(D, z=None, dense=None):
    """E_x tau_z for every x in D, walk with p_D(x, y) = 1/deg_D(x).

    Solves deg_D(x) T(x) - sum_{y ~ x, y in D} T(y) = deg_D(x), T(z) = 0.
    """
    graph = _as_graph(D)
    iz = graph.locate(z if z is not None else (0,) * graph.domain.d)
    T, res = _grounded_solve(graph, [iz], graph.deg.astype(float), dense)
    return HittingTimes(graph, T, res)


def hitting_residual(ht, z=None):
    """sup over x != z of |T(x) - 1 - mean_{y ~ x in D} T(y)|."""
    g = ht.graph
    iz = g.locate(z if z is not None else (0,) * g.domain.d)
    r = np.abs(ht.values - 1.0 - (g.A @ ht.values) / g.deg)
    r[iz] = 0.0
    return float(r.max())


def effective_resistance(D, x0, z=None, dense=None):
    """Resistance between x0 and z with unit resistors on the edges of D.

    Imposes voltage 1 at x0 and 0 at z, solves for the harmonic voltage and
    returns 1 / (current leaving x0).  Zero when x0 = z.
    """
    graph = _as_graph(D)
    i0 = graph.locate(x0)
    iz = graph.locate(z if z is not None else (0,) * graph.domain.d)
    if i0 == iz:
        return 0.0
    # boundary data enters the right-hand side through the x0 column
    rhs = np.asarray(graph.A[:, i0].todense()).ravel()
    v, _ = _grounded_solve(graph, [i0, iz], rhs, dense)
    v[i0] = 1.0
    current = float(graph.deg[i0] - graph.A[i0].toarray().ravel() @ v)
    return 1.0 / current


def commute_time(D, x0, z=None):
    """(E_x0 tau_z + E_z tau_x0, mu(D) R(x0 <-> z))."""
    graph = _as_graph(D)
    z = z if z is not None else (0,) * graph.domain.d
    there = solve_hitting_times(graph, z)[x0]
    back = solve_hitting_times(graph, x0)[z]
    return there + back, graph.mu * effective_resistance(graph, x0, z)


# -- boundary sets --------------------------------------------------------------


class BoundarySets(NamedTuple):
    boundary: frozenset  # dD
    boundary2: frozenset  # d^2 D
    h1: float
    B: frozenset


def boundary_sets(D, profile):
    """dD, d^2 D, h_1 = min h over d^2 D, and B = {x in D : some lattice
    neighbour y (in or out of D) has h(y) >= h_1}."""
    graph = _as_graph(D)
    pts = [LatticePoint(tuple(p)) for p in graph.points]
    offs = [LatticePoint(tuple(o)) for o in unit_offsets(graph.domain.d)]
    if any(not profile.h.inside(p + o) for p in pts for o in offs):
        raise OutOfTableError("profile does not cover the domain's neighbourhood")
    inD = graph.index
    bd = frozenset(p for p in pts if any((p + o) not in inD for o in offs))
    bd2 = bd | frozenset(p for p in pts if any((p + o) in bd for o in offs))
    h = profile.h
    h1 = min(h[p] for p in bd2)
    B = frozenset(p for p in pts if any(h[p + o] >= h1 for o in offs))
    return BoundarySets(bd, bd2, float(h1), B)


def visits_to(D, x0, target_set, z=None):
    """E_x0 #{n <= tau_z : X_n in target_set}, by one more Laplacian solve."""
    graph = _as_graph(D)
    iz = graph.locate(z if z is not None else (0,) * graph.domain.d)
    ind = np.zeros(len(graph))
    for p in target_set:
        ind[graph.locate(p)] = 1.0
    # N = 1_S + P N off z, N(z) = 1_S(z); shift by N(z) to ground z
    Nz = ind[iz]
    rhs = graph.deg * ind + (graph.A[:, iz].toarray().ravel() * Nz)
    N, _ = _grounded_solve(graph, [iz], rhs)
    N[iz] = Nz
    return float(N[graph.locate(x0)])


# -- bounds and asymptotics --------------------------------------------------------


class DiskBounds(NamedTuple):
    lower: float
    upper: float
    delta_bound: float


def tno_bounds(D, profile, envelopes, x0, z=None):
    """Bounds on E_x0 tau on a domain from a harmonic profile.

    lower = int_0^h1 2 min(u, h(x0)) / g_+(u) du
    upper = int_0^h1 2 min(u, h(x0)) / g_-(u) du + mu(B) R(x0 <-> z)
    """
    graph = _as_graph(D)
    x0 = as_point(x0, graph.domain.d)
    sets = boundary_sets(graph, profile)
    hx = profile.h[x0]
    R = effective_resistance(graph, x0, z)
    muB = float(sum(graph.deg[graph.locate(p)] for p in sets.B))
    delta = muB * R
    if hx <= 0:
        return DiskBounds(0.0, delta, delta)

    def w(u):
        return 2.0 * min(u, hx)

    lo = lower_integral(envelopes, sets.h1, w, kinks=(hx,))
    up, _ = upper_integral(envelopes, sets.h1, w, kinks=(hx,))
    return DiskBounds(lo, up + delta, delta)


def asymptotic_disk(x0, R, profile):
    """Prediction 2 R^2 h(x0) - |x0|^2 for the disk of radius R."""
    x0 = as_point(x0, profile.d)
    return 2.0 * R * R * profile.h[x0] - x0.norm**2


def disk_profile(R, margin=3):
    """Planar profile on a box covering the disk's 2-neighbourhood, with its
    fitted envelopes."""
    L = int(math.ceil(R)) + margin
    prof = build_profile(potential_kernel(max(L, 8)))
    return prof, fit_envelope(prof)


@dataclass
class DiskReport:
    R: float
    x0: LatticePoint
    times: HittingTimes
    sets: BoundarySets
    mu_B: float
    mu_D: float
    resistance: float
    lower: float
    upper: float
    delta_bound: float
    delta: float  # exact E_x0 #{n <= tau : X_n in B}
    asymptotic: float
    extras: dict = field(default_factory=dict)

    @property
    def exact(self):
        return self.times[self.x0]


def disk_report(R, x0, profile=None, envelopes=None):
    """Everything about E_x0 tau on the disk {|x| <= R} with target 0."""
    D = disk_points(R, 2)
    x0 = as_point(x0, 2)
    if x0 not in D:
        raise DomainTooSmallError(f"{tuple(x0)} lies outside the disk of radius {R}", "disk")
    if profile is None:
        profile, envelopes = disk_profile(R)
    elif envelopes is None:
        envelopes = fit_envelope(profile)
    graph = DiskGraph(D)
    times = solve_hitting_times(graph)
    sets = boundary_sets(graph, profile)
    b = tno_bounds(graph, profile, envelopes, x0)
    muB = float(sum(graph.deg[graph.locate(p)] for p in sets.B))
    res = effective_resistance(graph, x0) if x0.norm > 0 else 0.0
    return DiskReport(
        R=float(R), x0=x0, times=times, sets=sets, mu_B=muB, mu_D=graph.mu,
        resistance=res, lower=b.lower, upper=b.upper, delta_bound=b.delta_bound,
        delta=visits_to(graph, x0, sets.B), asymptotic=asymptotic_disk(x0, R, profile),
    )
