"""Independent reference computations used by the tests.

Nothing here imports the package: each oracle is a separate, deliberately
plain implementation (dense linear algebra, Jacobi iteration, closed forms
from the literature) so agreement with the library is meaningful.
"""

import itertools
import math

import numpy as np
from scipy import special


# -- exact values ------------------------------------------------------------------

def grade_1d(n):
    """gamma(n, 0) on Z."""
    return n * (n + 1.0)


# Spitzer's table of the planar potential kernel (normalised so a(1,0) = 1)
KERNEL_EXACT = {
    (0, 0): 0.0,
    (1, 0): 1.0,
    (1, 1): 4 / math.pi,
    (2, 0): 4 - 8 / math.pi,
    (2, 1): 8 / math.pi - 1,
    (2, 2): 16 / (3 * math.pi),
    (3, 0): 17 - 48 / math.pi,
}


def watson_g0():
    """G(0) on Z^3 in closed form (Watson's integral via Gamma values)."""
    g = special.gamma
    return math.sqrt(6) / (32 * math.pi**3) * g(1 / 24) * g(5 / 24) * g(7 / 24) * g(11 / 24)


def kernel_by_diagonal_sum(n):
    """a(n, n) = (4/pi) sum_{k<=n} 1/(2k-1)."""
    return 4 / math.pi * sum(1.0 / (2 * k - 1) for k in range(1, n + 1))


def splitmix64_reference(seed, count):
    """The published SplitMix64 generator (Steele, Lea, Flood)."""
    mask = (1 << 64) - 1
    state = seed & mask
    out = []
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & mask
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        out.append(z ^ (z >> 31))
    return out


# -- brute-force grade on a tiny box ------------------------------------------------

def grade_bruteforce(d, x0, L, tol=1e-12):
    """Grade by plain Jacobi value iteration and bisection on g.

    Box [-L, L]^d, states outside count as forced restarts.
    """
    n = 2 * L + 1
    pts = list(itertools.product(range(-L, L + 1), repeat=d))
    idx = {p: i for i, p in enumerate(pts)}
    nbrs = []
    for p in pts:
        row = []
        for k in range(d):
            for s in (1, -1):
                q = list(p)
                q[k] += s
                row.append(idx.get(tuple(q), -1))
        nbrs.append(row)
    nbrs = np.array(nbrs)
    outside = nbrs < 0
    origin = idx[(0,) * d]
    i0 = idx[tuple(x0)]

    def W_at_x0(g):
        W = np.zeros(n**d)
        while True:
            cont = np.minimum(np.where(outside, g, W[nbrs]), g)
            new = 1.0 + cont.mean(axis=1)
            new[origin] = 0.0
            if np.max(np.abs(new - W)) < tol:
                return new[i0]
            W = new

    lo, hi = 0.0, 1.0
    while W_at_x0(hi) > hi:
        lo, hi = hi, 2 * hi
    while hi - lo > 1e-10 * hi:
        mid = 0.5 * (lo + hi)
        if W_at_x0(mid) > mid:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- dense disk computations ---------------------------------------------------------

def disk_list(R):
    r = int(math.floor(R))
    return [(i, j) for i in range(-r, r + 1) for j in range(-r, r + 1) if i * i + j * j <= R * R]


def disk_laplacian(R):
    pts = disk_list(R)
    idx = {p: i for i, p in enumerate(pts)}
    n = len(pts)
    Lap = np.zeros((n, n))
    for p, i in idx.items():
        for q in ((p[0] + 1, p[1]), (p[0] - 1, p[1]), (p[0], p[1] + 1), (p[0], p[1] - 1)):
            j = idx.get(q)
            if j is not None:
                Lap[i, j] -= 1
                Lap[i, i] += 1
    return pts, idx, Lap


def hitting_times_dense(R, z=(0, 0)):
    pts, idx, Lap = disk_laplacian(R)
    deg = np.diag(Lap).copy()
    keep = [i for i in range(len(pts)) if i != idx[z]]
    T = np.zeros(len(pts))
    T[keep] = np.linalg.solve(Lap[np.ix_(keep, keep)], deg[keep])
    return {p: T[i] for p, i in idx.items()}


def resistance_pinv(R, x0, z=(0, 0)):
    """(e_x - e_z)^T L^+ (e_x - e_z) with the Moore-Penrose inverse."""
    pts, idx, Lap = disk_laplacian(R)
    e = np.zeros(len(pts))
    e[idx[tuple(x0)]] += 1
    e[idx[tuple(z)]] -= 1
    return float(e @ np.linalg.pinv(Lap) @ e)


# -- Brownian closed forms -----------------------------------------------------------

def bm_grade_reference(d, r0, r):
    """The closed forms, written directly in terms of |x| and r0."""
    if d == 1:
        return (r - r0) ** 2
    if d == 2:
        return r * r * math.log(r) - r * r * (0.5 + math.log(r0)) + 0.5 * r0 * r0
    return 2 * r0 ** (2 - d) / (d * (d - 2)) * r**d - r * r / (d - 2) + r0 * r0 / d
