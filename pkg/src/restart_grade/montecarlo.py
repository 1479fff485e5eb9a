"""Monte Carlo estimates of hitting times under restart strategies.

A strategy is a stationary restart set: after each move the walker jumps back
to x0 (at no cost) when the new position lies in the set.  Sets are handed
to the walk kernel as a boolean mask on a box [-B, B]^d plus one flag for
every point outside the box.  Replicate i draws its moves from a substream
keyed by (seed, i), so estimates do not depend on the thread count and
strategies simulated with the same seed share their random numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConfigError, EstimateUnusableError
from .kernels import get_backend, thread_count
from .lattice import LatticePoint, as_point

KINDS = ("euclidean-threshold", "h-threshold", "never", "custom", "restart-set")


@dataclass(frozen=True)
class StrategySpec:
    """Restart rule in executable form.

    Parameters
    ----------
    kind : str
        One of "euclidean-threshold" (restart when |y| > rho),
        "h-threshold" (restart when h(y) > tau), "never", "custom"
        (restart when ``predicate(y)``) or "restart-set" (a precomputed
        boolean mask, e.g. from a grade solution).
    x0 : point
        Start and restart position.
    """

    kind: str
    x0: LatticePoint
    rho: float | None = None
    tau: float | None = None
    profile: object = field(default=None, compare=False, repr=False)
    predicate: Callable | None = field(default=None, compare=False, repr=False)
    mask: np.ndarray | None = field(default=None, compare=False, repr=False)
    radius: int | None = None
    outside_restart: bool = True
    name: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown strategy kind {self.kind!r}", "montecarlo")
        object.__setattr__(self, "x0", as_point(self.x0))
        if self.kind == "h-threshold" and self.profile is None:
            raise ConfigError("h-threshold needs a harmonic profile", "montecarlo")
        if self.kind == "custom" and self.predicate is None:
            raise ConfigError("custom strategy needs a predicate", "montecarlo")
        if self.kind == "restart-set" and self.mask is None:
            raise ConfigError("restart-set strategy needs a mask", "montecarlo")
        if not self.name:
            object.__setattr__(self, "name", self.kind)

    # -- constructors ---------------------------------------------------------

    @classmethod
    def euclidean(cls, x0, rho=None):
        x0 = as_point(x0)
        return cls("euclidean-threshold", x0, rho=x0.norm if rho is None else float(rho))

    @classmethod
    def h_threshold(cls, x0, profile, tau=None):
        return cls("h-threshold", x0, tau=tau, profile=profile)

    @classmethod
    def never(cls, x0):
        return cls("never", x0, outside_restart=False)

    @classmethod
    def custom(cls, x0, predicate, radius, outside_restart=True, name="custom"):
        return cls("custom", x0, predicate=predicate, radius=int(radius),
                   outside_restart=outside_restart, name=name)

    @classmethod
    def from_solution(cls, sol, name="optimal"):
        """The extracted optimal restart set (outside the box: restart)."""
        return cls("restart-set", sol.problem.x0, mask=sol.restart_mask, name=name)

    # -- compilation to a mask --------------------------------------------------

    def compile(self):
        """Return ``(mask, B, outside_restart)`` for the walk kernel."""
        d = self.x0.d
        if self.kind == "never":
            return np.zeros(3**d, dtype=np.uint8), 1, False
        if self.kind == "restart-set":
            m = np.asarray(self.mask, dtype=bool)
            B = (m.shape[0] - 1) // 2
            return _flat_mask(m), B, True
        if self.kind == "euclidean-threshold":
            B = int(math.floor(self.rho)) + 1
            r = _norms(d, B)
            return _flat_mask(r > self.rho), B, True
        if self.kind == "h-threshold":
            h = self.profile.h
            tau = h[self.x0] if self.tau is None else float(self.tau)
            # beyond the table h exceeds every tabulated level near x0
            return _flat_mask(h.values > tau), h.L, True
        B = self.radius
        pts = _coords(d, B)
        m = np.fromiter((bool(self.predicate(LatticePoint(p))) for p in pts), bool, len(pts))
        return m.astype(np.uint8), B, self.outside_restart


def _coords(d, B):
    ax = np.arange(-B, B + 1)
    return np.stack(np.meshgrid(*([ax] * d), indexing="ij"), axis=-1).reshape(-1, d)


def _norms(d, B):
    return np.sqrt((_coords(d, B) ** 2).sum(axis=1)).reshape((2 * B + 1,) * d)


def _flat_mask(m):
    m = np.asarray(m, dtype=bool).copy()
    m[(m.shape[0] // 2,) * m.ndim] = False  # the target is never a restart
    return np.ascontiguousarray(m.ravel(), dtype=np.uint8)


class McEstimate(NamedTuple):
    """Sample mean of uncensored move counts with its standard error."""

    mean: float
    stderr: float
    replicates: int
    censored: int
    seed: int

    def z_score(self, target):
        return (self.mean - target) / self.stderr if self.stderr > 0 else math.inf * np.sign(self.mean - target)


def _run(d, strategy, replicates, cap, seed, backend, threads):
    mask, B, outside = strategy.compile()
    x0 = strategy.x0
    if any(abs(c) > B for c in x0) and strategy.kind != "never":
        raise ConfigError("x0 lies outside the strategy's mask box", "montecarlo")
    kern = get_backend(backend)
    if threads is None:
        threads = thread_count()
    return kern.simulate_walks(
        np.asarray(x0, dtype=np.int64), mask, int(B), bool(outside),
        int(seed) & 0xFFFFFFFFFFFFFFFF, 0, int(replicates), int(cap), int(threads),
    )


def simulate_strategy(d, z, x0, strategy, replicates, cap=None, seed=0, backend=None, threads=None):
    """Estimate the expected number of moves to reach z under ``strategy``.

    Parameters
    ----------
    d : int
    z : point
        Target; only the origin is supported (translate otherwise).
    x0 : point
        Must match ``strategy.x0``.
    replicates : int
    cap : int, optional
        Moves after which a replicate is censored; default ``1e8 * d``.
    seed : int
        Master seed for the per-replicate substreams.

    Returns
    -------
    McEstimate
    """
    x0 = as_point(x0, d)
    if any(as_point(z, d)):
        raise ConfigError("only the origin is supported as target", "montecarlo")
    if x0 != strategy.x0:
        raise ConfigError("x0 differs from the strategy's restart point", "montecarlo")
    if replicates < 1:
        raise ConfigError("replicates must be >= 1", "montecarlo")
    cap = int(1e8 * d) if cap is None else int(cap)
    if cap < 1:
        raise ConfigError("step cap must be >= 1", "montecarlo")
    moves, censored = _run(d, strategy, replicates, cap, seed, backend, threads)
    return _summarize(moves, censored, seed)


def _summarize(moves, censored, seed):
    ok = censored == 0
    n = int(ok.sum())
    if n == 0:
        raise EstimateUnusableError(f"all {len(moves)} replicates were censored")
    x = moves[ok].astype(np.float64)
    mean = float(x.mean())
    se = float(x.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return McEstimate(mean, se, len(moves), int(len(moves) - n), int(seed))


class ComparisonRow(NamedTuple):
    name: str
    estimate: McEstimate
    diff_from_best: float  # paired mean difference to the first row
    diff_stderr: float


def compare_strategies(strategies, d, x0, replicates, cap=None, seed=0, backend=None, threads=None):
    """Simulate several strategies on common random numbers, sorted by mean.

    Replicate i of every strategy uses the same substream, so paired
    differences have reduced variance.  Returns a list of ComparisonRow with
    the paired difference (and its standard error) against the best row.
    """
    if len(strategies) < 2:
        raise ConfigError("compare_strategies needs at least two strategies", "montecarlo")
    x0 = as_point(x0, d)
    cap = int(1e8 * d) if cap is None else int(cap)
    runs = []
    for s in strategies:
        if s.x0 != x0:
            raise ConfigError(f"strategy {s.name!r} restarts to a different point", "montecarlo")
        moves, cens = _run(d, s, replicates, cap, seed, backend, threads)
        runs.append((s.name, moves, cens, _summarize(moves, cens, seed)))
    runs.sort(key=lambda r: r[3].mean)
    _, m0, c0, _ = runs[0]
    rows = []
    for name, m, c, est in runs:
        both = (c == 0) & (c0 == 0)
        diff = (m[both] - m0[both]).astype(np.float64)
        if len(diff) > 1:
            rows.append(ComparisonRow(name, est, float(diff.mean()), float(diff.std(ddof=1) / math.sqrt(len(diff)))))
        else:
            rows.append(ComparisonRow(name, est, math.nan, math.nan))
    return rows
