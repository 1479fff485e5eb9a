"""Optimal-restart hitting times ("grades") of simple random walk on Z^d.

The grade gamma(x, 0) is the least expected number of moves needed to reach
the origin from x when the walker may jump back to x, for free, after any
move.  This package computes it exactly on truncated lattices, bounds it
through discrete harmonic functions, simulates restart strategies, treats
hitting times on lattice disks and evaluates the Brownian analogues.
"""

from .bounds import (
    EnvelopePair,
    GradeBounds,
    asymptotic_grade,
    fit_envelope,
    fit_envelope_2d,
    fit_envelope_d,
    grade_bounds,
    h_star,
)
from .cache import TableCache
from .continuum import BmProblem, bm_grade, bm_grade_quadrature, bm_gradient_sq, bm_h
from .disk import (
    DiskReport,
    asymptotic_disk,
    boundary_sets,
    disk_report,
    effective_resistance,
    solve_hitting_times,
    tno_bounds,
)
from .errors import (
    BracketError,
    ConfigError,
    DomainTooSmallError,
    EnvelopeError,
    EstimateUnusableError,
    NumericFailureError,
    OutOfTableError,
    RestartGradeError,
)
from .grade import (
    GradeSolution,
    RestartProblem,
    evaluate_policy,
    extract_strategy,
    restart_value_iteration,
    solve_grade,
    threshold_gap,
)
from .harmonic import (
    B_CONST,
    EULER_GAMMA,
    HarmonicProfile,
    PotentialTable,
    build_profile,
    escape_probability,
    green_table,
    local_variance,
    potential_kernel,
)
from .kernels import compiled_available, get_backend
from .lattice import Domain, LatticePoint, disk_points, neighbors, norm
from .montecarlo import McEstimate, StrategySpec, compare_strategies, simulate_strategy

__all__ = [name for name in dir() if not name.startswith("_")]
