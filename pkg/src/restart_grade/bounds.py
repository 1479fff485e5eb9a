"""Upper and lower bounds on the grade from a harmonic profile h.

If g_-(xi) <= V_h(x) <= g_+(xi) for every edge (x, y) and every xi between
h(x) and h(y), then

    int_0^h(x) 2s / g_+(s) ds  <=  gamma(x, 0)  <=  int_0^h*(x) 2s / g_-(s) ds.

Envelopes have the form g_pm(s) = base(s) (1 pm C_pm corr(s)):

* planar:    base = exp(-2(s - b)) / 2,                  corr = exp(-s)
* transient: base = ((d-2)^2/d) t^((2d-2)/(d-2)),         corr = t^(1/(d-2)),
             with t = h_inf - s

C_+ and C_- are fitted separately as the smallest values valid on every edge
of the profile box (C = max(C_+, C_-) is the single constant that makes both
hold).  Where the raw lower envelope is nonpositive or too small it is
replaced by a positive floor constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate
from scipy.optimize import brentq

from .errors import EnvelopeError, NumericFailureError, OutOfTableError
from .harmonic import (
    B_CONST,
    EULER_GAMMA,
    _inner,
    _shifted,
    escape_probability,
    local_variance_field,
    unit_ball_volume,
)
from .lattice import as_point

#: second-order constant of the planar asymptotic, 2 gamma_e + 3 log 2 - 1
PLANAR_CONSTANT = 2 * EULER_GAMMA + 3 * math.log(2.0) - 1


@dataclass
class EnvelopePair:
    """Evaluable lower/upper envelopes for the local variance.

    ``floor_break`` is s_1: for s < s_1 the lower envelope equals
    ``floor_value``; beyond it the raw formula applies.
    """

    family: str  # "planar", "transient" or "constant"
    d: int
    C_plus: float = 0.0
    C_minus: float = 0.0
    b: float = B_CONST
    h_inf: float | None = None
    value: float = 1.0  # constant family only
    floor_value: float = 0.0
    floor_break: float = 0.0

    @classmethod
    def constant(cls, value, d=1):
        """g_- = g_+ = value, e.g. V_h = 1 for h = |x| on Z."""
        return cls("constant", d, value=float(value))

    @property
    def C(self):
        return max(self.C_plus, self.C_minus)

    @property
    def sup(self):
        return self.h_inf if self.family == "transient" else math.inf

    def _exponents(self):
        d = self.d
        return (d - 2) ** 2 / d, (2 * d - 2) / (d - 2), 1 / (d - 2)

    def base(self, s):
        s = np.asarray(s, dtype=float)
        if self.family == "planar":
            return 0.5 * np.exp(-2.0 * (s - self.b))
        if self.family == "transient":
            k, p, _ = self._exponents()
            return k * (self.h_inf - s) ** p
        return np.full_like(s, self.value)

    def corr(self, s):
        s = np.asarray(s, dtype=float)
        if self.family == "planar":
            return np.exp(-s)
        if self.family == "transient":
            return (self.h_inf - s) ** self._exponents()[2]
        return np.zeros_like(s)

    def upper(self, s):
        return self.base(s) * (1.0 + self.C_plus * self.corr(s))

    def raw_lower(self, s):
        return self.base(s) * (1.0 - self.C_minus * self.corr(s))

    def lower(self, s):
        s = np.asarray(s, dtype=float)
        return np.where(s < self.floor_break, self.floor_value, self.raw_lower(s))

    def raw_lower_peak(self):
        """Location of the maximum of the raw lower envelope (may be < 0)."""
        if self.C_minus <= 0 or self.family == "constant":
            return -math.inf
        if self.family == "planar":
            return math.log(1.5 * self.C_minus)
        _, p, q = self._exponents()
        return self.h_inf - (p / (self.C_minus * (p + q))) ** (1 / q)

    def breakpoints(self, a, b):
        """Interior points where the integrands change character."""
        pts = []
        if a < self.floor_break < b:
            pts.append(self.floor_break)
        if self.family == "transient":
            for k in range(0, 12):
                s = self.h_inf - 10.0 ** (-k)
                if a < s < b:
                    pts.append(s)
        return sorted(pts)


# -- fitting ------------------------------------------------------------------------


def _edges(profile):
    """(V(x), h(x), h(y)) over every edge leaving the box of radius L - 1."""
    h = profile.h.values
    d = h.ndim
    V = local_variance_field(profile).values
    hx = h[_inner(d)]
    out = []
    for axis in range(d):
        for step in (1, -1):
            hy = h[_shifted(d, axis, step)]
            out.append((V, hx, hy))
    V = np.concatenate([e[0].ravel() for e in out])
    hx = np.concatenate([e[1].ravel() for e in out])
    hy = np.concatenate([e[2].ravel() for e in out])
    return V, np.minimum(hx, hy), np.maximum(hx, hy)


def _required_C(env, V, lo, hi):
    """Smallest (C_+, C_-) per edge making each envelope inequality hold."""
    base_hi = env.base(hi)
    with np.errstate(divide="ignore", invalid="ignore"):
        up = (V / base_hi - 1.0) / env.corr(hi)
    if env.family == "planar":
        k = 2.0 * V * math.exp(-2.0 * env.b)
        y = np.clip(1.0 / np.sqrt(3.0 * k), np.exp(lo), np.exp(hi))
        low = y - k * y**3
    else:
        kk, p, q = env._exponents()
        c = V / kk
        t = np.clip((c * (p + q) / q) ** (1 / p), env.h_inf - hi, env.h_inf - lo)
        low = t ** (-q) - c * t ** (-p - q)
    return np.maximum(up, 0.0), np.maximum(low, 0.0)


def _round_up_2sig(C):
    if C <= 0:
        return 0.0
    e = math.floor(math.log10(C)) - 1
    out = float(f"{math.ceil(C / 10.0**e)}e{e}")
    # guard against the division rounding a hair below C
    return out if out >= C else float(f"{math.ceil(C / 10.0**e) + 1}e{e}")


def _fit(env, profile, cap):
    V, lo, hi = _edges(profile)
    for name, req in zip(("C_plus", "C_minus"), _required_C(env, V, lo, hi)):
        need = float(np.max(req))
        if not np.isfinite(need) or need > cap:
            raise EnvelopeError(f"no {name} below {cap:g} (needed {need:g})")
        setattr(env, name, _round_up_2sig(need))
    s_peak = max(env.raw_lower_peak(), 0.0)
    touching = lo <= s_peak
    env.floor_value = 0.5 * float(np.min(V[touching]))
    if env.raw_lower(0.0) >= env.floor_value:
        env.floor_break = 0.0
    elif env.raw_lower(s_peak) <= env.floor_value:
        env.floor_break = s_peak
    else:
        env.floor_break = brentq(lambda s: env.raw_lower(s) - env.floor_value, 0.0, s_peak)
    return env


def fit_envelope_2d(profile, cap=1e8):
    """Fit g_pm(s) = exp(-2(s - b))/2 (1 pm C exp(-s)) to a planar profile."""
    if profile.d != 2:
        raise ValueError("fit_envelope_2d needs a planar profile")
    return _fit(EnvelopePair("planar", 2, b=B_CONST), profile, cap)


def fit_envelope_d(profile, cap=1e8):
    """Fit the transient-case envelopes (d >= 3)."""
    if profile.d < 3 or profile.h_inf is None:
        raise ValueError("fit_envelope_d needs a transient (d >= 3) profile")
    return _fit(EnvelopePair("transient", profile.d, h_inf=profile.h_inf), profile, cap)


def fit_envelope(profile, cap=1e8):
    if profile.d == 1:
        return EnvelopePair.constant(1.0)
    if profile.d == 2:
        return fit_envelope_2d(profile, cap)
    return fit_envelope_d(profile, cap)


def envelope_violations(env, profile, min_norm=0.0, max_norm=math.inf, samples=5, rtol=1e-12):
    """Count edges in the annulus where either envelope inequality fails.

    Both endpoints must satisfy ``min_norm <= |.| <= max_norm``.
    """
    h = profile.h.values
    d = h.ndim
    V = local_variance_field(profile).values
    core_norm = local_variance_field(profile).norms()
    bad = 0
    for axis in range(d):
        for step in (1, -1):
            hx = h[_inner(d)]
            hy = h[_shifted(d, axis, step)]
            coords = local_variance_field(profile).coords().astype(float)
            coords[..., axis] += step
            ny = np.sqrt(np.sum(coords**2, axis=-1))
            sel = (core_norm >= min_norm) & (core_norm <= max_norm)
            sel &= (ny >= min_norm) & (ny <= max_norm)
            lo, hi = np.minimum(hx, hy)[sel], np.maximum(hx, hy)[sel]
            v = V[sel]
            for t in np.linspace(0.0, 1.0, samples):
                xi = lo + t * (hi - lo)
                bad += int(np.sum(env.lower(xi) > v * (1 + rtol)))
                bad += int(np.sum(env.upper(xi) < v * (1 - rtol)))
    return bad


# -- h* and the sandwich ------------------------------------------------------------


def h_star(profile, x):
    """sup h(y) over y adjacent to some w with h(w) <= h(x)."""
    x = as_point(x, profile.d)
    h = profile.h.values
    d = h.ndim
    hx = profile.h[x]
    sub = h <= hx + 1e-12 * max(1.0, abs(hx))
    edge = np.zeros_like(sub)
    for axis in range(d):
        sl = [slice(None)] * d
        sl[axis] = [0, -1]
        edge[tuple(sl)] = True
    if np.any(sub & edge):
        raise OutOfTableError(f"sublevel set of h({tuple(x)}) reaches the table edge")
    reach = sub.copy()
    for axis in range(d):
        reach |= np.roll(sub, 1, axis) | np.roll(sub, -1, axis)
    return float(np.max(h[reach]))


class GradeBounds(NamedTuple):
    lower: float
    upper: float
    floor_part: float = 0.0


def _integrate(f, a, b, points, what):
    if b <= a:
        return 0.0
    val, err = integrate.quad(f, a, b, points=points or None, epsabs=0.0, epsrel=1e-11, limit=400)
    if not abs(err) <= 1e-8 * max(abs(val), 1e-300):
        raise NumericFailureError(f"{what} quadrature error {err:g} on value {val:g}", err, "bounds")
    return val


def _points(env, a, b, kinks):
    return sorted(set(env.breakpoints(a, b)) | {k for k in kinks if a < k < b})


def upper_integral(env, top, weight=None, kinks=()):
    """int_0^top w(s) / g_-(s) ds, split into floor and raw parts.

    ``weight`` defaults to 2s; ``kinks`` lists points where it is not
    smooth.  Returns ``(total, floor_part)``.
    """
    weight = weight or (lambda s: 2.0 * s)
    s1 = min(env.floor_break, top)
    floor = 0.0
    if s1 > 0:
        floor = _integrate(lambda s: weight(s) / env.floor_value, 0.0, s1, _points(env, 0.0, s1, kinks), "floor")
    a = max(env.floor_break, 0.0)
    raw = _integrate(
        lambda s: weight(s) / float(env.raw_lower(s)), a, top, _points(env, a, top, kinks), "upper"
    )
    return floor + raw, floor


def lower_integral(env, top, weight=None, kinks=()):
    weight = weight or (lambda s: 2.0 * s)
    return _integrate(
        lambda s: weight(s) / float(env.upper(s)), 0.0, top, _points(env, 0.0, top, kinks), "lower"
    )


def grade_bounds(profile, env, x):
    """Lower and upper bounds on gamma(x, 0), plus the floor share of the upper."""
    x = as_point(x, profile.d)
    hx = profile.h[x]
    if hx <= 0:
        return GradeBounds(0.0, 0.0, 0.0)
    hs = h_star(profile, x)
    if env.family == "transient" and hs >= env.h_inf:
        raise NumericFailureError("h* reaches h_inf", math.nan, "bounds")
    upper, floor = upper_integral(env, hs)
    return GradeBounds(lower_integral(env, hx), upper, floor)


def asymptotic_grade(x, d=None, p_d=None):
    """Leading asymptotics of the grade on Z^d (d >= 2).

    d = 2: 2|x|^2 log|x| + (2 gamma_e + 3 log 2 - 1)|x|^2;
    d >= 3: (omega_d / p_d) |x|^d, with p_d from a Green table by default.
    """
    if isinstance(x, (int, float)) and d is not None:
        r = float(x)
    else:
        x = as_point(x, d)
        d = x.d
        r = x.norm
    if d == 2:
        return 2 * r * r * math.log(r) + PLANAR_CONSTANT * r * r
    if d >= 3:
        if p_d is None:
            p_d = escape_probability(d)
        return unit_ball_volume(d) / p_d * r**d
    raise ValueError("asymptotic_grade is stated for d >= 2")
