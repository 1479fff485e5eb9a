"""Pure Python / numpy implementations of the hot kernels.

Arithmetic is written in the same order as the compiled versions so the two
backends agree bit for bit on identical inputs.
"""

import numpy as np

from .rng import MASK64, GOLDEN, direction, mix64, stream_key

BACKEND = "python"


def _sweep_color(v, idx, gathers, twod, g, omega):
    s = v[gathers[0]]
    for gi in gathers[1:]:
        s = s + v[gi]
    cur = v[idx]
    new = cur + omega * ((1.0 + s / twod) - cur)
    v[idx] = np.minimum(new, g)


def _color_gathers(idx, offsets):
    return [idx + o for o in offsets]


def restart_residual(v, red, black, offsets, g):
    """sup |v - min(g, 1 + mean over neighbours of v)| over the free sites."""
    twod = len(offsets)
    res = 0.0
    for idx in (red, black):
        if len(idx) == 0:
            continue
        s = v[idx + offsets[0]]
        for o in offsets[1:]:
            s = s + v[idx + o]
        target = np.minimum(1.0 + s / twod, g)
        res = max(res, float(np.max(np.abs(v[idx] - target))))
    return res


def restart_psor(v, red, black, offsets, g, omega, max_sweeps, tol, check_every):
    """Projected SOR for v = min(g, 1 + mean of v over neighbours).

    Red sites are swept first, then black; within a colour no site depends
    on another, so the vectorised update equals the sequential one.
    Returns ``(sweeps, residual)``.
    """
    twod = len(offsets)
    rg = _color_gathers(red, offsets)
    bg = _color_gathers(black, offsets)
    res = float("inf")
    sweep = 0
    while sweep < max_sweeps:
        sweep += 1
        if len(red):
            _sweep_color(v, red, rg, twod, g, omega)
        if len(black):
            _sweep_color(v, black, bg, twod, g, omega)
        if sweep % check_every == 0 or sweep == max_sweeps:
            res = restart_residual(v, red, black, offsets, g)
            if res < tol:
                break
    return sweep, res


def simulate_walks(x0, mask, B, outside_restart, seed, first, n, cap, threads=1):
    """Run ``n`` restart walks (replicates ``first .. first+n-1``).

    Returns ``(moves, censored)`` arrays indexed by replicate.
    """
    d = len(x0)
    twod = 2 * d
    side = 2 * B + 1
    strides = [side ** (d - 1 - k) for k in range(d)]
    origin_flat = sum(B * s for s in strides)
    moves = np.zeros(n, dtype=np.int64)
    censored = np.zeros(n, dtype=np.uint8)
    x0 = [int(c) for c in x0]
    for r in range(n):
        state = stream_key(seed, first + r)
        c = list(x0)
        steps = 0
        hit = False
        while steps < cap:
            state = (state + GOLDEN) & MASK64
            k = direction(mix64(state), twod)
            axis = k >> 1
            c[axis] += -1 if k & 1 else 1
            steps += 1
            inside = True
            flat = 0
            for a in range(d):
                ca = c[a]
                if ca > B or ca < -B:
                    inside = False
                    break
                flat += (ca + B) * strides[a]
            if inside:
                if flat == origin_flat:
                    hit = True
                    break
                if mask[flat]:
                    c = list(x0)
            elif outside_restart:
                c = list(x0)
        moves[r] = steps
        censored[r] = 0 if hit else 1
    return moves, censored
