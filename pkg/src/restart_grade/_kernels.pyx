# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: projected SOR sweeps for the restart Bellman
equation and the restart random-walk simulator."""

import numpy as np
from cython.parallel import prange

from libc.stdint cimport uint64_t, int64_t, uint8_t

BACKEND = "compiled"

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t SALT = 0xD1B54A32D192ED03ULL


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t stream_key(uint64_t seed, uint64_t index) noexcept nogil:
    return mix64(seed ^ mix64(index * GOLDEN + SALT))


cdef void _sweep(double[::1] v, const Py_ssize_t[::1] idx, const Py_ssize_t[::1] off,
                 double g, double omega) noexcept nogil:
    cdef Py_ssize_t i, j, k, m = idx.shape[0], nb = off.shape[0]
    cdef double s, cur, new, twod = <double>nb
    for i in range(m):
        j = idx[i]
        s = v[j + off[0]]
        for k in range(1, nb):
            s = s + v[j + off[k]]
        cur = v[j]
        new = cur + omega * ((1.0 + s / twod) - cur)
        if new > g:
            new = g
        v[j] = new


cdef double _residual(double[::1] v, const Py_ssize_t[::1] idx, const Py_ssize_t[::1] off,
                      double g) noexcept nogil:
    cdef Py_ssize_t i, j, k, m = idx.shape[0], nb = off.shape[0]
    cdef double s, t, r, res = 0.0, twod = <double>nb
    for i in range(m):
        j = idx[i]
        s = v[j + off[0]]
        for k in range(1, nb):
            s = s + v[j + off[k]]
        t = 1.0 + s / twod
        if t > g:
            t = g
        r = v[j] - t
        if r < 0:
            r = -r
        if r > res:
            res = r
    return res


def restart_residual(double[::1] v, const Py_ssize_t[::1] red, const Py_ssize_t[::1] black,
                     const Py_ssize_t[::1] offsets, double g):
    cdef double a, b
    with nogil:
        a = _residual(v, red, offsets, g)
        b = _residual(v, black, offsets, g)
    return a if a > b else b


def restart_psor(double[::1] v, const Py_ssize_t[::1] red, const Py_ssize_t[::1] black,
                 const Py_ssize_t[::1] offsets, double g, double omega, long max_sweeps,
                 double tol, long check_every):
    cdef long sweep = 0
    cdef double res = float("inf"), a, b
    with nogil:
        while sweep < max_sweeps:
            sweep += 1
            _sweep(v, red, offsets, g, omega)
            _sweep(v, black, offsets, g, omega)
            if sweep % check_every == 0 or sweep == max_sweeps:
                a = _residual(v, red, offsets, g)
                b = _residual(v, black, offsets, g)
                res = a if a > b else b
                if res < tol:
                    break
    return sweep, res


cdef int64_t _walk(const int64_t[::1] x0, const uint8_t[::1] mask, const int64_t[::1] strides,
                   int64_t B, int outside_restart, uint64_t state, int64_t cap,
                   int64_t origin_flat, uint8_t* censored) noexcept nogil:
    cdef int64_t c[8]
    cdef Py_ssize_t d = x0.shape[0], a
    cdef uint64_t twod = 2 * d, k
    cdef int64_t steps = 0, flat, ca
    cdef int inside
    for a in range(d):
        c[a] = x0[a]
    censored[0] = 1
    while steps < cap:
        state = state + GOLDEN
        k = ((mix64(state) >> 32) * twod) >> 32
        if k & 1:
            c[k >> 1] -= 1
        else:
            c[k >> 1] += 1
        steps += 1
        inside = 1
        flat = 0
        for a in range(d):
            ca = c[a]
            if ca > B or ca < -B:
                inside = 0
                break
            flat += (ca + B) * strides[a]
        if inside:
            if flat == origin_flat:
                censored[0] = 0
                break
            if mask[flat]:
                for a in range(d):
                    c[a] = x0[a]
        elif outside_restart:
            for a in range(d):
                c[a] = x0[a]
    return steps


def simulate_walks(x0, mask, long B, bint outside_restart, seed, long first, long n,
                   long cap, int threads=1):
    cdef int64_t[::1] x0v = np.ascontiguousarray(x0, dtype=np.int64)
    cdef uint8_t[::1] maskv = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef Py_ssize_t d = x0v.shape[0]
    if d > 8:
        raise ValueError("dimension above 8")
    side = 2 * B + 1
    cdef int64_t[::1] strides = np.array([side ** (d - 1 - k) for k in range(d)], dtype=np.int64)
    cdef int64_t origin_flat = sum(B * s for s in strides)
    moves_arr = np.zeros(n, dtype=np.int64)
    cens_arr = np.zeros(n, dtype=np.uint8)
    cdef int64_t[::1] moves = moves_arr
    cdef uint8_t[::1] cens = cens_arr
    cdef uint64_t useed = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef Py_ssize_t r
    cdef int orst = outside_restart
    for r in prange(n, nogil=True, schedule="static", num_threads=threads):
        moves[r] = _walk(x0v, maskv, strides, B, orst, stream_key(useed, <uint64_t>(first + r)),
                         cap, origin_flat, &cens[r])
    return moves_arr, cens_arr
