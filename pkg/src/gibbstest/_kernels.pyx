# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops.  ``_kernels_py`` mirrors every function here with the
same floating-point operation order, so both backends return identical bits
for the integer/summation kernels."""

import numpy as np

from libc.stdint cimport uint64_t
from libc.math cimport fabs

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL
cdef double TWO_M53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline Py_ssize_t pick(const double[::1] cdf, double u) noexcept nogil:
    cdef Py_ssize_t k, last = cdf.shape[0] - 1
    for k in range(last):
        if u < cdf[k]:
            return k
    return last


def perron(const double[:, ::1] m, double tol, long maxiter):
    """Shifted power iteration; returns ``(rho, vector, iterations)``.

    ``iterations == -1`` signals that ``maxiter`` was exhausted.
    """
    cdef Py_ssize_t d = m.shape[0], i, j
    cdef double[::1] x = np.ones(d)
    cdef double[::1] y = np.empty(d)
    cdef double c, lo = 1e308, hi = 0.0, s, norm, diff, num, den
    cdef long it, used = -1
    for i in range(d):
        s = 0.0
        for j in range(d):
            s += m[i, j]
        lo = min(lo, s)
        hi = max(hi, s)
    c = 0.5 * (lo + hi)
    if c <= 0.0:
        c = 1.0
    with nogil:
        for it in range(maxiter):
            norm = 0.0
            for i in range(d):
                s = c * x[i]
                for j in range(d):
                    s = s + m[i, j] * x[j]
                y[i] = s
                if s > norm:
                    norm = s
            diff = 0.0
            for i in range(d):
                y[i] = y[i] / norm
                s = fabs(y[i] - x[i])
                if y[i] > 0.0:
                    s = s / y[i]
                diff = max(diff, s)
                x[i] = y[i]
            if diff <= tol:
                used = it + 1
                break
        num = 0.0
        den = 0.0
        for i in range(d):
            s = 0.0
            for j in range(d):
                s = s + m[i, j] * x[j]
            num = num + s
            den = den + x[i]
    return num / den, np.asarray(x), used


def enumerate_words(const double[::1] pi0, const double[:, ::1] t0,
                    const double[::1] pi1, const double[:, ::1] t1,
                    const double[:, ::1] v, long n):
    """Statistic sum and both word probabilities for every word of length n+1,
    in lexicographic order."""
    cdef Py_ssize_t d = pi0.shape[0], total = d ** (n + 1), idx, i, k
    sums_a = np.empty(total)
    p0_a = np.empty(total)
    p1_a = np.empty(total)
    cdef double[::1] sums = sums_a, p0 = p0_a, p1 = p1_a
    cdef long[::1] digits = np.zeros(n + 1, dtype=np.int_)
    cdef double[::1] ps = np.zeros(n + 1), q0 = np.zeros(n + 1), q1 = np.zeros(n + 1)
    with nogil:
        k = 0
        for idx in range(total):
            if k == 0:
                ps[0] = 0.0
                q0[0] = pi0[digits[0]]
                q1[0] = pi1[digits[0]]
                k = 1
            for i in range(k, n + 1):
                ps[i] = ps[i - 1] + v[digits[i - 1], digits[i]]
                q0[i] = q0[i - 1] * t0[digits[i], digits[i - 1]]
                q1[i] = q1[i - 1] * t1[digits[i], digits[i - 1]]
            sums[idx] = ps[n]
            p0[idx] = q0[n]
            p1[idx] = q1[n]
            k = n
            while k >= 0 and digits[k] == d - 1:
                digits[k] = 0
                k -= 1
            if k < 0:
                break
            digits[k] += 1
    return sums_a, p0_a, p1_a


def simulate_sums(const double[:, ::1] v, const double[::1] cdf0,
                  const double[:, ::1] cdft, const long[::1] checkpoints,
                  uint64_t base, long start, double[:, ::1] out):
    """Fill ``out[r, k]`` with the statistic sum after ``checkpoints[k]``
    transitions for replicas ``start .. start + out.shape[0] - 1``."""
    cdef Py_ssize_t reps = out.shape[0], nk = checkpoints.shape[0], r, k, cur, nxt
    cdef long step, nmax = checkpoints[nk - 1]
    cdef uint64_t state
    cdef double total, u
    with nogil:
        for r in range(reps):
            state = mix64(base + <uint64_t>(start + r + 1) * GAMMA)
            state = state + GAMMA
            u = <double>(mix64(state) >> 11) * TWO_M53
            cur = pick(cdf0, u)
            total = 0.0
            k = 0
            for step in range(1, nmax + 1):
                state = state + GAMMA
                u = <double>(mix64(state) >> 11) * TWO_M53
                nxt = pick(cdft[cur], u)
                total = total + v[cur, nxt]
                cur = nxt
                if step == checkpoints[k]:
                    out[r, k] = total
                    k += 1


def walk(const double[::1] cdf0, const double[:, ::1] cdft, long length,
         uint64_t base, long replica):
    """One path of ``length`` symbols from the stream of ``replica``."""
    path_a = np.empty(length, dtype=np.int_)
    cdef long[::1] path = path_a
    cdef uint64_t state
    cdef double u
    cdef long i
    with nogil:
        state = mix64(base + <uint64_t>(replica + 1) * GAMMA)
        state = state + GAMMA
        u = <double>(mix64(state) >> 11) * TWO_M53
        path[0] = pick(cdf0, u)
        for i in range(1, length):
            state = state + GAMMA
            u = <double>(mix64(state) >> 11) * TWO_M53
            path[i] = pick(cdft[path[i - 1]], u)
    return path_a
