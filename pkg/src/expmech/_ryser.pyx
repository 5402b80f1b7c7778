# cython: language_level=3
"""Compiled Ryser kernel: log-permanent of an entrywise-exponentiated matrix.

Gray-code subset iteration with Kahan-compensated accumulation of the
signed inclusion-exclusion terms. Row maxima are factored out first so the
working entries sit in (0, 1] regardless of how large the log-entries are.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log


def log_permanent(cnp.ndarray[cnp.float64_t, ndim=2] log_entries):
    """Return ln(perm(A)) for A[i, j] = exp(log_entries[i, j]).

    Exact up to floating point rounding; O(2^n * n) time, n capped at 20.
    """
    cdef Py_ssize_t n = log_entries.shape[0]
    if log_entries.shape[1] != n:
        raise ValueError("log_permanent needs a square matrix")
    if n == 0:
        return 0.0
    if n > 20:
        raise ValueError("log_permanent capped at n=20 (got %d)" % n)

    cdef cnp.ndarray[cnp.float64_t, ndim=2] b = np.empty((n, n), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.zeros(n, dtype=np.float64)
    cdef double shift_total = 0.0
    cdef double m, v
    cdef Py_ssize_t i, j

    for i in range(n):
        m = log_entries[i, 0]
        for j in range(1, n):
            v = log_entries[i, j]
            if v > m:
                m = v
        shift_total += m
        for j in range(n):
            b[i, j] = exp(log_entries[i, j] - m)

    cdef unsigned long long k, gray, prev_gray = 0, mask, tmp
    cdef unsigned long long total = (<unsigned long long>1) << n
    cdef double acc = 0.0, comp = 0.0, term, y, t
    cdef Py_ssize_t bit
    cdef int popcnt = 0

    for k in range(1, total):
        gray = k ^ (k >> 1)
        mask = gray ^ prev_gray
        bit = 0
        tmp = mask
        while not (tmp & 1):
            tmp >>= 1
            bit += 1
        if gray & mask:
            popcnt += 1
            for i in range(n):
                x[i] += b[i, bit]
        else:
            popcnt -= 1
            for i in range(n):
                x[i] -= b[i, bit]
        prev_gray = gray

        term = 1.0
        for i in range(n):
            term *= x[i]
        if (n - popcnt) & 1:
            term = -term

        y = term - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t

    if not acc > 0.0:
        raise ArithmeticError(
            "permanent accumulation collapsed to %r (catastrophic cancellation)" % acc
        )
    return shift_total + log(acc)
