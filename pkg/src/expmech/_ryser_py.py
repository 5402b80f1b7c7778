"""Numpy fallback for the Ryser log-permanent kernel.

Same contract as the compiled version: subsets are processed in chunks of
bit masks so the work stays vectorized, and chunk totals are combined with
math.fsum to keep the signed inclusion-exclusion sum accurate.
"""

import math

import numpy as np

MAX_N = 20
_CHUNK_BITS = 14


def log_permanent(log_entries):
    """Return ln(perm(A)) for A[i, j] = exp(log_entries[i, j])."""
    a = np.ascontiguousarray(log_entries, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("log_permanent needs a square matrix")
    n = a.shape[0]
    if n == 0:
        return 0.0
    if n > MAX_N:
        raise ValueError("log_permanent capped at n=%d (got %d)" % (MAX_N, n))

    shifts = a.max(axis=1)
    b = np.exp(a - shifts[:, None])  # entries in (0, 1], one 1 per row

    total = 1 << n
    cols = np.arange(n, dtype=np.uint64)
    chunk = min(total, 1 << _CHUNK_BITS)
    partials = []
    for start in range(1, total, chunk):
        ks = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        grays = ks ^ (ks >> np.uint64(1))
        masks = ((grays[:, None] >> cols[None, :]) & np.uint64(1)).astype(np.float64)
        rowsums = masks @ b.T
        terms = rowsums.prod(axis=1)
        odd = (n - masks.sum(axis=1)) % 2 == 1
        terms[odd] = -terms[odd]
        partials.append(float(terms.sum()))
    acc = math.fsum(partials)

    if not acc > 0.0:
        raise ArithmeticError(
            "permanent accumulation collapsed to %r (catastrophic cancellation)" % acc
        )
    return float(shifts.sum()) + math.log(acc)
