"""Hot-kernel dispatch.

The Ryser permanent dominates runtime for the matching backend, so it has a
compiled implementation (Cython) and a vectorized numpy fallback. The
compiled kernel is used when the extension was built; set
EXPMECH_PURE_PYTHON=1 to force the fallback. ``benchmarks/bench_permanent.py``
compares the two.
"""

import os

import numpy as np

from . import _ryser_py

try:
    from . import _ryser as _compiled
except ImportError:
    _compiled = None

_force_pure = os.environ.get("EXPMECH_PURE_PYTHON", "") == "1"
COMPILED_AVAILABLE = _compiled is not None
ACTIVE_BACKEND = "compiled" if (COMPILED_AVAILABLE and not _force_pure) else "python"
_active = _compiled if ACTIVE_BACKEND == "compiled" else _ryser_py

MAX_PERMANENT_N = _ryser_py.MAX_N


def log_permanent(log_entries):
    """ln(perm(A)) for A = exp(log_entries), via the active backend."""
    a = np.ascontiguousarray(log_entries, dtype=np.float64)
    return _active.log_permanent(a)


def backends():
    """Name -> kernel mapping of every importable backend."""
    out = {"python": _ryser_py.log_permanent}
    if COMPILED_AVAILABLE:
        out["compiled"] = _compiled.log_permanent
    return out
