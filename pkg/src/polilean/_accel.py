"""Kernel backend selection.

Hot loops are written once as plain Python over numpy arrays and compiled with
numba when it is available.  Setting ``POLILEAN_BACKEND=numpy`` (or
``POLILEAN_DISABLE_NUMBA=1``) runs the interpreted fallback instead; a few
kernels register a vectorised numpy replacement for that path.

The backend is fixed at import time.  Compare both paths by running the same
code in two processes (see ``benchmarks/bench_kernels.py``).
"""
from __future__ import annotations

import os

_requested = os.environ.get("POLILEAN_BACKEND", "numba").strip().lower()
if os.environ.get("POLILEAN_DISABLE_NUMBA", "").strip() not in ("", "0"):
    _requested = "numpy"

try:
    if _requested == "numpy":
        raise ImportError
    import numba

    NUMBA_ENABLED = True
except ImportError:
    numba = None
    NUMBA_ENABLED = False

BACKEND = "numba" if NUMBA_ENABLED else "numpy"


def kernel(fn=None, *, fallback=None, parallel=False):
    """Compile ``fn`` with numba, or return ``fallback`` (default ``fn``).

    Kernels release the GIL so callers may fan them out over threads.
    """

    def wrap(f):
        if NUMBA_ENABLED:
            return numba.njit(cache=True, nogil=True, parallel=parallel)(f)
        return fallback if fallback is not None else f

    if fn is None:
        return wrap
    return wrap(fn)


def default_threads() -> int:
    env = os.environ.get("POLILEAN_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1
