"""Numba switch for the hot kernels.

Every kernel in :mod:`trajmatch.kernels` is written in the subset of Python
that numba compiles. Setting ``TRAJMATCH_NO_JIT=1`` (or running without numba
installed) leaves them as plain Python/numpy functions, which is slower but
numerically the same algorithm.
"""

import os

_FLAG = os.environ.get("TRAJMATCH_NO_JIT", "").strip().lower()
_DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError
    import numba

    JIT_ENABLED = True
    if "NUMBA_THREADING_LAYER" not in os.environ:
        # probe TBB last: old system TBB builds only produce a warning
        numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
except ImportError:
    numba = None
    JIT_ENABLED = False


def njit(*args, parallel=False, **kwargs):
    """``numba.njit`` when enabled, identity decorator otherwise.

    The undecorated function stays reachable as ``.py_func`` in both modes so
    tests can compare the compiled and interpreted paths.
    """

    def wrap(fn):
        if not JIT_ENABLED:
            fn.py_func = fn
            return fn
        return numba.njit(cache=False, nogil=True, parallel=parallel, **kwargs)(fn)

    if len(args) == 1 and callable(args[0]):
        return wrap(args[0])
    return wrap


if JIT_ENABLED:
    prange = numba.prange
else:
    prange = range
