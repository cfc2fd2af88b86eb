"""Backend selection for the numeric kernels.

Numba is used when it imports cleanly and ``CDSBENCH_DISABLE_NUMBA`` is not
set to a truthy value; otherwise every kernel runs its pure-numpy twin.
"""

import os

_FALSE = {"", "0", "false", "no", "off"}

DISABLED = os.environ.get("CDSBENCH_DISABLE_NUMBA", "").strip().lower() not in _FALSE

try:
    if DISABLED:
        raise ImportError("disabled by CDSBENCH_DISABLE_NUMBA")
    import numba

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` when available, else an identity decorator."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda func: func


def backend():
    return "numba" if HAVE_NUMBA else "numpy"


def worker_count(default=1):
    """Worker count from ``CDSBENCH_WORKERS``, falling back to ``default``."""
    raw = os.environ.get("CDSBENCH_WORKERS")
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        return default
    return max(1, value)
