"""Optional numba compilation.

Set ``NLPLASMON_NO_NUMBA=1`` to run every kernel as plain Python/numpy.
The flag is read once at import time.
"""
import os

__all__ = ["NUMBA_ENABLED", "jit"]


def _numba_requested():
    return os.environ.get("NLPLASMON_NO_NUMBA", "").strip().lower() not in ("1", "true", "yes", "on")


NUMBA_ENABLED = False
if _numba_requested():
    try:
        import numba

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover
        NUMBA_ENABLED = False


def jit(func):
    """``numba.njit(cache=True)`` when enabled, identity otherwise."""
    if NUMBA_ENABLED:
        return numba.njit(cache=True)(func)
    return func
