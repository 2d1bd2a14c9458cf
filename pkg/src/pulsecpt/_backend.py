"""Numba / pure-numpy backend selection.

Set ``PULSECPT_DISABLE_NUMBA=1`` before import to run every kernel through
the plain numpy path (useful for debugging and for platforms without numba).
"""

import os

_FALSY = ("", "0", "false", "no", "off")

DISABLED_BY_ENV = os.environ.get("PULSECPT_DISABLE_NUMBA", "").strip().lower() not in _FALSY

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

USE_NUMBA = numba is not None and not DISABLED_BY_ENV
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(func):
    """``numba.njit(cache=True, nogil=True)`` when enabled, identity otherwise."""
    if USE_NUMBA:
        return numba.njit(cache=True, nogil=True)(func)
    return func
