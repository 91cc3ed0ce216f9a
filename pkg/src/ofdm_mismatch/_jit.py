"""Numba switch for the hot kernels.

Set ``OFDM_MISMATCH_NUMBA=0`` in the environment before import to force the
pure-numpy code paths (useful for debugging and for the kernel benchmark).
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAS_NUMBA = numba is not None
USE_NUMBA = HAS_NUMBA and os.environ.get("OFDM_MISMATCH_NUMBA", "1").strip().lower() not in (
    "0",
    "false",
    "no",
    "off",
)


def njit(func):
    """Compile ``func`` in nopython mode, or return it untouched without numba."""
    if not HAS_NUMBA:
        return func
    return numba.njit(cache=True)(func)
