"""Backend selection for the compiled kernels.

Numba is used when it imports cleanly and ``SUPERRADAR_DISABLE_NUMBA`` is
unset (or ``0``). Otherwise every kernel falls back to its numpy path.
"""

import os

_flag = os.environ.get("SUPERRADAR_DISABLE_NUMBA", "0").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError("numba disabled by SUPERRADAR_DISABLE_NUMBA")
    import numba

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False


def jit_options():
    # fastmath stays off: the kernels compare floats for ties and thresholds
    return dict(cache=True, nogil=True, fastmath=False, error_model="numpy")


def njit(func):
    """``numba.njit`` with the package options, or the plain function."""
    if HAVE_NUMBA:
        return numba.njit(**jit_options())(func)
    return func


def backend_name():
    return "numba" if HAVE_NUMBA else "numpy"
