"""Numba availability switch.

Kernels in :mod:`compdecon.kernels` are written twice: a loop version that
is compiled with ``numba.njit`` and a vectorized numpy version. The compiled
path is used when numba imports cleanly and ``COMPDECON_DISABLE_NUMBA`` is
unset (or ``0``). The flag is read once at import time.
"""

import os

_flag = os.environ.get("COMPDECON_DISABLE_NUMBA", "0").strip().lower()
DISABLED = _flag not in ("", "0", "false", "no")

try:
    if DISABLED:
        raise ImportError("numba disabled by COMPDECON_DISABLE_NUMBA")
    import numba

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False


def njit(func):
    """Compile ``func`` in nopython mode, or return None when unavailable."""
    if numba is None:
        return None
    return numba.njit(cache=True, nogil=True, error_model="numpy")(func)
