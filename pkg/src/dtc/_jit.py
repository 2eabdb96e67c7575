"""Numba toggle.

Hot loops are written once as plain Python over numpy arrays. When numba is
importable and ``DTC_DISABLE_NUMBA`` is unset (or ``0``), they are compiled
with ``numba.njit``; otherwise the same functions run interpreted. Both paths
produce bit-identical results.
"""

import os

try:
    import numba
    from numba import types as _nbtypes
    from numba.typed import Dict as _TypedDict
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_disabled = os.environ.get("DTC_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")

USE_NUMBA = numba is not None and not _disabled


def jit(fn):
    if USE_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


def new_edge_index():
    """Empty int64 -> int64 map usable from compiled and interpreted kernels."""
    if USE_NUMBA:
        return _TypedDict.empty(key_type=_nbtypes.int64, value_type=_nbtypes.int64)
    return {}


def backend_name() -> str:
    return f"numba-{numba.__version__}" if USE_NUMBA else "python"
