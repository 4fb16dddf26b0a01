"""Backend selection for the compiled kernels.

Set ``STIRMIX_NUMBA=0`` to force the pure-numpy implementations.
"""
from __future__ import annotations

import os

_FLAG = os.environ.get("STIRMIX_NUMBA", "1").strip().lower()

try:  # pragma: no cover - depends on the environment
    import numba as _numba
except ImportError:  # pragma: no cover
    _numba = None

NUMBA_AVAILABLE = _numba is not None
USE_NUMBA = NUMBA_AVAILABLE and _FLAG not in ("0", "false", "no", "off")


def njit(fn):
    """Compile ``fn`` with numba when available, else return it unchanged."""
    if not NUMBA_AVAILABLE:
        return fn
    return _numba.njit(cache=True, fastmath=False, nogil=True)(fn)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
