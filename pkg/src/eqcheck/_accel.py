"""Backend selection for accelerated kernels.

Set EQCHECK_NO_NUMBA=1 to force the pure-numpy implementations. Selection is
fixed at import time so a process runs a single backend throughout.
"""

from __future__ import annotations

import os

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        # identity decorator so kernel modules still import
        def wrap(func):
            return func

        if args and callable(args[0]):
            return args[0]
        return wrap


NUMBA_ENABLED = HAS_NUMBA and os.environ.get("EQCHECK_NO_NUMBA", "0") != "1"


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
