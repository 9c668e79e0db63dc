"""eqcheck: numerical verification of quasi-Einstein structure, curvature
identities and soliton equations on coordinate-chart metrics."""

from __future__ import annotations

__version__ = "0.1.0"

from ._accel import HAS_NUMBA, NUMBA_ENABLED, backend_name
from .expr import Jet3, ScalarExpr, parse_expr

__all__ = [
    "HAS_NUMBA",
    "Jet3",
    "NUMBA_ENABLED",
    "ScalarExpr",
    "__version__",
    "backend_name",
    "parse_expr",
]
