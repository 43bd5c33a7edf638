"""Quadrature backend selection.

The compiled extension ``cpfsim._kernels`` is preferred when importable;
otherwise the NumPy implementation is used. Set the environment variable
``CPFSIM_PURE_PYTHON=1`` to force the NumPy path (useful for benchmarking
and for debugging the compiled core against its reference).
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("CPFSIM_PURE_PYTHON", "").strip() not in ("", "0"):
    _impl = _kernels_py
    USING_EXTENSION = False
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        USING_EXTENSION = True
    except ImportError:
        _impl = _kernels_py
        USING_EXTENSION = False

volterra_trapezoid = _impl.volterra_trapezoid
two_time_trapezoid = _impl.two_time_trapezoid


def backend_name() -> str:
    return "cython" if USING_EXTENSION else "numpy"
