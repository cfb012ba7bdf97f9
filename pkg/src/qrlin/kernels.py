"""Kernel selection: compiled extension when importable, numpy otherwise.

Set ``QRLIN_PURE_PYTHON=1`` to force the numpy fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"

if os.environ.get("QRLIN_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _kernels_py
else:
    _impl = _kernels_py

hermite_eval = _impl.hermite_eval
hermite_solve = _impl.hermite_solve
fourier_eval = _impl.fourier_eval
fourier_solve = _impl.fourier_solve

__all__ = ["BACKEND", "hermite_eval", "hermite_solve", "fourier_eval", "fourier_solve"]
