"""Backend selection for the tridiagonal kernels.

The compiled extension is preferred; set ``PAREX_PURE_PYTHON=1`` to force
the NumPy/LAPACK fallback.
"""
import os

if os.environ.get("PAREX_PURE_PYTHON") == "1":
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = _impl.BACKEND
factor = _impl.factor
solve = _impl.solve
matvec = _impl.matvec
euler_chain = _impl.euler_chain
hat_load = _impl.hat_load

__all__ = ["BACKEND", "factor", "solve", "matvec", "euler_chain", "hat_load"]
