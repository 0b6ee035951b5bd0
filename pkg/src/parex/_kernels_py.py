"""NumPy/LAPACK implementation of the tridiagonal kernels.

Same contract as the compiled ``_kernels`` module; used when the extension
is not built or ``PAREX_PURE_PYTHON=1`` is set.
"""
import numpy as np
from scipy import linalg
from scipy.linalg import lapack

from .errors import SingularMatrixError

BACKEND = "python"


def factor(diag, off):
    diag = np.ascontiguousarray(diag, dtype=float)
    off = np.ascontiguousarray(off, dtype=float)
    n = diag.shape[0]
    scale = np.abs(diag).max() if n else 0.0
    # Pivots of the Thomas recursion; the LAPACK factor below uses partial
    # pivoting, so these are computed separately for the singularity check.
    piv = diag[0]
    for i in range(n):
        if i > 0:
            piv = diag[i] - off[i - 1] ** 2 / piv
        if abs(piv) <= 1e-14 * scale or piv == 0.0:
            raise SingularMatrixError(f"pivot {piv!r} underflows at row {i}")
    if n < 3:
        # The f2py dgttrf wrapper mis-sizes its work arrays below n = 3.
        return (linalg.lu_factor(np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)),)
    dl, d, du, du2, ipiv, info = lapack.dgttrf(off.copy(), diag.copy(), off.copy())
    if info != 0:
        raise SingularMatrixError(f"dgttrf failed with info={info}")
    return (dl, d, du, du2, ipiv)


def solve(fac, rhs):
    if len(fac) == 1:
        return linalg.lu_solve(fac[0], np.asarray(rhs, dtype=float))
    x, info = lapack.dgttrs(*fac, np.asarray(rhs, dtype=float))
    if info != 0:
        raise SingularMatrixError(f"dgttrs failed with info={info}")
    return x


def matvec(diag, off, x):
    out = diag * x
    out[1:] += off * x[:-1]
    out[:-1] += off * x[1:]
    return out


def euler_chain(fac, stiff_diag, stiff_off, v0, loads):
    out = np.empty_like(loads)
    prev = v0
    inc = None
    for k in range(loads.shape[0]):
        inc = solve(fac, loads[k] - matvec(stiff_diag, stiff_off, prev))
        out[k] = prev + inc
        prev = out[k]
    return out, inc


def hat_load(gq, w_left, w_right):
    left = np.einsum("eq,eq->e", gq, w_left)
    right = np.einsum("eq,eq->e", gq, w_right)
    return right[:-1] + left[1:]
