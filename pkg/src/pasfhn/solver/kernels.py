"""Inner loops of the Crank-Nicolson / Heun stepper.

Two interchangeable backends:

* ``numba``  -- Thomas sweeps and stencils compiled with ``@njit``;
* ``numpy``  -- vectorised stencil plus LAPACK ``gttrf``/``gttrs`` for the
  pre-factored tridiagonal solve.

Set ``PASFHN_DISABLE_NUMBA=1`` (or have numba missing) to force the numpy path.
Both paths are kept importable so the benchmark can compare them in-process.
"""
from __future__ import annotations

import os

import numpy as np
from scipy.linalg import lapack

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

NUMBA_AVAILABLE = numba is not None
_DISABLED = os.environ.get("PASFHN_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")
USE_NUMBA = NUMBA_AVAILABLE and not _DISABLED


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------- numpy path

class NumpyTridiag:
    """Constant tridiagonal matrix factored once with LAPACK ``gttrf``."""

    def __init__(self, lower, diag, upper):
        dl, d, du, du2, ipiv, info = lapack.dgttrf(lower, diag, upper)
        if info != 0:
            raise np.linalg.LinAlgError(f"gttrf failed with info={info}")
        self._f = (dl, d, du, du2, ipiv)

    def solve(self, rhs, out=None):
        x, info = lapack.dgttrs(*self._f, rhs)
        if out is None:
            return x
        out[:] = x
        return out


def cn_apply_numpy(u, half_alpha, out):
    out[1:-1] = u[1:-1] + half_alpha * (u[:-2] - 2.0 * u[1:-1] + u[2:])
    out[0] = u[0]
    out[-1] = u[-1]
    return out


def laplacian_numpy(u, inv_dx2, out):
    out[1:-1] = (u[:-2] - 2.0 * u[1:-1] + u[2:]) * inv_dx2
    out[0] = 0.0
    out[-1] = 0.0
    return out


# ---------------------------------------------------------------- numba path

if NUMBA_AVAILABLE:
    _jit = numba.njit(cache=True, fastmath=False, nogil=True)

    @_jit
    def _thomas_factor(lower, diag, upper):
        n = diag.size
        cp = np.empty(n)
        inv_m = np.empty(n)
        inv_m[0] = 1.0 / diag[0]
        cp[0] = upper[0] * inv_m[0]
        for i in range(1, n):
            m = diag[i] - lower[i - 1] * cp[i - 1]
            inv_m[i] = 1.0 / m
            cp[i] = upper[i] * inv_m[i] if i < n - 1 else 0.0
        return cp, inv_m

    @_jit
    def _thomas_solve(lower, cp, inv_m, rhs, out):
        n = rhs.size
        out[0] = rhs[0] * inv_m[0]
        for i in range(1, n):
            out[i] = (rhs[i] - lower[i - 1] * out[i - 1]) * inv_m[i]
        for i in range(n - 2, -1, -1):
            out[i] -= cp[i] * out[i + 1]
        return out

    @_jit
    def cn_apply_numba(u, half_alpha, out):
        n = u.size
        out[0] = u[0]
        out[n - 1] = u[n - 1]
        for i in range(1, n - 1):
            out[i] = u[i] + half_alpha * (u[i - 1] - 2.0 * u[i] + u[i + 1])
        return out

    @_jit
    def laplacian_numba(u, inv_dx2, out):
        n = u.size
        out[0] = 0.0
        out[n - 1] = 0.0
        for i in range(1, n - 1):
            out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv_dx2
        return out

    class NumbaTridiag:
        def __init__(self, lower, diag, upper):
            self.lower = np.ascontiguousarray(lower, dtype=np.float64)
            self.cp, self.inv_m = _thomas_factor(self.lower, np.ascontiguousarray(diag, dtype=np.float64),
                                                 np.ascontiguousarray(upper, dtype=np.float64))

        def solve(self, rhs, out=None):
            if out is None:
                out = np.empty_like(rhs)
            return _thomas_solve(self.lower, self.cp, self.inv_m, rhs, out)


def make_tridiag(lower, diag, upper, backend=None):
    backend = backend or backend_name()
    if backend == "numba":
        if not NUMBA_AVAILABLE:
            raise RuntimeError("numba backend requested but numba is not installed")
        return NumbaTridiag(lower, diag, upper)
    return NumpyTridiag(lower, diag, upper)


def cn_apply(u, half_alpha, out, backend=None):
    """``(I + alpha/2 D) u`` with the two end rows left untouched."""
    if (backend or backend_name()) == "numba":
        return cn_apply_numba(u, half_alpha, out)
    return cn_apply_numpy(u, half_alpha, out)


def laplacian(u, inv_dx2, out, backend=None):
    if (backend or backend_name()) == "numba":
        return laplacian_numba(u, inv_dx2, out)
    return laplacian_numpy(u, inv_dx2, out)


def cn_matrix(n: int, alpha: float):
    """Diagonals of ``I - alpha/2 D`` with identity rows pinning both ends."""
    lower = np.full(n - 1, -0.5 * alpha)
    upper = np.full(n - 1, -0.5 * alpha)
    diag = np.full(n, 1.0 + alpha)
    diag[0] = diag[-1] = 1.0
    upper[0] = 0.0
    lower[-1] = 0.0
    return lower, diag, upper
