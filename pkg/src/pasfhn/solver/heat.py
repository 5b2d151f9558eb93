"""Heat-kernel convolution on the grid.

The kernel is the standard fundamental solution of ``d_t g = sigma d_xx g``,
``exp(-x^2 / (4 sigma t)) / sqrt(4 pi sigma t)``, i.e. a Gaussian of variance
``2 sigma t``. It is sampled on the grid out to 8 standard deviations and
renormalised to unit discrete mass, so constants are preserved exactly.
"""
from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.ndimage import convolve1d

from .grid import Grid

TRUNCATION_SD = 8.0


class KernelTruncationWarning(RuntimeWarning):
    pass


def heat_kernel(sigma: float, t: float, dx: float) -> np.ndarray:
    var = 2.0 * sigma * t
    if var <= 0:
        return np.ones(1)
    half = int(math.ceil(TRUNCATION_SD * math.sqrt(var) / dx))
    s = dx * np.arange(-half, half + 1)
    k = np.exp(-s * s / (2.0 * var))
    return k / k.sum()


def heat_propagate(field, sigma: float, t: float, grid: Grid) -> np.ndarray:
    """Free-space heat flow of ``field`` over time ``t`` with diffusivity ``sigma``.

    Values beyond the grid are taken equal to the end values, which is the
    zero extension for fields that have decayed at the boundary.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    field = np.asarray(field, dtype=float)
    if sigma == 0 or t == 0:
        return field.copy()
    k = heat_kernel(sigma, t, grid.dx)
    if k.size > field.size:
        warnings.warn(f"heat kernel ({k.size} taps) wider than the domain ({field.size} points)",
                      KernelTruncationWarning, stacklevel=2)
    return convolve1d(field, k, mode="nearest")
