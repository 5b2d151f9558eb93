"""Picard iteration for the linear error system in Duhamel form.

With ``lam = 1 - v0^2`` the iteration is

    Fv^{k+1}(t) = int_0^t e^{lam (t-s)} g_1(t-s) * [c Fv^k - Fw^k + phi3](s) ds
    Fw^{k+1}(t) = eps int_0^t e^{-eps gamma (t-s)} g_rho(t-s) * [Fv^{k+1} + J0](s) ds

with ``c = v0^2 - (v0+V)^2 + phi1``. Time integrals use the trapezoidal rule
on a uniform step, propagating the running integral with the exact weight
and heat kernel. The time step must keep the kernel resolved on the grid
(``2 dt >~ dx^2``); otherwise the sampled kernel degenerates to a delta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Union

import numpy as np

from ..model import Equilibrium, ModelParams
from ..source import SourceParams
from .grid import Grid, Trajectory, TrajectoryInterpolant
from .heat import heat_propagate
from .systems import SourceOnGrid, _error_coeffs


class ContractionError(RuntimeError):
    pass


@dataclass
class PicardResult:
    trajectory: Trajectory
    distances: List[float] = field(default_factory=list)
    alpha: float = float("nan")

    @property
    def ratios(self) -> List[float]:
        d = self.distances
        return [d[k + 1] / d[k] for k in range(len(d) - 1) if d[k] > 0]


def _duhamel(source_terms: np.ndarray, rate: float, sigma: float, dt: float, grid: Grid) -> np.ndarray:
    out = np.zeros_like(source_terms)
    decay = math.exp(rate * dt)
    y = np.zeros(source_terms.shape[1])
    for n in range(source_terms.shape[0] - 1):
        y = decay * heat_propagate(y + 0.5 * dt * source_terms[n], sigma, dt, grid) \
            + 0.5 * dt * source_terms[n + 1]
        out[n + 1] = y
    return out


def picard_linear_error(model: ModelParams, source: SourceParams, eq: Equilibrium,
                        V_trajectory: Union[Trajectory, Callable], grid: Grid, T: float,
                        n_iters: int, dt: float, tol_floor: float = 1e-13) -> PicardResult:
    """Run ``n_iters`` Picard sweeps; ``distances[k]`` is ||Fv^{k+1} - Fv^k||_Y."""
    from ..experiments.linear import compute_alpha

    if n_iters < 0:
        raise ValueError("n_iters must be >= 0")
    n_t = int(round(T / dt))
    dt = T / n_t
    times = dt * np.arange(n_t + 1)
    V_ref = TrajectoryInterpolant(V_trajectory) if isinstance(V_trajectory, Trajectory) else V_trajectory

    sg = SourceOnGrid(source, grid)
    npts = grid.n_points
    coef = np.empty((n_t + 1, npts))
    phi3 = np.empty((n_t + 1, npts))
    J0 = np.empty((n_t + 1, npts))
    Vs = np.empty((n_t + 1, npts))
    for n, t in enumerate(times):
        V = V_ref(t)[0]
        Vs[n] = V
        J0[n], c, phi1, _, phi3[n] = _error_coeffs(sg, eq.v0, V, t)
        coef[n] = eq.v0 ** 2 - c * c + phi1

    M = abs(source.a) / source.d1 ** 2 + abs(source.b) / source.d2 ** 2
    alpha = compute_alpha(Trajectory(times, Vs, np.zeros_like(Vs)), M, eq, model.gamma)

    Fv = np.zeros((n_t + 1, npts))
    Fw = np.zeros((n_t + 1, npts))
    distances = []
    lam = 1.0 - eq.v0 ** 2
    for k in range(n_iters):
        Fv_new = _duhamel(coef * Fv - Fw + phi3, lam, 1.0, dt, grid)
        Fw_new = model.epsilon * _duhamel(Fv_new + J0, -model.epsilon * model.gamma, model.rho, dt, grid)
        d = float(np.max(np.abs(Fv_new - Fv)))
        distances.append(d)
        scale = max(float(np.max(np.abs(Fv_new))), 1e-300)
        if len(distances) >= 2 and d > distances[-2] and d > tol_floor * scale:
            raise ContractionError(
                f"Picard distance grew from {distances[-2]:.3e} to {d:.3e} at iterate {k + 1}")
        Fv, Fw = Fv_new, Fw_new

    traj = Trajectory(times, Fv, Fw, {"tag": "linear_error_picard", "dt": dt, "n_iters": n_iters})
    return PicardResult(traj, distances, alpha)
