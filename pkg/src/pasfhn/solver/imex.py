"""Crank-Nicolson diffusion with a Heun predictor-corrector for the reaction.

One step from ``t`` to ``t + dt``, per component with diffusivity ``s``::

    M = I - (s dt / 2) D,   B = I + (s dt / 2) D
    u*    = M^-1 [B u + dt R(u, t)]
    u_new = M^-1 [B u + dt/2 (R(u, t) + R(u*, t + dt))]

``D`` is the 3-point Laplacian; the end nodes keep their initial values
(homogeneous Dirichlet in centered variables). The scheme is second order
in both dt and dx.
"""
from __future__ import annotations

import logging
import math
import warnings
from typing import Callable, Optional

import numpy as np

from . import kernels
from .grid import BlowUpError, ConfigurationError, FieldState, Grid, Trajectory
from .systems import SystemSpec

log = logging.getLogger(__name__)

# Heun is stable for real negative rates with |lambda dt| <= 2
HEUN_STABILITY = 2.0


class StabilityWarning(RuntimeWarning):
    pass


class ImexStepper:
    """Pre-factored stepper for one system on one grid with a fixed ``dt``."""

    def __init__(self, spec: SystemSpec, grid: Grid, dt: float, backend: Optional[str] = None,
                 check_every: int = 1):
        if not dt > 0:
            raise ConfigurationError("dt must be positive")
        self.spec, self.grid, self.dt = spec, grid, dt
        self.backend = backend or kernels.backend_name()
        self.check_every = max(1, int(check_every))
        self._count = 0
        n = grid.n_points
        self._solvers = []
        self._half_alpha = []
        for s in spec.diffusivities:
            if s > 0:
                alpha = s * dt / grid.dx ** 2
                self._solvers.append(kernels.make_tridiag(*kernels.cn_matrix(n, alpha), backend=self.backend))
                self._half_alpha.append(0.5 * alpha)
            else:
                self._solvers.append(None)
                self._half_alpha.append(0.0)
        self._rhs = [np.empty(n), np.empty(n)]
        self._work = np.empty(n)
        if spec.stiffness * dt > HEUN_STABILITY:
            warnings.warn(f"dt={dt:.3g} exceeds the explicit reaction stability bound "
                          f"~{HEUN_STABILITY / spec.stiffness:.3g} for system {spec.tag!r}",
                          StabilityWarning, stacklevel=2)

    def _solve(self, k, vec):
        solver = self._solvers[k]
        if solver is None:
            return vec
        return solver.solve(vec)

    def advance(self, t: float, u1: np.ndarray, u2: np.ndarray):
        """Return (u1, u2) at ``t + dt``; inputs are not modified."""
        spec, dt = self.spec, self.dt
        t1 = t + dt
        p = u1 - spec.lift(t) if spec.lift is not None else u1
        comps = (p, u2)
        r0 = spec.reaction(p, u2, t)
        base = []
        pred = []
        for k in range(2):
            if self._solvers[k] is None:
                b = comps[k]
            else:
                b = kernels.cn_apply(comps[k], self._half_alpha[k], self._rhs[k], backend=self.backend)
            base.append(b)
            v = b + dt * r0[k]
            v[0], v[-1] = comps[k][0], comps[k][-1]
            pred.append(self._solve(k, v))
        r1 = spec.reaction(pred[0], pred[1], t1)
        out = []
        for k in range(2):
            v = base[k] + (0.5 * dt) * (r0[k] + r1[k])
            v[0], v[-1] = comps[k][0], comps[k][-1]
            out.append(self._solve(k, v))
        if spec.lift is not None:
            out[0] = out[0] + spec.lift(t1)
        self._count += 1
        if self._count % self.check_every == 0:
            if not (math.isfinite(out[0].sum()) and math.isfinite(out[1].sum())):
                raise BlowUpError(t1)
        return out[0], out[1]

    def step(self, state: FieldState) -> FieldState:
        u1, u2 = self.advance(state.t, state.u1, state.u2)
        return FieldState(state.t + self.dt, u1, u2)


def step_imex(state: FieldState, dt: float, spec: SystemSpec, grid: Grid) -> FieldState:
    """Single step; builds the factorisation each call, use ``ImexStepper`` in loops."""
    if state.u1.size != grid.n_points:
        raise ConfigurationError("state does not live on the grid")
    state.check_finite()
    return ImexStepper(spec, grid, dt).step(state)


def n_steps_for(T: float, dt: float) -> int:
    n = int(round(T / dt))
    if abs(n * dt - T) > 1e-9 * max(1.0, T):
        n = int(math.ceil(T / dt))
    return max(n, 1)


def simulate(spec: SystemSpec, grid: Grid, initial: FieldState, T: float, dt: float,
             sample_every: int = 1, observer: Optional[Callable] = None,
             backend: Optional[str] = None) -> Trajectory:
    """Integrate from ``initial.t`` over a duration ``T``.

    ``dt`` is shrunk slightly if needed so an integer number of steps lands
    on ``T``. ``observer(state)`` is called after every step (not only at
    samples) and is how running sup-norms are collected cheaply.
    """
    if initial.u1.size != grid.n_points:
        raise ConfigurationError("initial state does not live on the grid")
    if T <= 0:
        raise ConfigurationError("T must be positive")
    initial.check_finite()
    n = n_steps_for(T, dt)
    dt = T / n
    t0 = initial.t
    for ref in spec.coupled:
        covers = getattr(ref, "covers", None)
        if covers is not None and not covers(t0, t0 + T):
            raise ConfigurationError(
                f"coupled trajectory does not cover [{t0}, {t0 + T}] for system {spec.tag!r}")
    stepper = ImexStepper(spec, grid, dt, backend=backend)
    sample_every = max(1, int(sample_every))
    times = [t0]
    s1 = [initial.u1.copy()]
    s2 = [initial.u2.copy()]
    u1, u2 = initial.u1, initial.u2
    for k in range(1, n + 1):
        t = t0 + (k - 1) * dt
        u1, u2 = stepper.advance(t, u1, u2)
        tk = t0 + k * dt
        if observer is not None:
            observer(FieldState(tk, u1, u2))
        if k % sample_every == 0 or k == n:
            times.append(tk)
            s1.append(u1.copy())
            s2.append(u2.copy())
    meta = {"tag": spec.tag, "dt": dt, "n_steps": n, "sample_every": sample_every,
            "half_extent": grid.half_extent, "n_points": grid.n_points, "backend": stepper.backend}
    return Trajectory(times, np.array(s1), np.array(s2), meta)
