"""O(1/omega1) approximation study of the full system by the PAS.

For each omega1 the full system, the PAS and the linear error system are
advanced in lockstep on one grid with one step. Running this way gives

* errors measured at every step, not only at stored samples;
* the PAS and error systems see V exactly at the step nodes, with no
  interpolation of a stored trajectory;
* the PAS time-stepping error is common to both sides of the comparison.
"""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from ..model import Equilibrium, ModelParams, equilibrium_for
from ..rectangles import InvarianceMonitor, Rectangle
from ..solver.grid import BlowUpError, FieldState, Grid, Trajectory
from ..solver.imex import ImexStepper, n_steps_for
from ..solver.systems import (SourceOnGrid, full_system, linear_error_system,
                              nonlinear_error_system, pas_system)
from ..source import SourceParams, sup_amplitude
from .linear import check_small_data, compute_alpha
from .oscillatory import fit_slope

log = logging.getLogger(__name__)


class SweepBlowUp(BlowUpError):
    """Blow-up inside a sweep; ``omega1`` names the failing point."""

    def __init__(self, omega1: float, t: float):
        super().__init__(t, f"blow-up at omega1={omega1:g}, t={t:.6g}")
        self.omega1 = omega1


class _StepReference:
    """(V, W) at the two ends of the current step, linear in between."""

    def __init__(self):
        self.t0 = self.t1 = 0.0
        self.a = self.b = None

    def set(self, t0, a, t1, b):
        self.t0, self.a, self.t1, self.b = t0, a, t1, b

    def covers(self, t0, t1):
        return True

    def __call__(self, t):
        if t <= self.t0:
            return self.a
        if t >= self.t1:
            return self.b
        s = (t - self.t0) / (self.t1 - self.t0)
        return ((1 - s) * self.a[0] + s * self.b[0], (1 - s) * self.a[1] + s * self.b[1])


@dataclass
class PointResult:
    omega1: float
    error_v: float
    error_w: float
    fv_ynorm: float
    alpha: float
    small_data_ok: bool
    small_data_slack: tuple
    invariant: Optional[bool]
    max_gauge: Optional[float]
    v_stats: dict
    e_crosscheck: Optional[float]
    n_steps: int
    dt: float
    wall_time: float

    @property
    def fv_scaled(self) -> float:
        return self.fv_ynorm * self.omega1


@dataclass
class SweepResult:
    omega_values: np.ndarray
    errors_v: np.ndarray
    errors_w: np.ndarray
    fitted_order: float
    fitted_order_w: float = float("nan")
    points: List[PointResult] = field(default_factory=list)

    def __post_init__(self):
        self.omega_values = np.asarray(self.omega_values, dtype=float)
        self.errors_v = np.asarray(self.errors_v, dtype=float)
        self.errors_w = np.asarray(self.errors_w, dtype=float)
        n = self.omega_values.size
        if n < 3 or self.errors_v.size != n or self.errors_w.size != n:
            raise ValueError("sweep needs at least 3 omega values and matching error sequences")
        if np.any(np.diff(self.omega_values) <= 0):
            raise ValueError("omega_values must be strictly increasing")

    @property
    def alphas(self) -> np.ndarray:
        return np.array([p.alpha for p in self.points])

    @property
    def fv_scaled(self) -> np.ndarray:
        return np.array([p.fv_scaled for p in self.points])

    @property
    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.errors_v) < 0))

    def rows(self):
        """(omega1, error_v, error_w, alpha, Fv_ynorm_times_omega) per point."""
        return [(p.omega1, p.error_v, p.error_w, p.alpha, p.fv_scaled) for p in self.points]


def fit_order(omegas, errors) -> float:
    """Decay order p in error ~ omega^-p (negated log-log slope)."""
    errors = np.asarray(errors, dtype=float)
    if np.any(errors <= 0):
        return float("nan")
    return -fit_slope(omegas, errors)


def trajectory_stats(traj: Trajectory, grid: Grid) -> dict:
    """sup|V|, sup|d_x V| (centred differences), sup|d_t V| (sample difference quotients)."""
    V = np.asarray(traj.u1)
    out = {"sup_V": float(np.max(np.abs(V))),
           "sup_dxV": float(np.max(np.abs(np.gradient(V, grid.dx, axis=1)))) if V.shape[1] > 1 else 0.0,
           "sup_dtV": 0.0, "sample_interval": float("nan")}
    if len(traj) > 1:
        dts = np.diff(traj.times)
        out["sup_dtV"] = float(np.max(np.abs(np.diff(V, axis=0)) / dts[:, None]))
        out["sample_interval"] = float(np.max(dts))
    return out


def run_point(model: ModelParams, source: SourceParams, grid: Grid, V_init, W_init, T: float,
              n_per_period: int = 40, store_interval: float = 0.05, rect: Optional[Rectangle] = None,
              crosscheck: bool = False, eq: Optional[Equilibrium] = None,
              backend: Optional[str] = None) -> PointResult:
    """One omega1 of the study; see the module docstring."""
    start = time.perf_counter()
    eq = eq or equilibrium_for(model)
    v0, w0 = eq.v0, eq.w0
    dt = 2 * math.pi / (source.omega2 * n_per_period)
    n = n_steps_for(T, dt)
    dt = T / n
    ref = _StepReference()
    full = ImexStepper(full_system(model, source, eq, grid), grid, dt, backend)
    pas = ImexStepper(pas_system(model, source, eq, grid), grid, dt, backend)
    lin = ImexStepper(linear_error_system(model, source, eq, grid, ref), grid, dt, backend)
    nonlin = (ImexStepper(nonlinear_error_system(model, source, eq, grid, ref), grid, dt, backend)
              if crosscheck else None)
    sg = SourceOnGrid(source, grid)

    V = np.array(V_init, dtype=float)
    W = np.array(W_init, dtype=float)
    f = v0 + V + sg.J0(0.0)
    g = w0 + W
    Fv = np.zeros_like(V)
    Fw = np.zeros_like(V)
    Ev = np.zeros_like(V)
    Ew = np.zeros_like(V)
    monitor = InvarianceMonitor(rect) if rect is not None else None
    if monitor is not None:
        monitor(FieldState(0.0, V, W))
    store_every = max(1, int(round(store_interval / dt)))
    times, Vs, Ws = [0.0], [V.copy()], [W.copy()]
    err_v = err_w = fv_norm = cross = 0.0
    t = 0.0
    try:
        for k in range(1, n + 1):
            t1 = k * dt
            V1, W1 = pas.advance(t, V, W)
            ref.set(t, (V, W), t1, (V1, W1))
            f, g = full.advance(t, f, g)
            Fv, Fw = lin.advance(t, Fv, Fw)
            V, W, t = V1, W1, t1
            Ev_direct = f - (v0 + V + sg.J0(t))
            err_v = max(err_v, float(np.max(np.abs(Ev_direct))))
            err_w = max(err_w, float(np.max(np.abs(g - (w0 + W)))))
            fv_norm = max(fv_norm, float(np.max(np.abs(Fv))))
            if nonlin is not None:
                Ev, Ew = nonlin.advance(t - dt, Ev, Ew)
                cross = max(cross, float(np.max(np.abs(Ev - Ev_direct))))
            if monitor is not None:
                monitor(FieldState(t, V, W))
            if k % store_every == 0 or k == n:
                times.append(t)
                Vs.append(V.copy())
                Ws.append(W.copy())
    except BlowUpError as exc:
        raise SweepBlowUp(source.omega1, exc.t) from exc
    traj = Trajectory(times, np.array(Vs), np.array(Ws))
    M = sup_amplitude(source)
    alpha = compute_alpha(traj, M, eq, model.gamma)
    small = check_small_data(traj, M, model.gamma, model.beta)
    rep = monitor.report() if monitor is not None else None
    wall = time.perf_counter() - start
    log.info("omega1=%g: error_v=%.3e error_w=%.3e |Fv|*omega=%.3e (%d steps, %.1fs)",
             source.omega1, err_v, err_w, fv_norm * source.omega1, n, wall)
    return PointResult(source.omega1, err_v, err_w, fv_norm, alpha, small.ok, small.slack,
                       rep.invariant if rep else None, rep.max_gauge if rep else None,
                       trajectory_stats(traj, grid), cross if crosscheck else None, n, dt, wall)


def _run_point_args(args):
    return run_point(*args[0], **args[1])


def approximation_study(model: ModelParams, source: SourceParams, omega_list: Sequence[float],
                        T: float, grid: Grid, initial, rect: Optional[Rectangle] = None,
                        n_per_period: int = 40, store_interval: float = 0.05,
                        crosscheck: bool = False, workers: int = 1,
                        backend: Optional[str] = None) -> SweepResult:
    """Sweep omega1 over ``omega_list`` with eta fixed; ``initial`` is (V0, W0) on the grid."""
    omegas = [float(o) for o in omega_list]
    if len(omegas) < 3 or any(b <= a for a, b in zip(omegas, omegas[1:])):
        raise ValueError("omega_list needs at least 3 strictly increasing values")
    V0, W0 = (initial.u1, initial.u2) if isinstance(initial, FieldState) else initial
    eq = equilibrium_for(model)
    jobs = [((model, source.with_omega(om), grid, V0, W0, T),
             dict(n_per_period=n_per_period, store_interval=store_interval, rect=rect,
                  crosscheck=crosscheck, eq=eq, backend=backend)) for om in omegas]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_run_point_args, jobs))
    else:
        points = [_run_point_args(j) for j in jobs]
    ev = [p.error_v for p in points]
    ew = [p.error_w for p in points]
    return SweepResult(omegas, ev, ew, fit_order(omegas, ev), fit_order(omegas, ew), points)
