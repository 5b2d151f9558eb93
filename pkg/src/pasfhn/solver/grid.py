from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np


class BlowUpError(FloatingPointError):
    def __init__(self, t: float, message: str = ""):
        super().__init__(message or f"non-finite state at t={t:.6g}")
        self.t = t


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [-X, X]; both end nodes are Dirichlet nodes."""

    half_extent: float
    n_points: int

    def __post_init__(self):
        if not self.half_extent > 0:
            raise ConfigurationError("half_extent must be positive")
        if self.n_points < 3:
            raise ConfigurationError("n_points must be at least 3")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_extent / (self.n_points - 1)

    @cached_property
    def x(self) -> np.ndarray:
        return np.linspace(-self.half_extent, self.half_extent, self.n_points)

    def refined(self) -> "Grid":
        """Same extent, spacing halved (every old node is kept)."""
        return Grid(self.half_extent, 2 * self.n_points - 1)


@dataclass
class FieldState:
    t: float
    u1: np.ndarray
    u2: np.ndarray

    def __post_init__(self):
        self.u1 = np.asarray(self.u1, dtype=float)
        self.u2 = np.asarray(self.u2, dtype=float)
        if self.u1.shape != self.u2.shape or self.u1.ndim != 1:
            raise ConfigurationError("u1 and u2 must be 1-D arrays of equal length")

    def check_finite(self):
        if not (np.isfinite(self.u1).all() and np.isfinite(self.u2).all()):
            raise BlowUpError(self.t)

    def copy(self) -> "FieldState":
        return FieldState(self.t, self.u1.copy(), self.u2.copy())

    @classmethod
    def zeros(cls, grid: Grid, t: float = 0.0) -> "FieldState":
        return cls(t, np.zeros(grid.n_points), np.zeros(grid.n_points))


class Trajectory:
    """Sampled states ``(times[k], u1[k], u2[k])``; read-only once built."""

    def __init__(self, times, u1, u2, meta: Optional[dict] = None):
        # private copies so freezing them never touches the caller's arrays
        self.times = np.array(times, dtype=float)
        self.u1 = np.array(u1, dtype=float)
        self.u2 = np.array(u2, dtype=float)
        if self.u1.shape != self.u2.shape or self.u1.shape[0] != self.times.size:
            raise ConfigurationError("inconsistent trajectory shapes")
        for a in (self.times, self.u1, self.u2):
            a.setflags(write=False)
        self.meta = dict(meta or {})

    def __len__(self):
        return self.times.size

    def __getitem__(self, k) -> FieldState:
        return FieldState(float(self.times[k]), self.u1[k], self.u2[k])

    def __iter__(self):
        for k in range(len(self)):
            yield self[k]

    @classmethod
    def from_states(cls, states, meta=None) -> "Trajectory":
        states = list(states)
        return cls([s.t for s in states], np.array([s.u1 for s in states]),
                   np.array([s.u2 for s in states]), meta)

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def component(self, which: int) -> np.ndarray:
        if which == 1:
            return self.u1
        if which == 2:
            return self.u2
        raise ValueError("component must be 1 or 2")


class TrajectoryInterpolant:
    """Piecewise-linear-in-time evaluation of a stored trajectory."""

    def __init__(self, traj: Trajectory, slack: float = 1e-9):
        if len(traj) < 1:
            raise ConfigurationError("empty coupled trajectory")
        self.traj = traj
        self.slack = slack
        self.t_start = float(traj.times[0])
        self.t_end = float(traj.times[-1])

    def covers(self, t0: float, t1: float) -> bool:
        return self.t_start - self.slack <= t0 and t1 <= self.t_end + self.slack

    def __call__(self, t: float):
        tr = self.traj
        if not self.covers(t, t):
            raise ConfigurationError(
                f"coupled trajectory covers [{self.t_start}, {self.t_end}], requested t={t}")
        if len(tr) == 1:
            return tr.u1[0], tr.u2[0]
        k = int(np.searchsorted(tr.times, t, side="right")) - 1
        k = min(max(k, 0), len(tr) - 2)
        t0, t1 = tr.times[k], tr.times[k + 1]
        s = (t - t0) / (t1 - t0)
        s = min(max(s, 0.0), 1.0)
        if s == 0.0:
            return tr.u1[k], tr.u2[k]
        if s == 1.0:
            return tr.u1[k + 1], tr.u2[k + 1]
        return ((1 - s) * tr.u1[k] + s * tr.u1[k + 1], (1 - s) * tr.u2[k] + s * tr.u2[k + 1])


def y_norm(traj: Trajectory, component: int = 1) -> float:
    """sup over samples and grid points of |u_component|."""
    data = traj.component(component)
    if data.size == 0:
        raise ValueError("empty trajectory")
    return float(np.max(np.abs(data)))
