"""Contracting rectangles ``[-L, L] x [-S, S]`` for the PAS and error vector fields."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import Equilibrium, ModelParams
from .solver.grid import FieldState, Trajectory
from .source import SourceParams, default_half_extent, envelope, eval_profiles


@dataclass(frozen=True)
class Rectangle:
    L: float
    S: float

    def __post_init__(self):
        if not (self.L > 0 and self.S > 0):
            raise ValueError(f"rectangle half-widths must be positive, got L={self.L}, S={self.S}")

    def as_record(self) -> dict:
        return {"L": self.L, "S": self.S}


def in_D_Delta(rect: Rectangle, v0: float, gamma: float, Delta: float) -> bool:
    """Membership in the closed-form subset of D(Delta)."""
    if not v0 < -1:
        raise ValueError("requires v0 < -1")
    L, S = rect.L, rect.S
    gap = v0 * v0 - 1.0
    ratio = S / L
    if not (0 < L < abs(v0)):
        return False
    if not (1.0 / gamma < ratio < gap):
        return False
    bound = (gap - ratio) / (Delta * Delta * (-v0 - L) / (L * L) + (-v0 - L / 3.0))
    return bool(L < bound)


def aspect_for(v0: float, gamma: float) -> float:
    """S/L = (1 + e)/gamma with e half of the admissible slack."""
    slack = gamma * (v0 * v0 - 1.0) - 1.0
    if slack <= 0:
        raise ValueError("requires v0^2 - 1 > 1/gamma")
    return (1.0 + 0.5 * slack) / gamma


def find_rectangle(v0: float, gamma: float, Delta: float, bound: float,
                   max_halvings: int = 60) -> Optional[Rectangle]:
    """Geometric shrink from ``0.9 min(|v0|, bound)`` until the rectangle is certified.

    Returns None when no size in the halving sequence fits below ``bound``
    (Delta too large for that neighbourhood).
    """
    if not v0 * v0 - 1.0 > 1.0 / gamma:
        raise ValueError("requires v0^2 - 1 > 1/gamma")
    if not bound > 0:
        raise ValueError("bound must be positive")
    k = aspect_for(v0, gamma)
    L = 0.9 * min(abs(v0), bound)
    for _ in range(max_halvings):
        S = k * L
        if max(L, S) <= bound and in_D_Delta(Rectangle(L, S), v0, gamma, Delta):
            return Rectangle(L, S)
        L *= 0.5
    return None


def empirical_delta_star(v0: float, gamma: float, bound: float, tol: float = 1e-6) -> float:
    """Largest Delta for which ``find_rectangle`` succeeds (bisection; empirical)."""
    lo, hi = 0.0, 1.0
    while find_rectangle(v0, gamma, hi, bound) is not None:
        lo, hi = hi, 2 * hi
        if hi > 1e6:
            return math.inf
    while hi - lo > tol * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if find_rectangle(v0, gamma, mid, bound) is not None:
            lo = mid
        else:
            hi = mid
    return lo


# ------------------------------------------------------------ face sampling

def _face_points(rect: Rectangle, n_face: int):
    """(V, W, n1, n2) for points on the four faces, corners included on both sides."""
    L, S = rect.L, rect.S
    sv = np.linspace(-L, L, n_face)
    sw = np.linspace(-S, S, n_face)
    pts = []
    pts += [(v, S, 0.0, 1.0) for v in sv]
    pts += [(v, -S, 0.0, -1.0) for v in sv]
    pts += [(L, w, 1.0, 0.0) for w in sw]
    pts += [(-L, w, -1.0, 0.0) for w in sw]
    return pts


def pas_field(V, W, env, v0: float, epsilon: float, gamma: float):
    """Vector field H of the partially averaged system."""
    h1 = (1 - v0 * v0) * V - env * (V + v0) - v0 * V * V - V ** 3 / 3.0 - W
    return h1, epsilon * (V - gamma * W)


def error_field(Rv, Rw, V, Fv, phi1, phi2, v0: float, epsilon: float, gamma: float):
    """Vector field X of the nonlinear remainder system."""
    c = 1.0 - (v0 + V) ** 2 + phi1
    S = Rv + Fv
    x1 = c * Rv - Rv ** 3 / 3.0 - Rw - Rv * Rv * Fv - Rv * Fv * Fv - Fv ** 3 / 3.0 + phi2 * S * S
    return x1, epsilon * (Rv - gamma * Rw)


@dataclass
class ErrorFieldSamples:
    """Sampled (x, t) values of V, F_v, phi1, phi2 feeding the field X."""

    V: np.ndarray
    Fv: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray


def sample_points(source: SourceParams, half_extent: float, x_samples: int = 2001,
                  t_samples: int = 200, T: Optional[float] = None):
    """x over [-X, X] plus the source centres; t with ``t_samples`` per beat period."""
    x = np.union1d(np.linspace(-half_extent, half_extent, x_samples), [0.0, source.x0])
    period = 2 * math.pi / source.eta
    T = period if T is None else T
    nt = max(2, int(math.ceil(t_samples * T / period)) + 1)
    t = np.linspace(0.0, T, nt)
    return x, t


def face_flux_margin(field: str, rect: Rectangle, model: ModelParams, equilibrium: Equilibrium,
                     source: Optional[SourceParams] = None, x_samples: int = 2001,
                     t_samples: int = 200, T: Optional[float] = None, aux=None,
                     half_extent: Optional[float] = None, n_face: int = 33,
                     x_jitter=None) -> float:
    """Max of n . field over the faces and the sampled (x, t); negative certifies.

    ``field`` is "H" (PAS) or "X" (remainder). For "X" pass ``aux`` as an
    :class:`ErrorFieldSamples`. ``x_jitter`` (array of offsets) perturbs the
    interior x samples for seeded randomised checks.
    """
    v0, eps, gam = equilibrium.v0, model.epsilon, model.gamma
    pts = _face_points(rect, n_face)
    if field == "H":
        if source is None:
            raise ValueError("field H needs the source parameters")
        X = half_extent if half_extent is not None else default_half_extent(source)
        x, t = sample_points(source, X, x_samples, t_samples, T)
        if x_jitter is not None:
            x = np.union1d(x + np.resize(x_jitter, x.size), [0.0, source.x0])
        f = eval_profiles(source, x)
        env = envelope(f.A[:, None], f.B[:, None], source.eta, t[None, :]).ravel()
        best = -math.inf
        for V, W, n1, n2 in pts:
            h1, h2 = pas_field(V, W, env, v0, eps, gam)
            best = max(best, float(np.max(n1 * h1 + n2 * h2)))
        return best
    if field == "X":
        if aux is None:
            raise ValueError("field X needs ErrorFieldSamples in aux")
        V, Fv, p1, p2 = (np.ravel(a) for a in (aux.V, aux.Fv, aux.phi1, aux.phi2))
        best = -math.inf
        for Rv, Rw, n1, n2 in pts:
            x1, x2 = error_field(Rv, Rw, V, Fv, p1, p2, v0, eps, gam)
            best = max(best, float(np.max(n1 * x1 + n2 * x2)))
        return best
    raise ValueError(f"unknown field {field!r}")


# ------------------------------------------------------------ invariance

def gauge_norm(state: FieldState, rect: Rectangle) -> float:
    """Smallest r with every grid value of the state inside r R."""
    if state.u1.size == 0:
        return 0.0
    return float(max(np.max(np.abs(state.u1)) / rect.L, np.max(np.abs(state.u2)) / rect.S))


@dataclass
class InvarianceReport:
    invariant: bool
    max_gauge: float
    first_exit_time: Optional[float]

    def as_record(self) -> dict:
        return {"invariant": self.invariant, "max_gauge": self.max_gauge,
                "first_exit_time": self.first_exit_time}


class InvarianceMonitor:
    """Online version of :func:`monitor_invariance`; pass as a simulate observer."""

    def __init__(self, rect: Rectangle, tol: float = 1e-6):
        self.rect, self.tol = rect, tol
        self.max_gauge = 0.0
        self.first_exit_time = None

    def __call__(self, state: FieldState):
        g = gauge_norm(state, self.rect)
        if g > self.max_gauge:
            self.max_gauge = g
        if self.first_exit_time is None and g > 1.0 + self.tol:
            self.first_exit_time = state.t

    def report(self) -> InvarianceReport:
        return InvarianceReport(self.first_exit_time is None, self.max_gauge, self.first_exit_time)


def monitor_invariance(trajectory: Trajectory, rect: Rectangle, tol: float = 1e-6) -> InvarianceReport:
    mon = InvarianceMonitor(rect, tol)
    for state in trajectory:
        mon(state)
    return mon.report()


# ------------------------------------------------------------ error rectangle

@dataclass(frozen=True)
class ErrorRectangleInputs:
    C1: float
    C2: float
    C3: float
    eps_margin: float
    v0: float
    gamma: float

    def __post_init__(self):
        if min(self.C1, self.C2, self.C3) < 0 or not self.eps_margin > 0 or not self.gamma > 0:
            raise ValueError("C1, C2, C3 must be nonnegative and eps_margin, gamma positive")
        if not self.v0 ** 2 - 1 - (1 + self.eps_margin) / self.gamma > 0:
            raise ValueError("requires v0^2 - 1 - (1 + eps_margin)/gamma > 0")


@dataclass(frozen=True)
class ErrorRectangle:
    P: float
    Q: float
    R: float
    L_hat: float
    degenerate: bool = False

    def rectangle(self, inputs: ErrorRectangleInputs) -> Optional[Rectangle]:
        if self.L_hat <= 0:
            return None
        return Rectangle(self.L_hat, (1 + inputs.eps_margin) * self.L_hat / inputs.gamma)


def error_rectangle_pqr(inp: ErrorRectangleInputs):
    a = abs(inp.v0)
    C1, C2, C3 = inp.C1, inp.C2, inp.C3
    K = a + C1 + 1.0
    P = C3 ** 3 / 3.0 + K * C3 ** 2
    Q = (inp.v0 ** 2 - 1.0 - (1.0 + inp.eps_margin) / inp.gamma) \
        - ((2 * a + C1) * C1 + C2 + C3 ** 2 + 2 * K * C3)
    R = K + C3
    return P, Q, R


def error_rectangle(inputs: ErrorRectangleInputs) -> Optional[ErrorRectangle]:
    """Smaller root of ``P - Q L + R L^2``, or None if Q <= 0 or 4PR >= Q^2.

    The root is evaluated as ``2P / (Q + sqrt(Q^2 - 4PR))``, which equals
    ``(Q - sqrt(Q^2 - 4PR)) / (2R)`` without the cancellation for small P.
    """
    P, Q, R = error_rectangle_pqr(inputs)
    if not Q > 0:
        return None
    disc = Q * Q - 4.0 * P * R
    if not disc > 0:
        return None
    L_hat = 2.0 * P / (Q + math.sqrt(disc))
    return ErrorRectangle(P, Q, R, L_hat, degenerate=(P == 0.0))
