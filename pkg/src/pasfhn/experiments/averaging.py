"""Windowed averaging of the pre-averaged right-hand side.

Substituting ``v = V + J0`` into the centered system gives right-hand sides
``psi1, psi2``. Averaging them over one fast period ``[t - pi/w1, t + pi/w1]``
with (V, W) frozen must reproduce the PAS right-hand side up to O(eta/w1).
"""
from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from ..model import Equilibrium, ModelParams
from ..source import SourceParams, envelope, eval_profiles


def window_average(f: Callable, t: float, omega1: float, quad_points: int = 16, panels: int = 4) -> float:
    """Mean of ``f`` over ``[t - pi/omega1, t + pi/omega1]``.

    Composite Gauss-Legendre with ``panels`` sub-intervals of ``quad_points``
    nodes each; ``f`` must accept an array of times.
    """
    if quad_points < 8:
        raise ValueError("quad_points must be at least 8")
    h = math.pi / omega1
    nodes, weights = np.polynomial.legendre.leggauss(quad_points)
    edges = np.linspace(t - h, t + h, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    s = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return float(np.dot(w, f(s)) / (2 * h))


def _sines(source: SourceParams, s):
    return np.sin(source.omega1 * s), np.sin(source.omega2 * s)


def X1_term(A, B, v0, source: SourceParams, s):
    s1, s2 = _sines(source, s)
    J0 = A * s1 + B * s2
    return A * A * s1 ** 2 + B * B * s2 ** 2 + 2 * A * B * s1 * s2 + 2 * v0 * J0


def X2_term(A, B, v0, source: SourceParams, s):
    w1, w2 = source.omega1, source.omega2
    s1, s2 = _sines(source, s)
    J0 = A * s1 + B * s2
    return (-0.5 * A * A * np.cos(2 * w1 * s) - 0.5 * B * B * np.cos(2 * w2 * s)
            - A * B * np.cos((w1 + w2) * s) + 2 * v0 * J0)


def Z_term(V, A, B, A_xx, B_xx, v0, source: SourceParams, s):
    s1, s2 = _sines(source, s)
    J0 = A * s1 + B * s2
    J0_xx = A_xx * s1 + B_xx * s2
    return (-A * s1 - B * s2 + A ** 3 / 3 * s1 ** 3 + B ** 3 / 3 * s2 ** 3
            + A * V * V * s1 + B * V * V * s2 + A * A * B * s1 ** 2 * s2
            + A * B * B * s1 * s2 ** 2 - J0_xx + v0 * v0 * J0)


def psi1(V, W, x, s, model: ModelParams, source: SourceParams, eq: Equilibrium):
    f = eval_profiles(source, x)
    v0 = eq.v0
    s1, s2 = _sines(source, s)
    J0 = f.A * s1 + f.B * s2
    return ((1 - v0 * v0) * V - v0 * V * V - V ** 3 / 3 - W
            - V * X1_term(f.A, f.B, v0, source, s)
            - Z_term(V, f.A, f.B, f.A_xx, f.B_xx, v0, source, s) - v0 * J0 * J0)


def psi2(V, W, x, s, model: ModelParams, source: SourceParams, eq: Equilibrium):
    f = eval_profiles(source, x)
    s1, s2 = _sines(source, s)
    return model.epsilon * (V - model.gamma * W) + model.epsilon * (f.A * s1 + f.B * s2)


def pas_rhs(V, W, x, t, model: ModelParams, source: SourceParams, eq: Equilibrium):
    f = eval_profiles(source, x)
    env = envelope(f.A, f.B, source.eta, t)
    v0 = eq.v0
    r1 = (1 - v0 * v0 - env) * V - v0 * V * V - V ** 3 / 3 - W - env * v0
    return r1, model.epsilon * (V - model.gamma * W)


def verify_pas_derivation(model: ModelParams, source: SourceParams, eq: Equilibrium,
                          V: float, W: float, x: float, t: float, quad_points: int = 16,
                          panels: int = 8) -> dict:
    """Distance between the window-averaged psi and the PAS right-hand side."""
    r1, r2 = pas_rhs(V, W, x, t, model, source, eq)
    a1 = window_average(lambda s: psi1(V, W, x, s, model, source, eq), t, source.omega1, quad_points, panels)
    a2 = window_average(lambda s: psi2(V, W, x, s, model, source, eq), t, source.omega1, quad_points, panels)
    return {"residual1": abs(a1 - r1), "residual2": abs(a2 - r2)}


def phase_locked_times(eta: float, ks: Sequence[int], base_ratio: float = 100.0) -> np.ndarray:
    """Times ``2 pi k / (base_ratio eta)``.

    For every w1 that is an integer multiple of ``base_ratio * eta`` these
    instants sit at the same fast phase, so residuals at different w1 differ
    only through their O(eta/w1) amplitude and not through aliasing of
    ``sin(w2 t)``.
    """
    return 2 * math.pi * np.asarray(ks, dtype=float) / (base_ratio * eta)


def residual_scale(V, A, B) -> float:
    """(1 + V^2)(|A| + |B| + |A|^3 + |B|^3), the amplitude factor of the O(eta/w1) bound."""
    a, b = abs(A), abs(B)
    return (1 + V * V) * (a + b + a ** 3 + b ** 3)


def fit_residual_constant(model, source, eq, samples, safety: float = 2.0) -> float:
    """Fit C in residual1 <= C scale eta/w1 on calibration ``samples`` (V, x, t).

    Returns ``safety`` times the largest observed ratio.
    """
    worst = 0.0
    for V, x, t in samples:
        f = eval_profiles(source, x)
        scale = residual_scale(V, float(f.A), float(f.B)) * source.eta / source.omega1
        if scale == 0:
            continue
        r = verify_pas_derivation(model, source, eq, V, 0.0, x, t)["residual1"]
        worst = max(worst, r / scale)
    return safety * worst
