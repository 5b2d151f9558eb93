"""Interferential two-electrode source and the coefficient fields built from it."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Equilibrium, InvalidParameterError


@dataclass(frozen=True)
class SourceParams:
    """Two point sources at x=0 and x=x0, at distances d1, d2 from the fibre."""

    a: float
    b: float
    d1: float
    d2: float
    x0: float
    omega1: float
    eta: float

    def __post_init__(self):
        for name in ("d1", "d2", "omega1", "eta"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def omega2(self) -> float:
        return self.omega1 + self.eta

    def with_omega(self, omega1: float) -> "SourceParams":
        return SourceParams(self.a, self.b, self.d1, self.d2, self.x0, omega1, self.eta)

    def with_amplitudes(self, a: float, b: float) -> "SourceParams":
        return SourceParams(a, b, self.d1, self.d2, self.x0, self.omega1, self.eta)


@dataclass(frozen=True)
class SourceFields:
    A: np.ndarray
    B: np.ndarray
    A_xx: np.ndarray
    B_xx: np.ndarray


def _profile(amp, d, s):
    den = d * d + s * s
    return amp / den, amp * (6.0 * s * s - 2.0 * d * d) / den ** 3


def eval_profiles(params: SourceParams, x) -> SourceFields:
    """Spatial decay profiles and their exact second derivatives.

    Works on scalars and arrays alike.
    """
    x = np.asarray(x, dtype=float)
    A, A_xx = _profile(params.a, params.d1, x)
    B, B_xx = _profile(params.b, params.d2, x - params.x0)
    return SourceFields(A, B, A_xx, B_xx)


def envelope(A, B, eta: float, t: float):
    return 0.5 * A * A + 0.5 * B * B + A * B * np.cos(eta * t)


def eval_time_fields(params: SourceParams, x, t: float) -> dict:
    """Input current ``I``, oscillatory part ``J0`` and slow ``envelope`` at (x, t)."""
    f = eval_profiles(params, x)
    w1, w2 = params.omega1, params.omega2
    return {
        "I": f.A * w1 * np.cos(w1 * t) + f.B * w2 * np.cos(w2 * t),
        "J0": f.A * np.sin(w1 * t) + f.B * np.sin(w2 * t),
        "envelope": envelope(f.A, f.B, params.eta, t),
    }


def fast_quadratic(A, B, params: SourceParams, t: float):
    """The purely fast part of ``J0**2``: frequencies 2w1, 2w2 and w1+w2."""
    w1, w2 = params.omega1, params.omega2
    return (0.5 * A * A * np.cos(2 * w1 * t) + 0.5 * B * B * np.cos(2 * w2 * t)
            + A * B * np.cos((w1 + w2) * t))


def error_coefficients(params: SourceParams, equilibrium: Equilibrium, x, t: float, V,
                       linear_source: bool = True) -> dict:
    """Coefficients phi1, phi2, phi3 of the PAS approximation-error equation.

    Expanding the reaction about ``V + J0`` leaves the source
    ``(1 - (v0+V)^2) J0`` in phi3. With ``linear_source=False`` the ``+J0``
    part is dropped, giving the shorter form ``-(v0+V)^2 J0``, which does not
    reproduce ``v - V - J0`` when integrated.
    """
    f = eval_profiles(params, x)
    s1, s2 = np.sin(params.omega1 * t), np.sin(params.omega2 * t)
    J0 = f.A * s1 + f.B * s2
    J0_xx = f.A_xx * s1 + f.B_xx * s2
    c = equilibrium.v0 + np.asarray(V, dtype=float)
    phi1 = -J0 * J0 - 2.0 * c * J0
    phi2 = -(c + J0)
    phi3 = J0_xx - J0 ** 3 / 3.0 - c * c * J0 + c * fast_quadratic(f.A, f.B, params, t)
    if linear_source:
        phi3 = phi3 + J0
    return {"phi1": phi1, "phi2": phi2, "phi3": phi3, "J0": J0}


def sup_amplitude(params: SourceParams) -> float:
    """Delta = |a|/d1^2 + |b|/d2^2 (also the bound M on |J0|)."""
    return abs(params.a) / params.d1 ** 2 + abs(params.b) / params.d2 ** 2


def grid_sup_amplitude(params: SourceParams, x) -> float:
    """max over the sample points of |A(x)| + |B(x)|; never exceeds ``sup_amplitude``."""
    f = eval_profiles(params, x)
    return float(np.max(np.abs(f.A) + np.abs(f.B)))


def tail_ratio(params: SourceParams, half_extent: float) -> float:
    """Source strength at the truncation points relative to Delta."""
    delta = sup_amplitude(params)
    if delta == 0:
        return 0.0
    ends = np.array([-half_extent, half_extent])
    f = eval_profiles(params, ends)
    return float(np.max(np.abs(f.A) + np.abs(f.B)) / delta)


def default_half_extent(params: SourceParams, tol: float = 1e-4) -> float:
    """Truncation half-width: 40 source lengths, widened until the tail is below ``tol``."""
    X = 40.0 * max(params.d1, params.d2, abs(params.x0) + params.d2)
    if sup_amplitude(params) == 0:
        return X
    while tail_ratio(params, X) > tol:
        X *= 1.25
    return X


def fields_table(params: SourceParams, x, t: float) -> np.ndarray:
    """Columns (x, A, B, I, J0, envelope) for CSV export."""
    x = np.asarray(x, dtype=float)
    f = eval_profiles(params, x)
    tf = eval_time_fields(params, x, t)
    return np.column_stack([x, f.A, f.B, tf["I"], tf["J0"], tf["envelope"]])
