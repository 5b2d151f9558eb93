"""Reaction terms of the reaction-diffusion systems handled by the stepper.

Every system has the form ``d_t U - diag(1, rho) d_xx U = F(U, x, t)`` on a
fixed grid; builders close over the grid so reactions are ``F(u1, u2, t)``.

The full and centered systems are forced by ``I = d_t J0``, whose amplitude
grows like omega. They are integrated for ``p = u1 - J0`` instead, which
satisfies the same equation with ``I`` replaced by ``d_xx J0`` and the
nonlinearity evaluated at ``p + J0``. The change of variables is exact, and
the bounded forcing keeps the time-stepping error proportional to the
(small) response rather than to ``omega * A``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..model import Equilibrium, ModelParams
from ..source import SourceParams, eval_profiles
from .grid import Grid

TAGS = ("full", "centered", "pas", "linear_error", "nonlinear_error", "remainder", "custom")


@dataclass
class SystemSpec:
    tag: str
    reaction: Callable
    diffusivities: tuple = (1.0, 0.0)
    lift: Optional[Callable] = None
    coupled: tuple = ()
    stiffness: float = 0.0
    fast_frequency: Optional[float] = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown system tag {self.tag!r}")
        if self.diffusivities[0] < 0 or self.diffusivities[1] < 0:
            raise ValueError("diffusivities must be nonnegative")


class SourceOnGrid:
    """Source profiles sampled once on a grid; time dependence added on demand."""

    def __init__(self, source: SourceParams, grid: Grid):
        self.source = source
        f = eval_profiles(source, grid.x)
        self.A, self.B, self.A_xx, self.B_xx = f.A, f.B, f.A_xx, f.B_xx
        self.w1, self.w2, self.eta = source.omega1, source.omega2, source.eta
        self.AA = 0.5 * self.A * self.A
        self.BB = 0.5 * self.B * self.B
        self.AB = self.A * self.B

    def J0(self, t):
        return self.A * np.sin(self.w1 * t) + self.B * np.sin(self.w2 * t)

    def J0_and_xx(self, t):
        s1, s2 = np.sin(self.w1 * t), np.sin(self.w2 * t)
        return self.A * s1 + self.B * s2, self.A_xx * s1 + self.B_xx * s2

    def envelope(self, t):
        return self.AA + self.BB + self.AB * np.cos(self.eta * t)

    def fast_quadratic(self, t):
        return (self.AA * np.cos(2 * self.w1 * t) + self.BB * np.cos(2 * self.w2 * t)
                + self.AB * np.cos((self.w1 + self.w2) * t))


def _stiffness(eq: Equilibrium, amp: float = 1.0) -> float:
    return abs(1.0 - eq.v0 ** 2) + 2 * abs(eq.v0) * amp + amp ** 2 + 1.0


def full_system(model: ModelParams, source: SourceParams, eq: Equilibrium, grid: Grid) -> SystemSpec:
    """Uncentered system in (f, g); integrated as ``p = f - J0``."""
    sg = SourceOnGrid(source, grid)
    eps, gam, beta = model.epsilon, model.gamma, model.beta

    def reaction(p, g, t):
        J0, J0xx = sg.J0_and_xx(t)
        f = p + J0
        return f - f * f * f / 3.0 - g + J0xx, eps * (f - gam * g + beta)

    return SystemSpec("full", reaction, (1.0, model.rho), lift=sg.J0,
                      stiffness=_stiffness(eq, 2.0), fast_frequency=source.omega2,
                      info={"source": sg})


def centered_system(model: ModelParams, source: SourceParams, eq: Equilibrium, grid: Grid) -> SystemSpec:
    sg = SourceOnGrid(source, grid)
    eps, gam, v0 = model.epsilon, model.gamma, eq.v0
    lin = 1.0 - v0 * v0

    def reaction(p, w, t):
        J0, J0xx = sg.J0_and_xx(t)
        v = p + J0
        return lin * v - v0 * v * v - v * v * v / 3.0 - w + J0xx, eps * (v - gam * w)

    return SystemSpec("centered", reaction, (1.0, model.rho), lift=sg.J0,
                      stiffness=_stiffness(eq, 1.0), fast_frequency=source.omega2,
                      info={"source": sg})


def pas_system(model: ModelParams, source: SourceParams, eq: Equilibrium, grid: Grid) -> SystemSpec:
    """Partially averaged system: only the slow beat ``cos(eta t)`` survives."""
    sg = SourceOnGrid(source, grid)
    eps, gam, v0 = model.epsilon, model.gamma, eq.v0
    lin = 1.0 - v0 * v0

    def reaction(V, W, t):
        env = sg.envelope(t)
        return (lin - env) * V - v0 * V * V - V * V * V / 3.0 - W - env * v0, eps * (V - gam * W)

    return SystemSpec("pas", reaction, (1.0, model.rho), stiffness=_stiffness(eq, 1.0),
                      fast_frequency=source.eta, info={"source": sg})


def _error_coeffs(sg: SourceOnGrid, v0: float, V, t):
    # phi3 carries (1 - c^2) J0, the full linear part of the reaction at V + J0
    J0, J0xx = sg.J0_and_xx(t)
    c = v0 + V
    phi1 = -J0 * J0 - 2.0 * c * J0
    phi2 = -(c + J0)
    phi3 = J0xx + J0 - J0 * J0 * J0 / 3.0 - c * c * J0 + c * sg.fast_quadratic(t)
    return J0, c, phi1, phi2, phi3


def linear_error_system(model: ModelParams, source: SourceParams, eq: Equilibrium, grid: Grid,
                        V_ref: Callable) -> SystemSpec:
    """Linear part (F_v, F_w) of the approximation error; ``V_ref(t)`` returns (V, W)."""
    sg = SourceOnGrid(source, grid)
    eps, gam, v0 = model.epsilon, model.gamma, eq.v0

    def reaction(Fv, Fw, t):
        V = V_ref(t)[0]
        J0, c, phi1, _, phi3 = _error_coeffs(sg, v0, V, t)
        return (1.0 - c * c + phi1) * Fv - Fw + phi3, eps * (Fv - gam * Fw + J0)

    return SystemSpec("linear_error", reaction, (1.0, model.rho), coupled=(V_ref,),
                      stiffness=_stiffness(eq, 1.0), fast_frequency=source.omega2,
                      info={"source": sg})


def nonlinear_error_system(model: ModelParams, source: SourceParams, eq: Equilibrium, grid: Grid,
                           V_ref: Callable) -> SystemSpec:
    """Full approximation error (E_v, E_w) = (v - V - J0, w - W)."""
    sg = SourceOnGrid(source, grid)
    eps, gam, v0 = model.epsilon, model.gamma, eq.v0

    def reaction(Ev, Ew, t):
        V = V_ref(t)[0]
        J0, c, phi1, phi2, phi3 = _error_coeffs(sg, v0, V, t)
        r1 = (1.0 - c * c + phi1) * Ev + phi2 * Ev * Ev - Ev * Ev * Ev / 3.0 - Ew + phi3
        return r1, eps * (Ev - gam * Ew) + eps * J0

    return SystemSpec("nonlinear_error", reaction, (1.0, model.rho), coupled=(V_ref,),
                      stiffness=_stiffness(eq, 1.0), fast_frequency=source.omega2,
                      info={"source": sg})


def remainder_system(model: ModelParams, source: SourceParams, eq: Equilibrium, grid: Grid,
                     V_ref: Callable, F_ref: Callable) -> SystemSpec:
    """Nonlinear remainder (R_v, R_w) = E - F."""
    sg = SourceOnGrid(source, grid)
    eps, gam, v0 = model.epsilon, model.gamma, eq.v0

    def reaction(Rv, Rw, t):
        V = V_ref(t)[0]
        Fv = F_ref(t)[0]
        _, c, phi1, phi2, _ = _error_coeffs(sg, v0, V, t)
        S = Rv + Fv
        r1 = ((1.0 - c * c + phi1) * Rv - Rv ** 3 / 3.0 - Rw - Rv * Rv * Fv - Rv * Fv * Fv
              - Fv ** 3 / 3.0 + phi2 * S * S)
        return r1, eps * (Rv - gam * Rw)

    return SystemSpec("remainder", reaction, (1.0, model.rho), coupled=(V_ref, F_ref),
                      stiffness=_stiffness(eq, 1.0), fast_frequency=source.omega2,
                      info={"source": sg})


def build_system(tag: str, model: ModelParams, source: SourceParams, eq: Equilibrium,
                 grid: Grid, *refs) -> SystemSpec:
    builders = {
        "full": full_system, "centered": centered_system, "pas": pas_system,
        "linear_error": linear_error_system, "nonlinear_error": nonlinear_error_system,
        "remainder": remainder_system,
    }
    if tag not in builders:
        raise ValueError(f"no builder for tag {tag!r}")
    return builders[tag](model, source, eq, grid, *refs)


def default_dt(spec_tag: str, source: SourceParams, n_per_period: int = 40,
               pas_per_period: int = 200) -> float:
    """Step that resolves the fastest coefficient of the system."""
    if spec_tag == "pas":
        return 2 * np.pi / (source.eta * pas_per_period)
    return 2 * np.pi / (source.omega2 * n_per_period)
