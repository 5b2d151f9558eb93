"""Reaction parameters, admissibility and the resting equilibrium.

The centered FitzHugh-Nagumo system is written around the unique rest
state ``(v0, w0)`` solving

    0 = v0 - v0**3/3 - w0,
    0 = v0 - gamma*w0 + beta.

Eliminating ``w0`` gives the depressed cubic
``h(v) = v**3 - 3(1 - 1/gamma) v + 3 beta/gamma``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

DEFAULT_DELTA_GRID = np.geomspace(1e-4, 0.2499, 64)


class InvalidParameterError(ValueError):
    pass


class InvalidGridError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


class NumericError(RuntimeError):
    pass


@dataclass(frozen=True)
class ModelParams:
    epsilon: float
    gamma: float
    beta: float
    rho: float = 0.0
    delta_witness: Optional[float] = None

    def __post_init__(self):
        for name in ("epsilon", "gamma", "beta"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.rho >= 0:
            raise InvalidParameterError(f"rho must be nonnegative, got {self.rho}")
        if self.delta_witness is not None:
            d = self.delta_witness
            if not 0 < d < 0.25:
                raise InvalidGridError(f"delta_witness must lie in (0, 1/4), got {d}")
            if not (discriminant_term(self.beta, self.gamma) > 0
                    and delta_condition(self.beta, self.gamma, d) > 0):
                raise InvalidParameterError(
                    f"delta_witness={d} does not certify admissibility of "
                    f"(beta={self.beta}, gamma={self.gamma})")


@dataclass(frozen=True)
class Admissibility:
    admissible: bool
    witness: Optional[float]
    discriminant: float
    # largest value of the delta inequality over the grid; helps diagnose marginal failures
    best_margin: float


@dataclass(frozen=True)
class Equilibrium:
    v0: float
    w0: float
    residual_h: float = 0.0
    residual_1: float = 0.0
    residual_2: float = 0.0
    witness_delta: Optional[float] = None
    bounds_satisfied: bool = True
    notes: tuple = field(default_factory=tuple)

    @property
    def gap(self) -> float:
        """``v0**2 - 1``, the linear damping rate around the rest state."""
        return self.v0 * self.v0 - 1.0

    def as_record(self) -> dict:
        return {
            "v0": self.v0,
            "w0": self.w0,
            "residuals": {"h": self.residual_h, "eq1": self.residual_1, "eq2": self.residual_2},
            "bounds_satisfied": self.bounds_satisfied,
            "witness_delta": self.witness_delta,
            "notes": list(self.notes),
        }


def discriminant_term(beta: float, gamma: float) -> float:
    return (1.0 - gamma) ** 3 / gamma ** 3 + 2.25 * beta ** 2 / gamma ** 2


def delta_condition(beta: float, gamma: float, delta):
    """Left-hand side of the delta inequality; positive means ``delta`` certifies."""
    delta = np.asarray(delta, dtype=float)
    val = (np.sqrt(1.0 + 1.0 / (delta * gamma)) * (2.0 - (3.0 + 1.0 / delta) / gamma)
           + 3.0 * beta / gamma)
    return float(val) if val.ndim == 0 else val


def _validate_pair(beta, gamma):
    if not (beta > 0 and gamma > 0) or not (math.isfinite(beta) and math.isfinite(gamma)):
        raise InvalidParameterError(f"beta and gamma must be positive, got beta={beta}, gamma={gamma}")


def check_admissible(beta: float, gamma: float,
                     delta_grid: Optional[Sequence[float]] = None) -> Admissibility:
    _validate_pair(beta, gamma)
    grid = DEFAULT_DELTA_GRID if delta_grid is None else np.asarray(delta_grid, dtype=float)
    if grid.size == 0:
        raise InvalidGridError("delta_grid is empty")
    if np.any(~(grid > 0)) or np.any(~(grid < 0.25)):
        raise InvalidGridError("every delta in the grid must lie in (0, 1/4)")

    disc = discriminant_term(beta, gamma)
    margins = np.atleast_1d(delta_condition(beta, gamma, grid))
    hits = np.flatnonzero(margins > 0)
    witness = float(grid[hits[0]]) if hits.size else None
    return Admissibility(
        admissible=bool(disc > 0 and witness is not None),
        witness=witness if disc > 0 else None,
        discriminant=disc,
        best_margin=float(margins.max()),
    )


def h_poly(v, beta: float, gamma: float):
    return v ** 3 - 3.0 * (1.0 - 1.0 / gamma) * v + 3.0 * beta / gamma


def h_prime(v, gamma: float):
    return 3.0 * v ** 2 - 3.0 * (1.0 - 1.0 / gamma)


def bisect_root(beta: float, gamma: float, lo: float, hi: float, width: float) -> float:
    """Bisection on ``h`` over a sign-changing bracket down to ``width``."""
    flo = h_poly(lo, beta, gamma)
    fhi = h_poly(hi, beta, gamma)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise NumericError(f"h does not change sign on [{lo}, {hi}]")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        fm = h_poly(mid, beta, gamma)
        if fm == 0.0:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def newton_polish(v: float, beta: float, gamma: float, tol: float, max_iter: int = 50) -> float:
    for _ in range(max_iter):
        fv = h_poly(v, beta, gamma)
        if abs(fv) <= tol:
            return v
        dv = fv / h_prime(v, gamma)
        v -= dv
        if abs(dv) <= 1e-16 * max(1.0, abs(v)):
            break
    return v


def equilibrium_bracket(beta: float) -> tuple:
    return -max(beta, math.sqrt(3.0)) - 1.0, 0.0


def solve_equilibrium(beta: float, gamma: float, tol: float = 1e-12,
                      delta_grid: Optional[Sequence[float]] = None,
                      witness: Optional[float] = None) -> Equilibrium:
    """Unique rest state of the uncentered system for admissible ``(beta, gamma)``.

    The root is bracketed on ``[-max(beta, sqrt 3) - 1, 0]``, bisected to a
    width of 1e-6 and then polished with Newton. The bounds
    ``min(-beta, -sqrt 3) <= v0 < -sqrt(1 + 1/(delta*gamma))`` are checked for
    the admissibility witness (the grid's first one unless ``witness`` is
    given); a violation is reported in ``notes`` rather than raised.
    """
    adm = check_admissible(beta, gamma, delta_grid)
    if not adm.admissible:
        raise PreconditionError(
            f"(beta={beta}, gamma={gamma}) is not admissible "
            f"(discriminant={adm.discriminant:.3g}, best delta margin={adm.best_margin:.3g})")
    delta = adm.witness if witness is None else witness
    if witness is not None and not delta_condition(beta, gamma, witness) > 0:
        raise PreconditionError(f"witness delta={witness} does not certify admissibility")

    lo, hi = equilibrium_bracket(beta)
    v = bisect_root(beta, gamma, lo, hi, 1e-6)
    v = newton_polish(v, beta, gamma, tol)
    res_h = abs(h_poly(v, beta, gamma))
    if res_h > tol:
        raise NumericError(f"Newton did not reach |h(v0)| <= {tol} (got {res_h:.3e})")
    w = (v + beta) / gamma

    notes = []
    lower = min(-beta, -math.sqrt(3.0))
    upper = -math.sqrt(1.0 + 1.0 / (delta * gamma))
    ok = lower <= v < upper and v * v - 1.0 > 0
    if not lower <= v:
        notes.append(f"v0={v} below min(-beta, -sqrt3)={lower}")
    if not v < upper:
        notes.append(f"v0={v} not below -sqrt(1+1/(delta*gamma))={upper}")
    return Equilibrium(
        v0=float(v), w0=float(w), residual_h=float(res_h),
        residual_1=float(abs(v - v ** 3 / 3.0 - w)),
        residual_2=float(abs(v - gamma * w + beta)),
        witness_delta=delta, bounds_satisfied=bool(ok), notes=tuple(notes),
    )


def equilibrium_for(params: ModelParams, tol: float = 1e-12) -> Equilibrium:
    return solve_equilibrium(params.beta, params.gamma, tol=tol, witness=params.delta_witness)


def count_sign_changes(beta: float, gamma: float, n: int = 20001) -> int:
    r = beta + math.sqrt(3.0) + 1.0
    vals = h_poly(np.linspace(-r, r, n), beta, gamma)
    s = np.sign(vals)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))
