"""Decay in omega of the heat-propagated oscillatory integral.

For a profile ``h(y, tau) = f(y, tau) / (d^2 + y^2)`` and ``lam = 1 - v0^2``
the quantity measured is

    I(x, t) = int_0^t e^{lam (t - tau)} e^{i omega tau} (G(t - tau) * h(., tau))(x) dtau

with ``G`` the unit heat kernel. With ``s = t - tau`` and ``y = x - 2 sqrt(s) z``
the inner convolution becomes an adaptive integral against ``exp(-z^2)/sqrt(pi)``
truncated at 8 standard deviations, and the outer one a Fourier integral in
``s`` handled by QUADPACK's oscillatory rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import quad


class AccuracyError(RuntimeError):
    pass


PROFILES = ("constant", "gaussian")


def _profile(choice: str):
    if choice == "constant":
        return lambda y, tau: np.ones_like(y)
    if choice == "gaussian":
        return lambda y, tau: np.exp(-y * y) * np.cos(tau)
    if choice == "zero":
        return lambda y, tau: np.zeros_like(y)
    raise ValueError(f"unknown profile {choice!r}; expected one of {PROFILES}")


# z has variance 1/2, so 8 standard deviations is |z| <= 8/sqrt(2)
Z_CUT = 8.0 / math.sqrt(2.0)


def _smoothed(f, d: float, x: float, t: float, epsrel: float):
    norm = 1.0 / math.sqrt(math.pi)

    def psi(s):
        if s == 0.0:
            return float(f(np.array([x]), t)[0]) / (d * d + x * x)
        r = 2.0 * math.sqrt(s)

        def inner(z):
            y = x - r * z
            return math.exp(-z * z) * float(f(np.array([y]), t - s)[0]) / (d * d + y * y)

        # the profile peaks at y = 0, i.e. z = x / r
        peak = x / r
        pts = [peak] if -Z_CUT < peak < Z_CUT else None
        val, _ = quad(inner, -Z_CUT, Z_CUT, points=pts, epsabs=1e-14, epsrel=epsrel, limit=200)
        return norm * val

    return psi


def oscillatory_integral(omega: float, d: float, f_choice: str, x: float, t: float, v0: float,
                         epsrel: float = 1e-10) -> float:
    """|I| for one omega; ``epsrel`` is passed to both quadrature levels."""
    f = _profile(f_choice)
    psi = _smoothed(f, d, x, t, epsrel)
    lam = 1.0 - v0 * v0

    def g(s):
        return math.exp(lam * s) * psi(s)

    # |int g(s) e^{i omega (t-s)} ds| = |int g(s) e^{-i omega s} ds|
    opts = dict(wvar=omega, epsabs=1e-14, epsrel=epsrel, limit=400)
    ic, _ = quad(g, 0.0, t, weight="cos", **opts)
    is_, _ = quad(g, 0.0, t, weight="sin", **opts)
    return math.hypot(ic, is_)


@dataclass
class DecayResult:
    omegas: np.ndarray
    values: np.ndarray
    order: float

    @property
    def scaled(self) -> np.ndarray:
        """omega |I(omega)|, bounded when the decay is order 1."""
        return self.omegas * self.values


def fit_slope(xs, ys) -> float:
    """Least-squares slope of log(ys) against log(xs)."""
    xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    if xs.size < 2 or np.any(ys <= 0):
        return float("nan")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def oscillatory_decay_check(d: float, omega_list: Sequence[float], f_choice: str, x: float,
                            t: float, v0: float, epsrel: float = 1e-7, rtol: float = 1e-4) -> DecayResult:
    """|I| per omega and the fitted log-log slope.

    Each value is computed at tolerance ``epsrel`` and again at
    ``epsrel * 1e-3``; a relative disagreement above ``rtol`` raises
    :class:`AccuracyError`.
    """
    if not d > 0:
        raise ValueError("d must be positive")
    if not v0 * v0 - 1 > 0:
        raise ValueError("requires v0^2 - 1 > 0")
    omegas = np.asarray(omega_list, dtype=float)
    if omegas.size == 0 or np.any(omegas <= 1) or np.any(np.diff(omegas) <= 0):
        raise ValueError("omega_list must be increasing with every entry > 1")
    vals = []
    for om in omegas:
        a = oscillatory_integral(om, d, f_choice, x, t, v0, epsrel)
        b = oscillatory_integral(om, d, f_choice, x, t, v0, epsrel * 1e-3)
        if abs(a - b) > rtol * abs(b) and abs(a - b) > 1e-15:
            raise AccuracyError(f"quadrature refinement disagrees at omega={om}: {a!r} vs {b!r}")
        vals.append(b)
    vals = np.array(vals)
    order = fit_slope(omegas, vals) if np.all(vals > 0) else float("nan")
    return DecayResult(omegas, vals, order)
