"""Contraction constant of the linear error iteration and the small-data test."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..model import Equilibrium


def source_size(a: float, b: float, d1: float, d2: float) -> float:
    """M = |a|/d1^2 + |b|/d2^2, the sup of |A| + |B|."""
    return abs(a) / d1 ** 2 + abs(b) / d2 ** 2


def compute_alpha(V_trajectory, M: float, eq: Equilibrium, gamma: float) -> float:
    """alpha(T) over the stored samples of ``V_trajectory`` (component 1)."""
    V = np.asarray(V_trajectory.u1)
    if V.size == 0:
        raise ValueError("empty trajectory")
    v0 = eq.v0
    gap = v0 * v0 - 1.0
    if not gap > 0:
        raise ValueError("requires v0^2 - 1 > 0")
    shifted = v0 + V
    drift = float(np.max(np.abs(v0 * v0 - shifted * shifted)))
    return (drift + M * M + 2 * M * float(np.max(np.abs(shifted))) + 1.0 / gamma) / gap


def small_data_thresholds(gamma: float, beta: float) -> Tuple[float, float]:
    m = max(math.sqrt(3.0), beta)
    return min(1.0, 1.0 / (gamma * (1 + 2 * m))), min(1.0 / math.sqrt(gamma), 1.0 / (2 * gamma * (1 + m)))


@dataclass
class SmallDataCheck:
    ok: bool
    slack: Tuple[float, float]

    def as_record(self) -> dict:
        return {"ok": self.ok, "slack_V": self.slack[0], "slack_M": self.slack[1]}


def check_small_data(V_trajectory, M: float, gamma: float, beta: float) -> SmallDataCheck:
    """Slack is (threshold_V - ||V||_Y, threshold_M - M); ok iff both are >= 0."""
    tv, tm = small_data_thresholds(gamma, beta)
    V = np.asarray(V_trajectory.u1)
    vnorm = float(np.max(np.abs(V))) if V.size else 0.0
    slack = (tv - vnorm, tm - M)
    return SmallDataCheck(slack[0] >= 0 and slack[1] >= 0, slack)
