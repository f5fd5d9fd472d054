"""Per-joint kinematic limits and normalized constraint-violation measure."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .poly353 import JointTrajectory353, derivative_extrema


@dataclass(frozen=True)
class KinematicLimits:
    """Symmetric speed and acceleration bounds for one joint."""

    v_max: float  # rad/s
    a_max: float  # rad/s^2

    def __post_init__(self) -> None:
        for name, value in (("v_max", self.v_max), ("a_max", self.a_max)):
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be finite and > 0, got {value}")


def violation(traj: JointTrajectory353, lim: KinematicLimits) -> float:
    """Relative amount by which the trajectory exceeds the limits.

    Returns ``max(0, max|v| - v_max)/v_max + max(0, max|a| - a_max)/a_max``;
    velocity and acceleration excesses are normalized so they weigh equally
    in a penalty term. Zero iff the trajectory is feasible.
    """
    ext = derivative_extrema(traj)
    over_v = max(0.0, ext.max_velocity - lim.v_max) / lim.v_max
    over_a = max(0.0, ext.max_acceleration - lim.a_max) / lim.a_max
    return over_v + over_a
