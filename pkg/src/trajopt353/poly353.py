"""Cubic-quintic-cubic (3-5-3) piecewise polynomial trajectories for one joint.

A trajectory through four waypoints is built from three polynomial segments:
a cubic over [0, t1], a quintic over [0, t2] and a cubic over [0, t3], each
expressed in its own local time so the power basis stays well conditioned.
The 14 coefficients are pinned by 14 linear conditions: the six waypoint
positions, velocity/acceleration continuity at both junctions, and the four
boundary velocity/acceleration values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import NonFinite, OutOfRange, SingularSystem

# Shortest admissible segment duration; keeps the 14x14 system nonsingular.
T_FLOOR = 1e-3

# Relative residual bound for an accepted coefficient solve.
RESIDUAL_RTOL = 1e-9

# Slack when deciding whether a query time falls inside the trajectory.
TIME_SLACK = 1e-12

_DENSE_FALLBACK_SAMPLES = 10_000


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise NonFinite(f"{name} contains a non-finite value: {v!r}")


@dataclass(frozen=True)
class JointWaypoints:
    """Four joint positions (rad): start, two via points, end."""

    q0: float
    q1: float
    q2: float
    q3: float

    def __post_init__(self) -> None:
        _require_finite("waypoints", self.q0, self.q1, self.q2, self.q3)


@dataclass(frozen=True)
class BoundaryConditions:
    """Joint velocity (rad/s) and acceleration (rad/s^2) at the trajectory ends.

    Defaults to rest-to-rest motion (all zeros).
    """

    v_start: float = 0.0
    a_start: float = 0.0
    v_end: float = 0.0
    a_end: float = 0.0

    def __post_init__(self) -> None:
        _require_finite(
            "boundary conditions", self.v_start, self.a_start, self.v_end, self.a_end
        )


REST = BoundaryConditions()


@dataclass(frozen=True)
class SegmentTimes:
    """Durations (s) of the cubic, quintic and cubic segments."""

    t1: float
    t2: float
    t3: float

    def __post_init__(self) -> None:
        _require_finite("segment times", self.t1, self.t2, self.t3)
        for name, t in (("t1", self.t1), ("t2", self.t2), ("t3", self.t3)):
            if t < T_FLOOR:
                raise ValueError(f"{name}={t} is below the {T_FLOOR} s floor")

    @property
    def total(self) -> float:
        return self.t1 + self.t2 + self.t3

    def as_array(self) -> np.ndarray:
        return np.array([self.t1, self.t2, self.t3])


@dataclass(frozen=True)
class TrajectorySample:
    """Kinematic state at absolute time t."""

    t: float
    q: float
    v: float
    a: float


@dataclass(frozen=True)
class JointTrajectory353:
    """Solved coefficient triple, ascending powers in each segment's local time."""

    coeffs_seg1: np.ndarray  # 4 cubic coefficients, local time in [0, t1]
    coeffs_seg2: np.ndarray  # 6 quintic coefficients, local time in [0, t2]
    coeffs_seg3: np.ndarray  # 4 cubic coefficients, local time in [0, t3]
    times: SegmentTimes

    def __post_init__(self) -> None:
        for name, coeffs, n in (
            ("coeffs_seg1", self.coeffs_seg1, 4),
            ("coeffs_seg2", self.coeffs_seg2, 6),
            ("coeffs_seg3", self.coeffs_seg3, 4),
        ):
            arr = np.asarray(coeffs, dtype=float)
            if arr.shape != (n,):
                raise ValueError(f"{name} must have shape ({n},), got {arr.shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def total_duration(self) -> float:
        return self.times.total

    def segments(self) -> tuple[tuple[np.ndarray, float], ...]:
        """(coefficients, duration) for each segment, in execution order."""
        return (
            (self.coeffs_seg1, self.times.t1),
            (self.coeffs_seg2, self.times.t2),
            (self.coeffs_seg3, self.times.t3),
        )


@dataclass(frozen=True)
class ExtremaResult:
    """Peak |velocity| and |acceleration| over a whole trajectory.

    ``exact`` is False when the analytic root finder had to fall back to
    dense sampling for at least one segment.
    """

    max_velocity: float
    max_acceleration: float
    exact: bool = True


def _assemble_system(
    wp: JointWaypoints, times: SegmentTimes, bc: BoundaryConditions
) -> tuple[np.ndarray, np.ndarray]:
    """Build the 14x14 condition matrix over the stacked segment coefficients.

    Unknown layout: seg1 a0..a3 (cols 0-3), seg2 b0..b5 (cols 4-9),
    seg3 c0..c3 (cols 10-13), all in ascending local-time powers.
    """
    t1, t2, t3 = times.t1, times.t2, times.t3
    A = np.zeros((14, 14))
    b = np.zeros(14)

    def pos_row(row: np.ndarray, col0: int, n: int, t: float) -> None:
        row[col0 : col0 + n] = [t**k for k in range(n)]

    def vel_row(row: np.ndarray, col0: int, n: int, t: float) -> None:
        row[col0 + 1 : col0 + n] = [k * t ** (k - 1) for k in range(1, n)]

    def acc_row(row: np.ndarray, col0: int, n: int, t: float) -> None:
        row[col0 + 2 : col0 + n] = [k * (k - 1) * t ** (k - 2) for k in range(2, n)]

    # Waypoint positions.
    A[0, 0] = 1.0
    b[0] = wp.q0  # seg1 start
    pos_row(A[1], 0, 4, t1)
    b[1] = wp.q1  # seg1 end
    A[2, 4] = 1.0
    b[2] = wp.q1  # seg2 start
    pos_row(A[3], 4, 6, t2)
    b[3] = wp.q2  # seg2 end
    A[4, 10] = 1.0
    b[4] = wp.q2  # seg3 start
    pos_row(A[5], 10, 4, t3)
    b[5] = wp.q3  # seg3 end

    # C1/C2 continuity across both junctions.
    vel_row(A[6], 0, 4, t1)
    A[6, 5] = -1.0
    acc_row(A[7], 0, 4, t1)
    A[7, 6] = -2.0
    vel_row(A[8], 4, 6, t2)
    A[8, 11] = -1.0
    acc_row(A[9], 4, 6, t2)
    A[9, 12] = -2.0

    # Boundary velocity/acceleration at the trajectory ends.
    A[10, 1] = 1.0
    b[10] = bc.v_start
    A[11, 2] = 2.0
    b[11] = bc.a_start
    vel_row(A[12], 10, 4, t3)
    b[12] = bc.v_end
    acc_row(A[13], 10, 4, t3)
    b[13] = bc.a_end

    return A, b


def solve_coefficients(
    wp: JointWaypoints, times: SegmentTimes, bc: BoundaryConditions = REST
) -> JointTrajectory353:
    """Solve the 14-condition system for the 3-5-3 coefficient triple.

    Raises SingularSystem when the pivoted solve fails or its residual
    exceeds ``RESIDUAL_RTOL * max(1, ||b||_inf)``, which signals degenerate
    segment times.
    """
    A, b = _assemble_system(wp, times, bc)
    try:
        x = np.linalg.solve(A, b)
        # Two rounds of iterative refinement: long segments make the quintic
        # rows large (t2^5) and the raw residual can creep toward 1e-9.
        for _ in range(2):
            r = b - A @ x
            if np.max(np.abs(r)) == 0.0:
                break
            x = x + np.linalg.solve(A, r)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"coefficient solve failed for times {times}") from exc

    residual = np.max(np.abs(A @ x - b))
    if not residual <= RESIDUAL_RTOL * max(1.0, np.max(np.abs(b))):
        raise SingularSystem(
            f"residual {residual:.3e} exceeds tolerance for times {times}"
        )
    return JointTrajectory353(
        coeffs_seg1=x[0:4], coeffs_seg2=x[4:10], coeffs_seg3=x[10:14], times=times
    )


def _horner_qva(coeffs: np.ndarray, tau: float) -> tuple[float, float, float]:
    """Evaluate a polynomial and its first two derivatives at local time tau."""
    p = 0.0
    d1 = 0.0
    d2 = 0.0
    for c in coeffs[::-1]:
        d2 = d2 * tau + 2.0 * d1
        d1 = d1 * tau + p
        p = p * tau + c
    return p, d1, d2


def _locate_segment(traj: JointTrajectory353, t: float) -> tuple[np.ndarray, float]:
    """Map absolute time onto (segment coefficients, local time)."""
    t1, t2 = traj.times.t1, traj.times.t2
    if t <= t1:
        return traj.coeffs_seg1, t
    if t <= t1 + t2:
        return traj.coeffs_seg2, t - t1
    return traj.coeffs_seg3, min(t - t1 - t2, traj.times.t3)


def evaluate(traj: JointTrajectory353, t: float) -> TrajectorySample:
    """Position, velocity and acceleration at absolute time t in [0, T]."""
    _require_finite("time", t)
    total = traj.total_duration
    if t < -TIME_SLACK or t > total + TIME_SLACK:
        raise OutOfRange(f"t={t} outside [0, {total}]")
    t = min(max(t, 0.0), total)
    coeffs, tau = _locate_segment(traj, t)
    q, v, a = _horner_qva(coeffs, tau)
    return TrajectorySample(t=t, q=q, v=v, a=a)


def evaluate_array(
    traj: JointTrajectory353, ts: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized evaluate over an array of absolute times (q, v, a arrays)."""
    ts = np.asarray(ts, dtype=float)
    total = traj.total_duration
    if np.any(ts < -TIME_SLACK) or np.any(ts > total + TIME_SLACK):
        raise OutOfRange("sample times outside trajectory duration")
    ts = np.clip(ts, 0.0, total)

    t1, t2 = traj.times.t1, traj.times.t2
    starts = (0.0, t1, t1 + t2)
    ends = (t1, t1 + t2, total)
    q = np.empty_like(ts)
    v = np.empty_like(ts)
    a = np.empty_like(ts)
    assigned = np.zeros(ts.shape, dtype=bool)
    for (coeffs, duration), lo, hi in zip(traj.segments(), starts, ends):
        mask = ~assigned & (ts <= hi)
        if not np.any(mask):
            continue
        tau = np.clip(ts[mask] - lo, 0.0, duration)
        q[mask] = npoly.polyval(tau, coeffs)
        v[mask] = npoly.polyval(tau, npoly.polyder(coeffs))
        a[mask] = npoly.polyval(tau, npoly.polyder(coeffs, 2))
        assigned |= mask
    return q, v, a


def _real_roots_inside(coeffs: np.ndarray, hi: float) -> list[float]:
    """Real roots of an ascending-coefficient polynomial lying in (0, hi).

    Uses the companion-matrix root finder; complex pairs are discarded with a
    tolerance scaled to the root magnitude.
    """
    scale = np.max(np.abs(coeffs))
    if scale == 0.0:
        return []
    trimmed = npoly.polytrim(coeffs, tol=1e-14 * scale)
    if len(trimmed) < 2:
        return []
    roots = npoly.polyroots(trimmed)
    out = []
    for r in np.atleast_1d(roots):
        if abs(r.imag) > 1e-9 * (1.0 + abs(r.real)):
            continue
        tau = r.real
        if 0.0 < tau < hi:
            out.append(float(tau))
    return out


def _segment_extrema(coeffs: np.ndarray, duration: float) -> tuple[float, float, bool]:
    """Peak |v| and |a| over one segment via stationary-point candidates."""
    vel = npoly.polyder(coeffs)
    acc = npoly.polyder(coeffs, 2)
    jerk = npoly.polyder(coeffs, 3)
    try:
        v_candidates = [0.0, duration] + _real_roots_inside(acc, duration)
        a_candidates = [0.0, duration] + _real_roots_inside(jerk, duration)
        if not all(map(math.isfinite, v_candidates + a_candidates)):
            raise FloatingPointError("non-finite stationary point")
    except (np.linalg.LinAlgError, FloatingPointError):
        taus = np.linspace(0.0, duration, _DENSE_FALLBACK_SAMPLES)
        v_max = float(np.max(np.abs(npoly.polyval(taus, vel))))
        a_max = float(np.max(np.abs(npoly.polyval(taus, acc))))
        return v_max, a_max, False

    v_max = max(abs(npoly.polyval(tau, vel)) for tau in v_candidates)
    a_max = max(abs(npoly.polyval(tau, acc)) for tau in a_candidates)
    return float(v_max), float(a_max), True


def derivative_extrema(traj: JointTrajectory353) -> ExtremaResult:
    """Exact peak |velocity| and |acceleration| over the whole trajectory.

    Velocity extrema occur at segment endpoints or where the acceleration
    polynomial vanishes (linear in the cubics, cubic in the quintic);
    acceleration extrema where the jerk vanishes (quadratic in the quintic).
    """
    v_max = 0.0
    a_max = 0.0
    exact = True
    for coeffs, duration in traj.segments():
        v, a, ok = _segment_extrema(coeffs, duration)
        v_max = max(v_max, v)
        a_max = max(a_max, a)
        exact = exact and ok
    return ExtremaResult(max_velocity=v_max, max_acceleration=a_max, exact=exact)
