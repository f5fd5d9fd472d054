"""Multi-joint orchestration: optimize segment times, synchronize, sample.

A physical arm executes every joint on one clock, so the planner's product
is a single segment-time triple shared by all joints. Two routes exist:

* ``shared`` (default) — one swarm minimizes total time with the penalty
  summed over all joints; this optimizes the synchronized objective
  directly.
* ``per-joint-max`` — an independent swarm per joint, then the
  component-wise maximum of the per-joint optima. Cheaper per swarm but
  the mix of segment times can in rare geometries break another joint's
  limits, which is reported rather than papered over.

Either way the result is repaired to strict feasibility by uniform time
scaling before it is returned.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .chaos import Bounds, child_seed
from .errors import InfeasibleAfterSync, NoFeasibleSolution
from .limits import KinematicLimits, violation
from .poly353 import (
    REST,
    T_FLOOR,
    BoundaryConditions,
    JointTrajectory353,
    JointWaypoints,
    SegmentTimes,
    TrajectorySample,
    derivative_extrema,
    evaluate_array,
    solve_coefficients,
)
from .pso import IterationRecord, RunResult, SwarmConfig, run

# Safety factor applied on top of the exact repair scale so the repaired
# trajectory sits strictly inside the limits, not on them.
_REPAIR_MARGIN = 1e-9
_REPAIR_ROUNDS = 64


@dataclass(frozen=True)
class JointSpec:
    """Waypoints, limits, and boundary conditions of one joint."""

    waypoints: JointWaypoints
    limits: KinematicLimits
    boundary: BoundaryConditions = REST


@dataclass(frozen=True)
class PlanningProblem:
    joints: tuple[JointSpec, ...]
    bounds: Bounds
    sync_mode: str = "shared"

    def __post_init__(self) -> None:
        joints = tuple(self.joints)
        if not joints:
            raise ValueError("a planning problem needs at least one joint")
        for j in joints:
            if not isinstance(j, JointSpec):
                raise TypeError(f"joints must be JointSpec instances, got {type(j)}")
        object.__setattr__(self, "joints", joints)
        if not isinstance(self.bounds, Bounds):
            raise TypeError("bounds must be a Bounds instance")
        if self.bounds.dims != 3:
            raise ValueError("segment-time bounds must be 3-dimensional")
        if np.any(self.bounds.lower < T_FLOOR):
            raise ValueError(f"lower time bounds must be >= {T_FLOOR} s")
        if self.sync_mode not in ("shared", "per-joint-max"):
            raise ValueError(f"unknown sync_mode {self.sync_mode!r}")


@dataclass(frozen=True)
class SynchronizedTrajectory:
    """Per-joint 3-5-3 trajectories sharing one segment-time triple."""

    times: SegmentTimes
    per_joint: tuple[JointTrajectory353, ...]
    total_duration: float

    def __post_init__(self) -> None:
        per_joint = tuple(self.per_joint)
        object.__setattr__(self, "per_joint", per_joint)
        reference = self.times.as_array()
        for traj in per_joint:
            if not np.array_equal(traj.times.as_array(), reference):
                raise ValueError("all joints must share identical segment times")
        if self.total_duration != self.times.total:
            raise ValueError("total_duration must equal times.total")


def _solve_all(
    joints: Sequence[JointSpec], times: SegmentTimes
) -> tuple[JointTrajectory353, ...]:
    return tuple(solve_coefficients(j.waypoints, times, j.boundary) for j in joints)


def _worst_ratios(
    trajectories: Sequence[JointTrajectory353], joints: Sequence[JointSpec]
) -> tuple[float, float]:
    worst_v = 0.0
    worst_a = 0.0
    for traj, joint in zip(trajectories, joints):
        ext = derivative_extrema(traj)
        worst_v = max(worst_v, ext.max_velocity / joint.limits.v_max)
        worst_a = max(worst_a, ext.max_acceleration / joint.limits.a_max)
    return worst_v, worst_a


def _ensure_feasible(
    times: SegmentTimes, joints: Sequence[JointSpec], bounds: Bounds
) -> tuple[SegmentTimes, tuple[JointTrajectory353, ...]]:
    """Scale segment times up until every joint respects its limits.

    For rest-to-rest boundaries a uniform scale s maps peak speeds to v/s
    and peak accelerations to a/s², so one round suffices; with nonzero
    boundary rates the loop iterates. Raises NoFeasibleSolution when the
    upper time bounds are reached while still infeasible.
    """
    t = times.as_array().astype(float)
    for _ in range(_REPAIR_ROUNDS):
        seg = SegmentTimes(*t)
        trajectories = _solve_all(joints, seg)
        worst_v, worst_a = _worst_ratios(trajectories, joints)
        if worst_v <= 1.0 and worst_a <= 1.0:
            return seg, trajectories
        if np.all(t >= bounds.upper):
            raise NoFeasibleSolution(
                "limits still violated with every segment time at its upper bound"
            )
        scale = max(worst_v, math.sqrt(worst_a)) * (1.0 + _REPAIR_MARGIN)
        t = np.minimum(t * scale, bounds.upper)
    raise NoFeasibleSolution("feasibility repair did not converge")


def _single_joint_problem(problem: PlanningProblem, index: int) -> PlanningProblem:
    return PlanningProblem(
        joints=(problem.joints[index],), bounds=problem.bounds, sync_mode="shared"
    )


def plan(
    problem: PlanningProblem, swarm_cfg: SwarmConfig
) -> tuple[SynchronizedTrajectory, tuple[IterationRecord, ...]]:
    """Optimize segment times for the whole arm and return a feasible plan.

    Returns the synchronized trajectory plus the swarm history (per-joint
    histories concatenated in joint order under ``per-joint-max``).
    """
    if problem.sync_mode == "shared":
        result: RunResult = run(swarm_cfg, problem)
        seg, trajectories = _ensure_feasible(
            result.best_times, problem.joints, problem.bounds
        )
        history = result.history
    else:
        candidate = np.zeros(3)
        history_rows: list[IterationRecord] = []
        for index in range(len(problem.joints)):
            sub = _single_joint_problem(problem, index)
            cfg = dataclasses.replace(
                swarm_cfg, seed=child_seed(swarm_cfg.seed, index)
            )
            result = run(cfg, sub)
            seg_j, _ = _ensure_feasible(
                result.best_times, sub.joints, problem.bounds
            )
            candidate = np.maximum(candidate, seg_j.as_array())
            history_rows.extend(result.history)
        seg = SegmentTimes(*candidate)
        trajectories = _solve_all(problem.joints, seg)
        for traj, joint in zip(trajectories, problem.joints):
            if violation(traj, joint.limits) > 0.0:
                raise InfeasibleAfterSync(
                    "component-wise max of per-joint times violates a limit; "
                    "retry with sync_mode='shared'"
                )
        history = tuple(history_rows)

    trajectory = SynchronizedTrajectory(
        times=seg, per_joint=trajectories, total_duration=seg.total
    )
    return trajectory, history


def sample(
    traj: SynchronizedTrajectory, dt: float
) -> list[list[TrajectorySample]]:
    """Sample every joint at t = 0, dt, 2dt, ..., with the end time included.

    Row count per joint is ceil(T/dt) + 1.
    """
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    total = traj.total_duration
    steps = math.ceil(total / dt - 1e-9)
    ts = np.append(np.arange(steps) * dt, total)
    rows: list[list[TrajectorySample]] = []
    for joint_traj in traj.per_joint:
        q, v, a = evaluate_array(joint_traj, ts)
        rows.append(
            [
                TrajectorySample(float(ts[i]), float(q[i]), float(v[i]), float(a[i]))
                for i in range(ts.shape[0])
            ]
        )
    return rows
