"""Particle swarm optimizers over the three segment times.

Two variants share the same update loop:

* ``standard`` — fixed inertia (midpoint of the configured bounds) and
  fixed learning factors c1 = c2 = 2.0, uniform random initialization.
* ``improved`` — cosine-decreasing inertia, dynamic learning factors,
  chaotic (Logistic) initialization, and Tent-chaos perturbation of the
  worst quartile whenever the global best stagnates.

Fitness is total trajectory time plus a large penalty on normalized
velocity/acceleration limit violations, so the minimizer lands on the
fastest feasible segment-time triple.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

from .chaos import (
    ChaosConfig,
    Bounds,
    carrier_transform,
    child_seed,
    logistic_sequence,
    perturb,
    tent_blacklist,
    tent_step,
)
from .errors import NoFeasibleSolution, SingularSystem
from .limits import violation
from .poly353 import SegmentTimes, solve_coefficients

if TYPE_CHECKING:  # pragma: no cover
    from .planner import PlanningProblem

# Independent child-seed streams derived from SwarmConfig.seed.
STREAM_LOGISTIC_INIT = 0
STREAM_TENT_PERTURB = 1
STREAM_UNIFORM_INIT = 2
STREAM_VELOCITY = 3

# Relative global-best improvement below this counts as stagnation.
STAGNATION_RTOL = 1e-6


@dataclass(frozen=True)
class SwarmConfig:
    """Swarm sizing, schedules, and reproducibility knobs.

    ``m`` is the population size and ``n_iterations`` the total number of
    evolutionary generations (initialization counts as generation 1).
    """

    m: int
    n_iterations: int
    bounds: Bounds
    omega_max: float = 0.86
    omega_min: float = 0.44
    c11: float = 1.3
    c21: float = 1.3
    v_clamp_fraction: float = 0.2
    penalty_coefficient: float = 1e3
    stagnation_window: int = 10
    mu: float = 4.0
    phi: float = 0.6
    alpha: float = 0.3
    seed: int = 0
    variant: str = "improved"
    n_workers: int = 1

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ValueError(f"population size must be >= 2, got {self.m}")
        if self.n_iterations < 2:
            raise ValueError(f"need at least 2 iterations, got {self.n_iterations}")
        if not (0.0 < self.omega_min < self.omega_max < 1.0):
            raise ValueError(
                f"need 0 < omega_min < omega_max < 1, got "
                f"({self.omega_min}, {self.omega_max})"
            )
        if not isinstance(self.bounds, Bounds):
            raise TypeError("bounds must be a Bounds instance")
        if not (0.0 < self.v_clamp_fraction <= 1.0):
            raise ValueError("v_clamp_fraction must lie in (0, 1]")
        if self.penalty_coefficient <= 0.0:
            raise ValueError("penalty_coefficient must be positive")
        if self.stagnation_window < 1:
            raise ValueError("stagnation_window must be >= 1")
        if self.variant not in ("standard", "improved"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.n_workers < 1:
            raise ValueError("n_workers must be >= 1")
        # Validates mu/phi/alpha/seed eagerly.
        self.chaos_config()

    def chaos_config(self, stream: int = STREAM_LOGISTIC_INIT) -> ChaosConfig:
        return ChaosConfig(
            mu=self.mu,
            phi=self.phi,
            alpha=self.alpha,
            seed=child_seed(self.seed, stream),
        )


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    personal_best_position: np.ndarray
    personal_best_fitness: float


@dataclass
class IterationRecord:
    """One history row: schedule values in effect at this generation."""

    iteration: int
    gbest_fitness: float
    omega: float
    c1: float
    c2: float
    perturbed: bool = False


@dataclass(frozen=True)
class PerturbationEvent:
    """Replay record of one chaotic relocation of the worst particles."""

    iteration: int
    indices: tuple[int, ...]
    reference: np.ndarray
    draws: np.ndarray


class _TentStream:
    """Stateful Tent-map stream feeding perturbation draws.

    One persistent map state per (relocated slot, dimension); each event
    advances every state one step. States that would collapse (leave the
    open unit interval or land exactly on a fixed point) are redrawn from
    the seeded generator, keeping the stream deterministic.
    """

    def __init__(self, phi: float, seed: int, width: int) -> None:
        self._phi = phi
        self._rng = np.random.default_rng(seed)
        self._blacklist = tent_blacklist(phi)
        self._states = [self._draw() for _ in range(width)]

    def _draw(self) -> float:
        while True:
            candidate = float(self._rng.uniform(0.0, 1.0))
            if not 0.0 < candidate < 1.0:
                continue
            if any(abs(candidate - b) < 1e-9 for b in self._blacklist):
                continue
            return candidate

    def next_matrix(self, rows: int, cols: int) -> np.ndarray:
        if rows * cols > len(self._states):
            raise ValueError("tent stream narrower than requested draw")
        out = np.empty(rows * cols)
        for i in range(rows * cols):
            x = tent_step(self._states[i], self._phi)
            if not 0.0 < x < 1.0 or any(x == b for b in self._blacklist):
                x = self._draw()
            self._states[i] = x
            out[i] = x
        return out.reshape(rows, cols)


@dataclass
class SwarmState:
    particles: list[Particle]
    global_best_position: np.ndarray
    global_best_fitness: float
    iteration: int
    history: list[IterationRecord]
    last_fitness: np.ndarray
    stagnation_counter: int = 0
    last_r1: Optional[np.ndarray] = None
    last_r2: Optional[np.ndarray] = None
    events: list[PerturbationEvent] = field(default_factory=list)
    rng_velocity: np.random.Generator = field(default=None, repr=False)
    tent_stream: _TentStream = field(default=None, repr=False)


@dataclass(frozen=True)
class RunResult:
    best_times: SegmentTimes
    best_fitness: float
    history: tuple[IterationRecord, ...]
    state: SwarmState


def inertia_weight(n: int, cfg: SwarmConfig) -> float:
    """Cosine-decreasing inertia: omega_max at n=1 down to omega_min at n=N."""
    if not 1 <= n <= cfg.n_iterations:
        raise ValueError(f"iteration {n} outside [1, {cfg.n_iterations}]")
    half_range = 0.5 * (cfg.omega_max - cfg.omega_min)
    return cfg.omega_min + half_range * (
        1.0 + math.cos((n - 1) * math.pi / (cfg.n_iterations - 1))
    )


def learning_factors(n: int, cfg: SwarmConfig) -> tuple[float, float]:
    """Dynamic (c1, c2): cognitive shrinks, social grows; sum is constant."""
    if not 1 <= n <= cfg.n_iterations:
        raise ValueError(f"iteration {n} outside [1, {cfg.n_iterations}]")
    s = math.sin(0.5 * math.pi * (1.0 - n / cfg.n_iterations))
    return cfg.c11 + s, cfg.c21 - s


def _schedule(n: int, cfg: SwarmConfig) -> tuple[float, float, float]:
    if cfg.variant == "standard":
        return 0.5 * (cfg.omega_max + cfg.omega_min), 2.0, 2.0
    omega = inertia_weight(n, cfg)
    c1, c2 = learning_factors(n, cfg)
    return omega, c1, c2


def fitness(times, problem: "PlanningProblem", penalty_coefficient: float = 1e3) -> float:
    """Total time plus penalized limit violations; +inf when a solve fails."""
    seg = times if isinstance(times, SegmentTimes) else SegmentTimes(*np.asarray(times, dtype=float))
    total = seg.total
    penalty = 0.0
    for joint in problem.joints:
        try:
            traj = solve_coefficients(joint.waypoints, seg, joint.boundary)
        except SingularSystem:
            return math.inf
        penalty += violation(traj, joint.limits)
    return total + penalty_coefficient * penalty


def _evaluate_all(positions: Sequence[np.ndarray], cfg: SwarmConfig, problem) -> np.ndarray:
    if cfg.n_workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.n_workers) as pool:
            values = list(
                pool.map(
                    lambda p: fitness(p, problem, cfg.penalty_coefficient), positions
                )
            )
    else:
        values = [fitness(p, problem, cfg.penalty_coefficient) for p in positions]
    return np.asarray(values, dtype=float)


def init_swarm(cfg: SwarmConfig, problem: "PlanningProblem") -> SwarmState:
    """Build generation 1: chaotic positions (improved) or uniform (standard)."""
    dims = cfg.bounds.dims
    if cfg.variant == "improved":
        chain = logistic_sequence(
            cfg.chaos_config(STREAM_LOGISTIC_INIT), cfg.m * dims, 1
        )
        positions = carrier_transform(chain.reshape(cfg.m, dims), cfg.bounds)
    else:
        rng = np.random.default_rng(child_seed(cfg.seed, STREAM_UNIFORM_INIT))
        positions = rng.uniform(cfg.bounds.lower, cfg.bounds.upper, size=(cfg.m, dims))

    values = _evaluate_all(list(positions), cfg, problem)
    particles = [
        Particle(
            position=positions[i].copy(),
            velocity=np.zeros(dims),
            personal_best_position=positions[i].copy(),
            personal_best_fitness=float(values[i]),
        )
        for i in range(cfg.m)
    ]
    best = int(np.argmin(values))
    omega, c1, c2 = _schedule(1, cfg)
    state = SwarmState(
        particles=particles,
        global_best_position=positions[best].copy(),
        global_best_fitness=float(values[best]),
        iteration=1,
        history=[IterationRecord(1, float(values[best]), omega, c1, c2)],
        last_fitness=values,
        rng_velocity=np.random.default_rng(child_seed(cfg.seed, STREAM_VELOCITY)),
        tent_stream=_TentStream(
            cfg.phi,
            child_seed(cfg.seed, STREAM_TENT_PERTURB),
            math.ceil(cfg.m / 4) * dims,
        ),
    )
    return state


def step(state: SwarmState, cfg: SwarmConfig, problem: "PlanningProblem") -> SwarmState:
    """Advance one generation: velocity/position update, then synchronous bests."""
    n = state.iteration
    if n >= cfg.n_iterations:
        raise ValueError("swarm already at its final generation")
    omega, c1, c2 = _schedule(n, cfg)
    dims = cfg.bounds.dims
    v_max = cfg.v_clamp_fraction * cfg.bounds.span

    # Pre-generate the whole generation's draws so evaluation order (and any
    # worker-pool scheduling) cannot change the result.
    r1 = state.rng_velocity.random((cfg.m, dims))
    r2 = state.rng_velocity.random((cfg.m, dims))
    state.last_r1, state.last_r2 = r1, r2

    gbest = state.global_best_position
    for i, particle in enumerate(state.particles):
        v = (
            omega * particle.velocity
            + c1 * r1[i] * (particle.personal_best_position - particle.position)
            + c2 * r2[i] * (gbest - particle.position)
        )
        v = np.clip(v, -v_max, v_max)
        particle.velocity = v
        particle.position = np.clip(
            particle.position + v, cfg.bounds.lower, cfg.bounds.upper
        )

    values = _evaluate_all([p.position for p in state.particles], cfg, problem)
    state.last_fitness = values
    for i, particle in enumerate(state.particles):
        if values[i] < particle.personal_best_fitness:
            particle.personal_best_fitness = float(values[i])
            particle.personal_best_position = particle.position.copy()

    previous_best = state.global_best_fitness
    champion = min(state.particles, key=lambda p: p.personal_best_fitness)
    if champion.personal_best_fitness < state.global_best_fitness:
        state.global_best_fitness = champion.personal_best_fitness
        state.global_best_position = champion.personal_best_position.copy()

    if math.isinf(previous_best) and math.isfinite(state.global_best_fitness):
        improvement = math.inf
    elif math.isinf(previous_best):
        improvement = 0.0
    else:
        improvement = (previous_best - state.global_best_fitness) / max(
            abs(previous_best), 1e-12
        )
    if improvement > STAGNATION_RTOL:
        state.stagnation_counter = 0
    else:
        state.stagnation_counter += 1

    state.iteration = n + 1
    omega_next, c1_next, c2_next = _schedule(n + 1, cfg)
    state.history.append(
        IterationRecord(
            n + 1, state.global_best_fitness, omega_next, c1_next, c2_next
        )
    )
    return state


def maybe_perturb(state: SwarmState, cfg: SwarmConfig) -> SwarmState:
    """Relocate the worst quartile around the global best after stagnation.

    No-op for the standard variant or while the window has not elapsed.
    Relocated particles keep their personal bests; velocities reset to zero
    so the next update pulls them from the new chaotic position.
    """
    if cfg.variant != "improved":
        return state
    if state.stagnation_counter < cfg.stagnation_window:
        return state

    worst_count = math.ceil(cfg.m / 4)
    order = np.argsort(state.last_fitness, kind="stable")
    indices = tuple(int(i) for i in order[-worst_count:])
    draws = state.tent_stream.next_matrix(worst_count, cfg.bounds.dims)
    relocated = perturb(
        state.global_best_position, draws, cfg.chaos_config(), cfg.bounds
    )
    for row, idx in enumerate(indices):
        state.particles[idx].position = relocated[row].copy()
        state.particles[idx].velocity = np.zeros(cfg.bounds.dims)

    state.events.append(
        PerturbationEvent(
            iteration=state.iteration,
            indices=indices,
            reference=state.global_best_position.copy(),
            draws=draws,
        )
    )
    state.history[-1].perturbed = True
    state.stagnation_counter = 0
    return state


def run(cfg: SwarmConfig, problem: "PlanningProblem") -> RunResult:
    """Full optimization: init plus N-1 generations of step and perturbation."""
    state = init_swarm(cfg, problem)
    while state.iteration < cfg.n_iterations:
        step(state, cfg, problem)
        maybe_perturb(state, cfg)
    if not math.isfinite(state.global_best_fitness):
        raise NoFeasibleSolution(
            "no particle ever produced a solvable trajectory; widen the bounds"
        )
    return RunResult(
        best_times=SegmentTimes(*state.global_best_position),
        best_fitness=state.global_best_fitness,
        history=tuple(state.history),
        state=state,
    )


def iterations_to_within(history: Sequence[IterationRecord], frac: float = 0.01) -> int:
    """First generation whose best is within ``frac`` of the final best."""
    final = history[-1].gbest_fitness
    threshold = final + frac * abs(final)
    for record in history:
        if record.gbest_fitness <= threshold:
            return record.iteration
    return history[-1].iteration
