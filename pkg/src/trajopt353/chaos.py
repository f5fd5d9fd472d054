"""Logistic and Tent chaotic sequences plus the carrier and perturbation maps.

The sequences seed the swarm's initial positions (after an affine carrier
transform onto the decision-variable box) and relocate stagnated particles
by blending the current optimum with fresh Tent chaos in normalized space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadSeedState, DegenerateAlpha

# Initial states this close to a fixed/absorbing point of the map are redrawn.
_FIXED_POINT_TOL = 1e-9


@dataclass(frozen=True)
class ChaosConfig:
    """Parameters of the chaotic generators.

    mu     Logistic parameter; 4.0 is the fully chaotic regime.
    phi    Tent breakpoint in (0, 1).
    alpha  Perturbation blend in [0, 1); 1 would divide by zero.
    seed   Nonnegative integer seeding the initial chaos states.
    """

    mu: float = 4.0
    phi: float = 0.6
    alpha: float = 0.3
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 < self.mu <= 4.0):
            raise ValueError(f"mu must lie in (0, 4], got {self.mu}")
        if not (0.0 < self.phi < 1.0):
            raise ValueError(f"phi must lie in (0, 1), got {self.phi}")
        if self.alpha == 1.0:
            raise DegenerateAlpha("alpha = 1 makes the perturbation divide by zero")
        if not (0.0 <= self.alpha < 1.0):
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")
        if self.seed < 0:
            raise ValueError(f"seed must be nonnegative, got {self.seed}")


@dataclass(frozen=True)
class Bounds:
    """Per-dimension box for the decision variables (segment times)."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.shape != upper.shape:
            raise ValueError("lower and upper must have the same shape")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("bounds must be finite")
        if not np.all(lower < upper):
            raise ValueError("every lower bound must be strictly below its upper")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def cube(cls, lower: float, upper: float, dims: int) -> "Bounds":
        return cls(np.full(dims, float(lower)), np.full(dims, float(upper)))

    @property
    def dims(self) -> int:
        return self.lower.shape[0]

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower


def child_seed(master: int, index: int) -> int:
    """Derive an independent stream seed from (master, index).

    Documented splitting rule for concurrent generator instances: each worker
    gets ``child_seed(master, worker_index)``.
    """
    return int(np.random.SeedSequence([int(master), int(index)]).generate_state(1, np.uint64)[0])


def logistic_blacklist(mu: float) -> tuple[float, ...]:
    """Initial states that collapse the Logistic map (fixed points and preimages)."""
    # Absorbing orbit of the mu=4 map: 0.25 -> 0.75 (fixed), 0.5 -> 1 -> 0.
    return (0.0, 0.25, 0.5, 0.75, 1.0)


def tent_blacklist(phi: float) -> tuple[float, ...]:
    """Initial states that collapse the Tent map."""
    # x = phi maps to 1 and then to 0; 1/(2-phi) is the fixed point.
    return (0.0, phi, 1.0 / (2.0 - phi), 1.0)


def _initial_states(
    count: int, blacklist: tuple[float, ...], seed: int, x0
) -> list[float]:
    if x0 is not None:
        states = [float(v) for v in np.atleast_1d(np.asarray(x0, dtype=float))]
        if len(states) != count:
            raise ValueError(f"x0 must provide {count} states, got {len(states)}")
        for state in states:
            if not 0.0 < state < 1.0:
                raise BadSeedState(f"initial state {state} outside (0, 1)")
            if any(abs(state - b) < _FIXED_POINT_TOL for b in blacklist):
                raise BadSeedState(f"initial state {state} sits on a map fixed point")
        return states

    rng = np.random.default_rng(seed)
    states = []
    for _ in range(count):
        while True:
            candidate = float(rng.uniform(0.0, 1.0))
            if candidate <= 0.0 or candidate >= 1.0:
                continue
            if any(abs(candidate - b) < _FIXED_POINT_TOL for b in blacklist):
                continue  # deterministic redraw from the same stream
            states.append(candidate)
            break
    return states


def logistic_step(x: float, mu: float) -> float:
    return mu * x * (1.0 - x)


def tent_step(x: float, phi: float) -> float:
    return x / phi if x < phi else (1.0 - x) / (1.0 - phi)


def _iterate(step, states: list[float], param: float, length: int) -> np.ndarray:
    out = np.empty((length, len(states)))
    for d, x in enumerate(states):
        for k in range(length):
            x = step(x, param)
            if not 0.0 < x < 1.0:
                raise BadSeedState(
                    f"iterate {x!r} left (0, 1) at step {k} of dimension {d}"
                )
            out[k, d] = x
    return out


def logistic_sequence(
    config: ChaosConfig, length: int, dimensions: int, x0=None
) -> np.ndarray:
    """(length, dimensions) matrix of Logistic iterates x' = mu*x*(1-x).

    One independent stream per dimension; initial states come from the seeded
    generator (redrawn off the fixed-point blacklist) unless ``x0`` gives them
    explicitly. The returned values start after the initial state.
    """
    if length < 1 or dimensions < 1:
        raise ValueError("length and dimensions must be >= 1")
    states = _initial_states(dimensions, logistic_blacklist(config.mu), config.seed, x0)
    return _iterate(logistic_step, states, config.mu, length)


def tent_sequence(
    config: ChaosConfig, length: int, dimensions: int, x0=None
) -> np.ndarray:
    """(length, dimensions) matrix of Tent iterates with breakpoint phi."""
    if length < 1 or dimensions < 1:
        raise ValueError("length and dimensions must be >= 1")
    states = _initial_states(dimensions, tent_blacklist(config.phi), config.seed, x0)
    return _iterate(tent_step, states, config.phi, length)


def carrier_transform(ch, bounds: Bounds) -> np.ndarray:
    """Affine map of chaotic values in (0, 1) onto the decision box.

    ``x = x_max - (x_max - x_min) * ch``, so ch -> 0 yields the upper bound
    and ch -> 1 the lower; orientation is irrelevant for uniform chaos.
    """
    ch = np.asarray(ch, dtype=float)
    return bounds.upper - bounds.span * ch


def perturb(p_best, th, config: ChaosConfig, bounds: Bounds) -> np.ndarray:
    """Relocate a converged solution by blending it with Tent chaos.

    Works in per-dimension normalized coordinates: the optimum is mapped to
    [0, 1], shifted by ``(p_norm - alpha*th) / (1 - alpha)``, clamped, and
    mapped back onto the bounds. alpha = 0 is the identity.
    """
    if config.alpha == 1.0:
        raise DegenerateAlpha("alpha = 1 makes the perturbation divide by zero")
    p_best = np.asarray(p_best, dtype=float)
    th = np.asarray(th, dtype=float)
    p_norm = (p_best - bounds.lower) / bounds.span
    psi = (p_norm - config.alpha * th) / (1.0 - config.alpha)
    psi = np.clip(psi, 0.0, 1.0)
    return psi * bounds.span + bounds.lower
