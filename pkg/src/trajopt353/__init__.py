"""Time-optimal 3-5-3 joint trajectory planning with a chaos-enhanced PSO.

The package splits into the polynomial layer (``poly353``, ``limits``),
the optimizer layer (``chaos``, ``pso``), the orchestration layer
(``planner``), standalone vision formula references
(``vision_kernels``), and a command-line front end (``cli``).
"""

from .chaos import (
    Bounds,
    ChaosConfig,
    carrier_transform,
    child_seed,
    logistic_sequence,
    perturb,
    tent_sequence,
)
from .errors import (
    BadSeedState,
    ConfigError,
    DegenerateAlpha,
    DomainError,
    InfeasibleAfterSync,
    NoFeasibleSolution,
    NonFinite,
    OutOfRange,
    ShapeMismatch,
    SingularSystem,
    TrajoptError,
)
from .limits import KinematicLimits, violation
from .planner import (
    JointSpec,
    PlanningProblem,
    SynchronizedTrajectory,
    plan,
    sample,
)
from .poly353 import (
    REST,
    BoundaryConditions,
    ExtremaResult,
    JointTrajectory353,
    JointWaypoints,
    SegmentTimes,
    TrajectorySample,
    derivative_extrema,
    evaluate,
    evaluate_array,
    solve_coefficients,
)
from .pso import (
    RunResult,
    SwarmConfig,
    SwarmState,
    fitness,
    inertia_weight,
    init_swarm,
    iterations_to_within,
    learning_factors,
    maybe_perturb,
    run,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "BadSeedState",
    "BoundaryConditions",
    "Bounds",
    "ChaosConfig",
    "ConfigError",
    "DegenerateAlpha",
    "DomainError",
    "ExtremaResult",
    "InfeasibleAfterSync",
    "JointSpec",
    "JointTrajectory353",
    "JointWaypoints",
    "KinematicLimits",
    "NoFeasibleSolution",
    "NonFinite",
    "OutOfRange",
    "PlanningProblem",
    "REST",
    "RunResult",
    "SegmentTimes",
    "ShapeMismatch",
    "SingularSystem",
    "SwarmConfig",
    "SwarmState",
    "SynchronizedTrajectory",
    "TrajectorySample",
    "TrajoptError",
    "carrier_transform",
    "child_seed",
    "derivative_extrema",
    "evaluate",
    "evaluate_array",
    "fitness",
    "inertia_weight",
    "init_swarm",
    "iterations_to_within",
    "learning_factors",
    "logistic_sequence",
    "maybe_perturb",
    "perturb",
    "plan",
    "run",
    "sample",
    "solve_coefficients",
    "step",
    "tent_sequence",
    "violation",
    "__version__",
]
