"""Exception hierarchy shared by all trajopt353 modules."""


class TrajoptError(Exception):
    """Base class for all errors raised by this package."""


class NonFinite(TrajoptError):
    """An input value is NaN or infinite."""


class SingularSystem(TrajoptError):
    """The coefficient system could not be solved to the required residual."""


class OutOfRange(TrajoptError):
    """A query time lies outside the trajectory's duration."""


class BadSeedState(TrajoptError):
    """A chaotic iterate left (0, 1) or an initial state sits on a fixed point."""


class DegenerateAlpha(TrajoptError):
    """Perturbation blend alpha = 1 would divide by zero."""


class ShapeMismatch(TrajoptError):
    """Array arguments have incompatible shapes."""


class DomainError(TrajoptError):
    """A scalar argument lies outside the function's domain."""


class NoFeasibleSolution(TrajoptError):
    """The optimizer found no segment times satisfying the kinematic limits."""


class InfeasibleAfterSync(TrajoptError):
    """Per-joint-max synchronization produced a limit-violating trajectory."""


class ConfigError(TrajoptError):
    """A run configuration file failed to parse or validate."""
