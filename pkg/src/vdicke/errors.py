"""Exception types shared across the package."""


class VDickeError(Exception):
    """Base class for all package errors."""


class ValidationError(VDickeError, ValueError):
    """A domain object was constructed with invalid data."""


class DomainError(VDickeError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class NotSuperradiant(VDickeError):
    """Requested a superradiant quantity at a point inside the normal phase."""


class UnphysicalState(VDickeError):
    """Holstein-Primakoff expansion breaks down (reference level depleted)."""


class NoConvergence(VDickeError):
    """A nonlinear solver failed to reach the requested residual."""


class EigensolverFailure(VDickeError):
    """The dense eigensolver did not converge."""


class ZeroDetuning(ValidationError):
    """A Raman channel detuning is zero."""


class InconsistentRaman(VDickeError):
    """The two Raman channels imply different co/counter mixing angles."""


class BothCouplingsZero(VDickeError):
    """Dark state is undefined when lambda1 = lambda2 = 0."""


class NotConverged(VDickeError):
    """A trajectory did not settle onto a fixed point."""


class StepSizeUnderflow(VDickeError):
    """The adaptive integrator step collapsed below the resolvable scale."""


class ConstraintDriftExceeded(VDickeError):
    """SU(3) constraint drift along a trajectory exceeded the configured limit."""


class ConfigError(VDickeError):
    """A run configuration failed schema validation."""
