"""Exception hierarchy shared by the analytic and simulation modules."""


class HawkesLdpError(Exception):
    """Base class for all package errors."""


class ConfigError(HawkesLdpError, ValueError):
    """Invalid parameters or configuration entries."""


class DomainError(HawkesLdpError, ValueError):
    """An MGF argument reached or crossed the edge of its domain."""


class TiltTooLarge(DomainError):
    """A finite-horizon recursion pushed an MGF argument out of its domain."""


class InvalidOrder(HawkesLdpError, ValueError):
    pass


class StabilityError(HawkesLdpError, ValueError):
    """The subcriticality condition ||alpha||_1 E[l] < 1 fails."""


class ThetaAboveCritical(HawkesLdpError, ValueError):
    """Limiting CGF is +inf for this theta."""


class ThetaAtCritical(HawkesLdpError, ValueError):
    """Derivative of the limiting CGF diverges at this theta."""


class ResourceError(HawkesLdpError, RuntimeError):
    """Intensity left the floating-point range during simulation."""


class ConsistencyError(HawkesLdpError, RuntimeError):
    """Stored path data does not reproduce its own intensity."""


class EstimatorDegenerate(HawkesLdpError, RuntimeError):
    pass
