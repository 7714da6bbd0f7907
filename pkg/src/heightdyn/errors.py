"""Exception hierarchy.

Two broad families matter to callers: configuration problems (bad input
syntax, malformed map files) and precondition failures (the math refuses:
singular matrices, aperiodic codes, infinite valuations).  The CLI maps
them to distinct exit codes.
"""


class HeightDynError(Exception):
    """Base class for all package errors."""


class ConfigError(HeightDynError):
    """Malformed input: rational grammar, map JSON, command parameters."""


class PreconditionError(HeightDynError):
    """A documented precondition of an operation does not hold."""


class SingularMatrixError(PreconditionError):
    """Linear part is singular where invertibility is required."""


class FixedPointError(PreconditionError):
    """1 is an eigenvalue of the linear part: fixed point not unique/absent."""


class AperiodicCodeError(PreconditionError):
    """Orbit code did not stabilize to a periodic word within the window."""


class CertificationError(PreconditionError):
    """Island candidate failed certification (center code mismatch)."""


class InfiniteValuationError(PreconditionError):
    """An estimator endpoint hit valuation +inf (zero coordinate pair)."""
