"""Exception and warning types shared across the package."""


class ChebiterError(Exception):
    """Base class for all package errors."""


class InvalidRange(ChebiterError, ValueError):
    """Eigenvalue range is malformed or outside the domain an operation needs."""


class DimensionError(ChebiterError, ValueError):
    """Vector or matrix dimensions do not match the declared map dimension."""


class NonFiniteValue(ChebiterError, ArithmeticError):
    """A computation produced NaN or infinity where finite values are required."""


class NotSymmetric(ChebiterError, ValueError):
    """Matrix fails the symmetry tolerance of a symmetric-only operation."""


class NotAFixedPoint(ChebiterError, ValueError):
    """Point offered as a fixed point does not satisfy f(x) = x within tolerance."""


class InvalidInput(ChebiterError, ValueError):
    """Argument violates an operation precondition not covered by a finer type."""


class SingularDiagonal(ChebiterError, ValueError):
    """Matrix diagonal contains a zero entry where a splitting needs to divide by it."""


class DegenerateOperator(ChebiterError, ValueError):
    """Operator is identically zero or otherwise unusable for the requested build."""


class DomainError(ChebiterError, ValueError):
    """Input lies outside the mathematical domain of the map."""


class FormatError(ChebiterError, ValueError):
    """File content does not parse under the expected format."""


class UnsupportedFormat(FormatError):
    """File parses as a related format the package deliberately does not handle."""


class ConfigError(ChebiterError, ValueError):
    """Experiment configuration is incomplete or inconsistent."""


class SpectrumNotCertifiedReal(UserWarning):
    """Jacobian is not symmetric and carries no certificate that its spectrum is real.

    Emitted when an eigenvalue range is estimated from the symmetrized
    Jacobian as a fallback. The returned range may misjudge the true
    spectrum if the asymmetry is more than cosmetic.
    """
