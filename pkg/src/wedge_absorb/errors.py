"""Exception hierarchy."""


class WedgeAbsorbError(Exception):
    """Base class for all errors raised by this package."""


class RegimeViolation(WedgeAbsorbError, ValueError):
    """Model lies outside the transient absorbing regime (theta in (0, beta), alpha >= 1)."""


class ConeMembershipError(WedgeAbsorbError, ValueError):
    pass


class MultipleRootError(WedgeAbsorbError):
    def __init__(self, j, message=None):
        self.j = j
        super().__init__(message or f"simple-root condition violated at j={j}")


class DegreeOneError(WedgeAbsorbError, ValueError):
    pass


class PoleError(WedgeAbsorbError, ZeroDivisionError):
    pass


class CardinalityError(WedgeAbsorbError):
    pass


class DivisionResidualError(WedgeAbsorbError):
    pass


class ChainDegenerateError(WedgeAbsorbError):
    pass


class ZeroDenominatorError(WedgeAbsorbError, ZeroDivisionError):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"vanishing k-form denominator at index {index}")


class ResonanceMismatchError(WedgeAbsorbError, ValueError):
    pass


class DegenerateReflectionError(WedgeAbsorbError, ValueError):
    pass


class NotSumOfExponentials(WedgeAbsorbError):
    """Raised when the exponential-sum path is requested for alpha outside N."""


class DoubleRootNotImplemented(WedgeAbsorbError, NotImplementedError):
    """Resonant configuration without a closed form (alpha > 2 with double roots)."""

    def __init__(self, j, alpha):
        self.j = j
        self.alpha = alpha
        super().__init__(
            f"double roots at j={j} for alpha={alpha}; closed form only available for alpha=2"
        )


class TooManyCensoredError(WedgeAbsorbError):
    def __init__(self, estimate, fraction):
        self.estimate = estimate
        self.fraction = fraction
        super().__init__(f"{100 * fraction:.2f}% of paths censored (limit 5%)")
