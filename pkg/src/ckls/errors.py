"""Exception types raised across the package."""


class CklsError(Exception):
    """Base class for all package errors."""


class InvalidParameter(CklsError, ValueError):
    def __init__(self, name: str, message: str):
        self.name = name
        super().__init__(f"{name}: {message}")


class NonFinite(CklsError, FloatingPointError):
    pass


class ZeroValueNegativePower(CklsError, ValueError):
    pass


class DegenerateDenominator(CklsError, ArithmeticError):
    pass


class ZeroQvIncrement(CklsError, ValueError):
    pass


class LogDenominatorNearZero(CklsError, ValueError):
    pass


class InvalidProbeConfig(CklsError, ValueError):
    pass


class QuadratureNotConverged(CklsError, ArithmeticError):
    pass


class SingularSigma(CklsError, ArithmeticError):
    pass


class RetryBudgetExhausted(CklsError):
    pass


# Raised by estimators on a single replicate; the Monte Carlo harness rejects
# and resimulates when it sees one of these.
REPLICATE_ERRORS = (
    ZeroValueNegativePower,
    DegenerateDenominator,
    ZeroQvIncrement,
    LogDenominatorNearZero,
    NonFinite,
)
