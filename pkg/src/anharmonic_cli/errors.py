"""Exception hierarchy for anharmonic-cli."""


class AnharmonicError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 2


class ConfigError(AnharmonicError):
    """Invalid, missing or malformed run configuration."""

    exit_code = 1


class ValidationFailure(AnharmonicError):
    """A required check of the validation suite failed."""

    exit_code = 3


class NumericalError(AnharmonicError):
    """Base class for failures of the numerical pipeline."""

    exit_code = 2


class InvalidDimensionError(NumericalError):
    """Truncation dimension below the supported minimum."""

    pass


class InvalidOperatorError(NumericalError):
    """Operator does not satisfy the structure an operation requires."""

    pass


class InvalidParameterError(NumericalError):
    """Physical parameter outside its admissible range."""

    pass


class UnstableSpectrumError(NumericalError):
    """Hamiltonian whose spectrum has no lower bound."""

    pass


class InvalidStateError(NumericalError):
    """Matrix that is not a valid density matrix."""

    pass


class TruncationOverflowError(NumericalError):
    """Retained levels cannot hold the requested thermal state."""

    pass


class UnconvergedTruncationError(TruncationOverflowError):
    """Retained levels still move when the working dimension doubles."""

    def __init__(self, message: str, shift: float | None = None) -> None:
        super().__init__(message)
        self.shift = shift


class UndefinedStatisticError(NumericalError):
    """Normalised statistic with a vanishing denominator."""

    pass


class DomainError(NumericalError):
    """Closed-form expression evaluated outside its domain."""

    pass


class DimensionMismatchError(NumericalError):
    """Operands built for different truncations or orderings."""

    pass


class NonUniqueSteadyStateError(NumericalError):
    """Liouvillian null space is degenerate."""

    pass


class SolverError(NumericalError):
    """Linear solve failed or did not reach the requested residual."""

    def __init__(self, message: str, condition: float | None = None) -> None:
        super().__init__(message)
        self.condition = condition


class IntegrationError(NumericalError):
    """Time-domain integral does not converge."""

    pass


class UndefinedCorrelationError(NumericalError):
    """Two-photon correlation normalised by a vanishing spectrum."""

    pass


class MemoryGuardError(NumericalError):
    """Requested augmented system exceeds the oracle size limit."""

    pass


class SensorCouplingError(NumericalError):
    """Sensor coupling outside the weak-coupling regime."""

    pass
