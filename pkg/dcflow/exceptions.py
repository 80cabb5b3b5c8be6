"""Exceptions module."""


class DCFlowException(Exception):
    """Base class for all dcflow exceptions."""

    def __init__(self, message: str, exit_code: int | None = None):
        """Initialize the exception.

        :param message: The message to display.
        :param exit_code: The process exit code the CLI maps this error to, if any.
        """
        self.exit_code = exit_code
        super().__init__(message)


class ParsingException(DCFlowException):
    """Exception raised when a case file cannot be parsed."""

    def __init__(self, message: str):
        super().__init__(message, exit_code=2)


class ValidationException(DCFlowException):
    """Base class for network validation errors."""

    def __init__(self, message: str):
        super().__init__(message, exit_code=3)


class DisconnectedGraph(ValidationException):
    """Raised when some buses cannot be reached from the slack bus."""


class NoVoltageBus(ValidationException):
    """Raised when the network has no constant-voltage bus."""


class DuplicateLine(ValidationException):
    """Raised when two lines join the same unordered pair of buses."""


class NonPositiveConductance(ValidationException):
    """Raised when a line conductance is not strictly positive."""


class UnknownBus(ValidationException):
    """Raised when a line endpoint does not name a bus of the network."""


class SelfLoop(ValidationException):
    """Raised when a line starts and ends at the same bus."""


class NoZipBus(ValidationException):
    """Raised when the network has no ZIP bus to solve for."""


class NumericalException(DCFlowException):
    """Base class for errors raised by the numerical kernels."""


class SingularGError(NumericalException):
    """Raised when the reduced Laplacian cannot be factorised."""


class NotSymmetricError(NumericalException):
    """Raised when a matrix expected to be symmetric is not."""


class NonPositiveVoltage(NumericalException):
    """Raised when a voltage vector has a non-positive entry."""


class ZeroVoltageEntry(NumericalException):
    """Raised when the Z-bus map is evaluated at a vector with a zero entry."""


class NonPositiveInput(NumericalException):
    """Raised when the squared-voltage map is evaluated outside the positive orthant."""


class EnergyOverflow(NumericalException):
    """Raised when an exponential in the energy function overflows."""


class NoPositiveRoot(NumericalException):
    """Raised when the single-bus quadratic has no positive root."""
