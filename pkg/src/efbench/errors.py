"""Exception hierarchy.

Two families map onto the CLI exit codes: :class:`ValidationError` for bad
input (exit 2) and :class:`NumericalError` for failures while computing
(exit 3).
"""


class EFBenchError(Exception):
    """Base class for all package errors."""


class ValidationError(EFBenchError, ValueError):
    """Input violates a documented precondition."""


class NumericalError(EFBenchError, ArithmeticError):
    """A computation hit a singular, unstable or non-finite state."""


class MaterialParseError(ValidationError):
    """Material file does not follow the schema."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(field)
        prefix = ": ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class MaterialValidationError(MaterialParseError):
    """Material coefficients are well-formed but physically invalid."""


class SingularMaterialError(NumericalError):
    pass


class EvanescentError(NumericalError):
    pass


class DegenerateDispersionError(NumericalError):
    pass


class SingularityError(NumericalError):
    """Special function evaluated at its singular point."""


class RangeError(NumericalError):
    """Argument outside the representable range of a special function."""


class ResolutionError(ValidationError):
    pass


class TruncationError(ValidationError):
    pass


class EmptyInputError(ValidationError):
    pass


class TransferSingularityError(NumericalError):
    def __init__(self, message, omega=None):
        self.omega = omega
        super().__init__(message)


class TransferSymmetryError(ValidationError):
    pass


class GeometryError(ValidationError):
    pass


class CFLError(ValidationError):
    pass


class DomainTooShortError(ValidationError):
    pass


class InstabilityError(NumericalError):
    def __init__(self, message, step_index=None):
        self.step_index = step_index
        super().__init__(message)


class ReceiverMappingError(ValidationError):
    pass


class DomainError(ValidationError):
    """Two signals have no overlapping time support."""
