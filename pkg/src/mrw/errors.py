"""Shared exception types for the workbench."""


class WorkbenchError(Exception):
    """Base class for all workbench-specific failures."""


class DimensionError(WorkbenchError, ValueError):
    """Operands have incompatible or invalid shapes."""


class ValidationError(WorkbenchError, ValueError):
    """Input violates a documented precondition."""


class UnsupportedRankError(ValidationError):
    """Matrix rank is outside what the routine supports."""


class CapacityError(WorkbenchError, RuntimeError):
    """Requested object exceeds the dense-storage or search guard rails."""


class ParseError(WorkbenchError, ValueError):
    """Malformed input file; carries line/column when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column
