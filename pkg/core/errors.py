"""
Exception hierarchy for the hlsgen compiler.

Every error carries a numbered diagnostic code and, where known, the source
position it refers to. The driver turns these into ``Diagnostic`` records and
process exit codes.
"""

from typing import Optional

from core.design_interfaces import Diagnostic, ValidationSeverity

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID_SOURCE = 2
EXIT_INTERNAL = 3


class HlsError(Exception):
    """Base exception for all compiler errors."""

    code = "E000"
    exit_code = EXIT_INVALID_SOURCE

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        address: Optional[int] = None,
    ):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column
        self.address = address

    def at(self, line: Optional[int], column: Optional[int] = None) -> "HlsError":
        """Attach a source position unless one is already present."""
        if self.line is None:
            self.line = line
            self.column = column
        return self

    def to_diagnostic(self, source: Optional[str] = None) -> Diagnostic:
        message = self.message
        if self.address is not None:
            message = f"{message} (tree node {self.address})"
        return Diagnostic(
            severity=ValidationSeverity.ERROR,
            code=self.code,
            message=message,
            line=self.line,
            column=self.column,
            source=source,
        )

    def __str__(self) -> str:
        if self.line is not None:
            return f"{self.code} line {self.line}: {self.message}"
        return f"{self.code}: {self.message}"


class SourceSyntaxError(HlsError):
    """Raised when the design source does not match the dialect grammar."""

    code = "E001"


class LimitError(HlsError):
    """Raised when a design declares more than 20 inputs or outputs."""

    code = "E002"


class NestingError(HlsError):
    """Raised when if/else blocks nest deeper than two levels."""

    code = "E003"


class NonConstantBound(HlsError):
    """Raised when a loop bound or array index is not elaboration-constant."""

    code = "E004"


class UndefinedName(HlsError):
    """Raised when an operand is neither an input, a constant nor produced earlier."""

    code = "E005"


class RangeError(HlsError):
    """Raised when a real constant cannot be represented in Q16.16."""

    code = "E006"


class DomainError(HlsError):
    """Raised when a function is evaluated outside its mathematical domain."""

    code = "E007"


class ArityError(HlsError):
    """Raised when a call's operand count does not match its definition."""

    code = "E016"


class DuplicateLabel(HlsError):
    """Raised when registering a library label that already exists."""

    code = "E020"
    exit_code = EXIT_USAGE


class MissingFile(HlsError):
    """Raised when a required input file does not exist."""

    code = "E021"
    exit_code = EXIT_USAGE


class NotFound(HlsError):
    """Raised when a library label cannot be found."""

    code = "E022"


class CorruptManifest(HlsError):
    """Raised when a library manifest cannot be read or fails its schema."""

    code = "E023"


class InvalidEntry(HlsError):
    """Raised when a library entry is structurally invalid."""

    code = "E024"
    exit_code = EXIT_USAGE


class LibraryLocked(HlsError):
    """Raised when the library lock file cannot be acquired in time."""

    code = "E025"
    exit_code = EXIT_USAGE


class OutputError(HlsError):
    """Raised when the output directory cannot be used."""

    code = "E026"
    exit_code = EXIT_USAGE


class UnmodeledCall(HlsError):
    """Raised when simulating a library call without a behavioural model."""

    code = "E030"


class CostFileError(HlsError):
    """Raised for malformed cost override files."""

    code = "E031"
    exit_code = EXIT_USAGE


class InternalError(HlsError):
    """Raised when an internal invariant is violated."""

    code = "E900"
    exit_code = EXIT_INTERNAL
