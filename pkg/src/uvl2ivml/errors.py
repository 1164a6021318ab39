"""Diagnostics and exception hierarchy for uvl2ivml."""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional


class Severity(str, Enum):
    """Severity of a diagnostic."""

    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class SourceLocation:
    """A 1-based line/column location inside a source file."""

    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    """A located message about an input model."""

    severity: Severity
    message: str
    location: Optional[SourceLocation] = None
    source: str = field(default="<input>")

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def format(self) -> str:
        """Render as ``file:line:col: severity: message``."""
        if self.location is None:
            return f"{self.source}: {self.severity.value}: {self.message}"
        return f"{self.source}:{self.location}: {self.severity.value}: {self.message}"

    def __str__(self) -> str:
        return self.format()


class Uvl2IvmlError(Exception):
    """Base exception for uvl2ivml errors."""
    pass


class UvlSyntaxError(Uvl2IvmlError):
    """Raised when UVL text cannot be lexed or parsed."""

    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.format())
        self.diagnostic = diagnostic


class UvlLexError(UvlSyntaxError):
    """Bad character or inconsistent indentation."""
    pass


class UvlParseError(UvlSyntaxError):
    """Unexpected structure in otherwise well-formed tokens."""
    pass


class ValidationFailedError(Uvl2IvmlError):
    """Raised when a model has error diagnostics and processing cannot continue."""

    def __init__(self, diagnostics: List[Diagnostic]):
        self.diagnostics = diagnostics
        errors = [d for d in diagnostics if d.is_error]
        details = "; ".join(d.format() for d in errors)
        super().__init__(f"Validation failed with {len(errors)} error(s): {details}")


class IvmlSyntaxError(Uvl2IvmlError):
    """Raised when IVML text does not match the supported subset grammar."""

    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.format())
        self.diagnostic = diagnostic


class UnsupportedConstructError(IvmlSyntaxError):
    """Raised for IVML constructs outside the emitted subset."""

    def __init__(self, construct: str, diagnostic: Diagnostic):
        super().__init__(diagnostic)
        self.construct = construct


class IvmlModelError(Uvl2IvmlError):
    """Raised when an IVML project violates its invariants."""

    def __init__(self, problems: List[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


class TransformationError(Uvl2IvmlError):
    """Base exception for UVL to IVML transformation errors."""
    pass


class NameCollisionError(TransformationError):
    """Raised when a generated IVML name clashes with an existing name."""

    def __init__(self, name: str, reason: str):
        self.name = name
        super().__init__(f"Generated name '{name}' {reason}")


class UnboundFeatureError(TransformationError):
    """Raised when a constraint references a feature without a binding."""

    def __init__(self, feature: str):
        self.feature = feature
        super().__init__(f"Feature '{feature}' has no binding")


class RoundTripError(TransformationError):
    """Raised when emitted IVML does not parse back to the same project."""
    pass


class OracleError(Uvl2IvmlError):
    """Base exception for configuration-space checks."""
    pass


class EnumerationCapError(OracleError):
    """Raised when a model is too large to enumerate."""

    def __init__(self, what: str, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(f"{what} ({size}) exceeds the enumeration cap of {cap}")


class NonBooleanModelError(OracleError):
    """Raised when the oracle is asked to enumerate a non-boolean model."""
    pass


class MappingError(OracleError):
    """Raised when a configuration cannot be mapped onto IVML variables."""
    pass


class IvmlEvaluationError(OracleError):
    """Raised when an IVML constraint cannot be evaluated."""
    pass
