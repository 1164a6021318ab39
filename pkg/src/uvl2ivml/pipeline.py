"""Parse, transform, emit and verify: the steps shared by the CLI and the MCP tools."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .config import OracleConfig
from .errors import (
    Diagnostic,
    IvmlSyntaxError,
    RoundTripError,
    Severity,
    UvlSyntaxError,
    ValidationFailedError,
)
from .ivml import IvmlProject, check_project, emit_ivml, parse_ivml_subset
from .oracle import EquivalenceReport, check_equivalence
from .transformer import FeatureBinding, TransformOptions, transform
from .uvl import UvlModel, parse_uvl, validate_uvl


logger = logging.getLogger(__name__)

LANGUAGES = ("uvl", "ivml")


@dataclass(frozen=True)
class TranspileResult:
    """Everything produced by one transformation run."""

    model: UvlModel
    project: IvmlProject
    bindings: Dict[str, FeatureBinding]
    text: str
    warnings: Tuple[Diagnostic, ...] = ()


def load_uvl(text: str, source_name: str = "<input>") -> Tuple[UvlModel, List[Diagnostic]]:
    """Parse and validate UVL text; returns the model and its warnings.

    Raises:
        UvlSyntaxError: the text does not parse
        ValidationFailedError: the model has error diagnostics
    """
    model = parse_uvl(text, source_name)
    diagnostics = validate_uvl(model)
    if any(d.is_error for d in diagnostics):
        raise ValidationFailedError(diagnostics)
    return model, diagnostics


def transpile(text: str, opts: Optional[TransformOptions] = None, source_name: str = "<input>") -> TranspileResult:
    """Transform UVL text to IVML text and check that the output parses back unchanged.

    Raises:
        RoundTripError: the emitted text does not parse back to the same project
    """
    opts = opts or TransformOptions()
    model, warnings = load_uvl(text, source_name)
    project, bindings = transform(model, opts)
    ivml_text = emit_ivml(project)
    try:
        reparsed = parse_ivml_subset(ivml_text, source_name=f"{source_name} (emitted)")
    except IvmlSyntaxError as e:
        raise RoundTripError(f"emitted IVML does not parse: {e}") from e
    if reparsed != project:
        raise RoundTripError("emitted IVML parses to a different project")
    return TranspileResult(model, project, bindings, ivml_text, tuple(warnings))


def verify(result: TranspileResult, limits: Optional[OracleConfig] = None) -> EquivalenceReport:
    """Run the configuration-space oracle on a transformation result."""
    return check_equivalence(result.model, result.project, result.bindings, limits)


def detect_language(path: str, override: Optional[str] = None) -> str:
    """Input language from ``override`` or the file extension.

    Raises:
        ValueError: neither gives a known language
    """
    if override:
        if override not in LANGUAGES:
            raise ValueError(f"Unknown language '{override}'")
        return override
    suffix = Path(path).suffix.lower().lstrip(".")
    if suffix not in LANGUAGES:
        raise ValueError(f"Cannot tell the language of '{path}'; use --lang")
    return suffix


def validate_text(text: str, language: str, source_name: str = "<input>") -> List[Diagnostic]:
    """Syntax and well-formedness diagnostics for UVL or IVML text."""
    if language == "uvl":
        try:
            return validate_uvl(parse_uvl(text, source_name))
        except UvlSyntaxError as e:
            return [e.diagnostic]
    if language == "ivml":
        try:
            project = parse_ivml_subset(text, source_name)
        except IvmlSyntaxError as e:
            return [e.diagnostic]
        return [Diagnostic(Severity.ERROR, problem, None, source_name) for problem in check_project(project)]
    raise ValueError(f"Unknown language '{language}'")
