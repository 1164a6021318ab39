"""uvl2ivml - transform UVL feature models into IVML projects and check configuration-space equivalence."""

__version__ = "0.1.0"

from .ivml import IvmlProject, emit_ivml, parse_ivml_subset
from .oracle import EquivalenceReport, check_equivalence
from .pipeline import transpile, verify
from .transformer import NamingMode, TransformMode, TransformOptions, transform
from .uvl import UvlModel, parse_uvl, validate_uvl

__all__ = [
    "EquivalenceReport",
    "IvmlProject",
    "NamingMode",
    "TransformMode",
    "TransformOptions",
    "UvlModel",
    "check_equivalence",
    "emit_ivml",
    "parse_ivml_subset",
    "parse_uvl",
    "transform",
    "transpile",
    "validate_uvl",
    "verify",
]
