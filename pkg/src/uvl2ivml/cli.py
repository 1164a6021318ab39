"""Command-line entry point: ``uvl2ivml transform|check|validate``.

Exit codes: 0 success, 1 validation/transformation/equivalence failure,
2 usage, I/O or enumeration-cap errors.
"""

import argparse
import logging
import os
import sys
import tempfile
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, Field, ValidationError, model_validator, validator

from . import __version__
from .config import load_config
from .errors import (
    EnumerationCapError,
    IvmlModelError,
    NonBooleanModelError,
    TransformationError,
    UvlSyntaxError,
    ValidationFailedError,
)
from .pipeline import LANGUAGES, TranspileResult, detect_language, transpile, validate_text, verify
from .transformer import NamingMode, TransformMode, TransformOptions


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class Command(str, Enum):
    TRANSFORM = "transform"
    CHECK = "check"
    VALIDATE = "validate"


class CliInvocation(BaseModel):
    """A parsed command line."""

    command: Command
    input: str = Field(..., description="Input model path")
    output: Optional[str] = Field(default=None, description="Output path, '-' for standard output")
    mode: TransformMode = Field(default=TransformMode.FAITHFUL)
    naming: NamingMode = Field(default=NamingMode.SUFFIX)
    project_name: Optional[str] = Field(default=None)
    enum_names: Dict[str, str] = Field(default_factory=dict)
    cap: Optional[int] = Field(default=None, description="Decision-feature cap for the oracle")
    verbosity: int = Field(default=0)
    lang: Optional[str] = Field(default=None)

    @validator("cap")
    def validate_cap(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v <= 0:
            raise ValueError("--cap must be positive")
        return v

    @model_validator(mode="after")
    def require_output(self) -> "CliInvocation":
        if self.command is Command.TRANSFORM and not self.output:
            raise ValueError("transform requires -o/--output (use '-' for standard output)")
        return self

    def transform_options(self) -> TransformOptions:
        return TransformOptions(
            mode=self.mode, naming=self.naming, project_name=self.project_name, enum_names=self.enum_names
        )


def _enum_name(value: str) -> Tuple[str, str]:
    parent, sep, name = value.partition("=")
    if not sep or not parent or not name:
        raise argparse.ArgumentTypeError(f"expected PARENT=NAME, got '{value}'")
    return parent, name


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uvl2ivml", description="Transform UVL feature models into IVML projects.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_common(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("input", help="input model file")
        sub.add_argument("-v", "--verbose", action="count", default=0, help="more logging (-vv for debug)")

    def add_transform_flags(sub: argparse.ArgumentParser, default_mode: TransformMode) -> None:
        sub.add_argument("--mode", choices=[m.value for m in TransformMode], default=default_mode.value)
        sub.add_argument("--naming", choices=[n.value for n in NamingMode], default=NamingMode.SUFFIX.value)
        sub.add_argument("--project-name", dest="project_name", help="IVML project name")
        sub.add_argument(
            "--enum-name",
            dest="enum_names",
            action="append",
            type=_enum_name,
            default=[],
            metavar="PARENT=NAME",
            help="enum name for the groups of PARENT (repeatable)",
        )

    transform_cmd = subparsers.add_parser("transform", help="write the IVML project for a UVL model")
    add_common(transform_cmd)
    add_transform_flags(transform_cmd, TransformMode.FAITHFUL)
    transform_cmd.add_argument("-o", "--output", help="output file, '-' for standard output")

    check_cmd = subparsers.add_parser("check", help="compare UVL and IVML configuration spaces")
    add_common(check_cmd)
    add_transform_flags(check_cmd, TransformMode.STRICT)
    check_cmd.add_argument("--cap", type=int, help="maximum number of decision features (env UVL2IVML_CAP)")

    validate_cmd = subparsers.add_parser("validate", help="check a .uvl or .ivml file")
    add_common(validate_cmd)
    validate_cmd.add_argument("--lang", choices=list(LANGUAGES), help="input language for other extensions")
    return parser


def _invocation(args: argparse.Namespace) -> CliInvocation:
    return CliInvocation(
        command=Command(args.command),
        input=args.input,
        output=getattr(args, "output", None),
        mode=getattr(args, "mode", TransformMode.FAITHFUL.value),
        naming=getattr(args, "naming", NamingMode.SUFFIX.value),
        project_name=getattr(args, "project_name", None),
        enum_names=dict(getattr(args, "enum_names", [])),
        cap=getattr(args, "cap", None),
        verbosity=args.verbose,
        lang=getattr(args, "lang", None),
    )


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    if os.getenv("DEBUG", "false").lower() == "true" or os.getenv("UVL2IVML_DEBUG", "false").lower() == "true":
        level = logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )


def _error(message: str) -> None:
    print(message, file=sys.stderr)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` so that readers never see a partial file."""
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    target = Path(path)
    fd, temp_name = tempfile.mkstemp(prefix=f".{target.name}.", dir=str(target.parent.resolve()))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(temp_name, target)
    except BaseException:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise


def _transpile(invocation: CliInvocation) -> Tuple[int, Optional[TranspileResult]]:
    try:
        text = _read(invocation.input)
    except OSError as e:
        _error(f"uvl2ivml: cannot read {invocation.input}: {e.strerror or e}")
        return EXIT_USAGE, None
    except UnicodeDecodeError as e:
        _error(f"uvl2ivml: cannot read {invocation.input}: not UTF-8 text ({e.reason} at byte {e.start})")
        return EXIT_USAGE, None
    try:
        result = transpile(text, invocation.transform_options(), source_name=invocation.input)
    except UvlSyntaxError as e:
        _error(e.diagnostic.format())
        return EXIT_FAILURE, None
    except ValidationFailedError as e:
        for diagnostic in e.diagnostics:
            _error(diagnostic.format())
        return EXIT_FAILURE, None
    except (TransformationError, IvmlModelError) as e:
        _error(f"{invocation.input}: error: {e}")
        return EXIT_FAILURE, None
    for warning in result.warnings:
        _error(warning.format())
    return EXIT_OK, result


def cmd_transform(invocation: CliInvocation) -> int:
    """Transform a UVL file and write the IVML project."""
    status, result = _transpile(invocation)
    if result is None:
        return status
    assert invocation.output is not None
    try:
        write_atomic(invocation.output, result.text)
    except OSError as e:
        _error(f"uvl2ivml: cannot write {invocation.output}: {e.strerror or e}")
        return EXIT_USAGE
    logger.info(f"Wrote {invocation.output}")
    return EXIT_OK


def cmd_check(invocation: CliInvocation) -> int:
    """Transform a UVL file and compare the configuration spaces."""
    try:
        limits = load_config().oracle.with_cap(invocation.cap)
    except ValueError as e:
        _error(f"uvl2ivml: {e}")
        return EXIT_USAGE
    status, result = _transpile(invocation)
    if result is None:
        return status
    try:
        report = verify(result, limits)
    except (EnumerationCapError, NonBooleanModelError) as e:
        _error(f"uvl2ivml: {e}")
        return EXIT_USAGE

    passed = report.bijective if invocation.mode is TransformMode.STRICT else report.all_images_valid
    if invocation.verbosity > 0:
        print(report.render())
    else:
        print(report.summary_line())
        if not passed:
            _error(report.render())
    return EXIT_OK if passed else EXIT_FAILURE


def cmd_validate(invocation: CliInvocation) -> int:
    """Parse and validate a UVL or IVML file."""
    try:
        language = detect_language(invocation.input, invocation.lang)
        text = _read(invocation.input)
    except UnicodeDecodeError as e:
        _error(f"uvl2ivml: cannot read {invocation.input}: not UTF-8 text ({e.reason} at byte {e.start})")
        return EXIT_USAGE
    except ValueError as e:
        _error(f"uvl2ivml: {e}")
        return EXIT_USAGE
    except OSError as e:
        _error(f"uvl2ivml: cannot read {invocation.input}: {e.strerror or e}")
        return EXIT_USAGE
    diagnostics = validate_text(text, language, invocation.input)
    for diagnostic in diagnostics:
        _error(diagnostic.format())
    if any(d.is_error for d in diagnostics):
        return EXIT_FAILURE
    logger.info(f"{invocation.input}: ok")
    return EXIT_OK


COMMANDS = {
    Command.TRANSFORM: cmd_transform,
    Command.CHECK: cmd_check,
    Command.VALIDATE: cmd_validate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        invocation = _invocation(args)
        invocation.transform_options()
    except ValidationError as e:
        messages: List[str] = [str(error["msg"]) for error in e.errors()]
        parser.print_usage(sys.stderr)
        _error(f"uvl2ivml: error: {'; '.join(messages)}")
        return EXIT_USAGE
    _configure_logging(invocation.verbosity)
    return COMMANDS[invocation.command](invocation)


if __name__ == "__main__":
    sys.exit(main())
