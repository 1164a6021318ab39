"""UVL front end: abstract syntax, parser, validator and canonical printer.

The parser accepts the Boolean, Arithmetic and Type language levels of UVL for a
single namespace. Indentation is turned into ``_INDENT``/``_DEDENT`` tokens by a
lark post-lexer; everything else is a plain LALR grammar.
"""

import logging
import re
import threading
from dataclasses import dataclass, field, replace
from decimal import Decimal
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple, Union

from lark import Lark, Token, Transformer
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken
from lark.indenter import DedentError, Indenter
from typing_extensions import assert_never

from .errors import Diagnostic, Severity, SourceLocation, UvlLexError, UvlParseError, UvlSyntaxError


logger = logging.getLogger(__name__)


class FeatureType(str, Enum):
    """Declared type of a feature (Type language level)."""

    BOOLEAN = "Boolean"
    STRING = "String"
    INTEGER = "Integer"
    REAL = "Real"

    @property
    def is_numeric(self) -> bool:
        return self in (FeatureType.INTEGER, FeatureType.REAL)


class GroupKind(str, Enum):
    """Kind of a child group."""

    MANDATORY = "mandatory"
    OPTIONAL = "optional"
    OR = "or"
    ALTERNATIVE = "alternative"
    CARDINALITY = "cardinality"


class UvlOperator(str, Enum):
    """Binary operators of UVL constraints."""

    AND = "&"
    OR = "|"
    IMPLIES = "=>"
    IFF = "<=>"
    EQ = "=="
    NE = "!="
    GT = ">"
    GE = ">="
    LT = "<"
    LE = "<="
    ADD = "+"
    SUB = "-"
    MUL = "*"
    DIV = "/"

    @property
    def is_logical(self) -> bool:
        return self in _LOGICAL_OPERATORS

    @property
    def is_comparison(self) -> bool:
        return self in _COMPARISON_OPERATORS

    @property
    def is_arithmetic(self) -> bool:
        return self in _ARITHMETIC_OPERATORS


_LOGICAL_OPERATORS = frozenset({UvlOperator.AND, UvlOperator.OR, UvlOperator.IMPLIES, UvlOperator.IFF})
_COMPARISON_OPERATORS = frozenset(
    {UvlOperator.EQ, UvlOperator.NE, UvlOperator.GT, UvlOperator.GE, UvlOperator.LT, UvlOperator.LE}
)
_ARITHMETIC_OPERATORS = frozenset({UvlOperator.ADD, UvlOperator.SUB, UvlOperator.MUL, UvlOperator.DIV})

LiteralValue = Union[bool, int, float, str]
AttributeValue = Union[bool, int, float, str]


@dataclass(frozen=True)
class FeatureRef:
    """Reference to a feature by name."""

    name: str
    location: Optional[SourceLocation] = field(default=None, compare=False)


@dataclass(frozen=True, eq=False)
class UvlLiteral:
    """Boolean, integer, real or string literal."""

    value: LiteralValue
    location: Optional[SourceLocation] = field(default=None, compare=False)

    def _key(self) -> Tuple[str, LiteralValue]:
        # keeps True and 1 apart
        return (type(self.value).__name__, self.value)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, UvlLiteral) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())


@dataclass(frozen=True)
class UvlNot:
    """Logical negation ``!``."""

    operand: "ConstraintExpr"
    location: Optional[SourceLocation] = field(default=None, compare=False)


@dataclass(frozen=True)
class UvlBinary:
    """Binary logical, comparison or arithmetic expression."""

    op: UvlOperator
    left: "ConstraintExpr"
    right: "ConstraintExpr"
    location: Optional[SourceLocation] = field(default=None, compare=False)


@dataclass(frozen=True)
class UvlCall:
    """Function application, ``len(...)`` or ``floor(...)``."""

    function: str
    argument: "ConstraintExpr"
    location: Optional[SourceLocation] = field(default=None, compare=False)


ConstraintExpr = Union[FeatureRef, UvlLiteral, UvlNot, UvlBinary, UvlCall]


@dataclass(frozen=True)
class GroupNode:
    """A child group; ``lower``/``upper`` are set for cardinality groups only."""

    kind: GroupKind
    children: Tuple["FeatureNode", ...]
    lower: Optional[int] = None
    upper: Optional[int] = None
    location: Optional[SourceLocation] = field(default=None, compare=False)

    def bounds(self) -> Tuple[int, int]:
        """Selection bounds as ``(lo, hi)`` when the parent is selected."""
        count = len(self.children)
        if self.kind is GroupKind.MANDATORY:
            return count, count
        if self.kind is GroupKind.OPTIONAL:
            return 0, count
        if self.kind is GroupKind.OR:
            return 1, count
        if self.kind is GroupKind.ALTERNATIVE:
            return 1, 1
        if self.kind is GroupKind.CARDINALITY:
            assert self.lower is not None and self.upper is not None
            return self.lower, self.upper
        assert_never(self.kind)


@dataclass(frozen=True)
class FeatureNode:
    """A feature with its attribute block and child groups."""

    name: str
    declared_type: FeatureType = FeatureType.BOOLEAN
    abstract: bool = False
    groups: Tuple[GroupNode, ...] = ()
    attributes: Tuple[Tuple[str, AttributeValue], ...] = ()
    location: Optional[SourceLocation] = field(default=None, compare=False)

    def walk(self) -> Iterator["FeatureNode"]:
        """Pre-order traversal of this subtree, groups in document order."""
        yield self
        for group in self.groups:
            for child in group.children:
                yield from child.walk()


@dataclass(frozen=True)
class UvlModel:
    """A parsed UVL feature model."""

    root: FeatureNode
    constraints: Tuple[ConstraintExpr, ...] = ()
    namespace: Optional[str] = None
    source_name: str = field(default="<input>", compare=False)

    def features(self) -> Iterator[FeatureNode]:
        return self.root.walk()

    def feature_map(self) -> Dict[str, FeatureNode]:
        """Name to feature; the first occurrence wins for duplicate names."""
        result: Dict[str, FeatureNode] = {}
        for feature in self.features():
            result.setdefault(feature.name, feature)
        return result

    def parent_map(self) -> Dict[str, Tuple[FeatureNode, GroupNode]]:
        """Child name to its parent feature and the group it belongs to."""
        result: Dict[str, Tuple[FeatureNode, GroupNode]] = {}
        for feature in self.features():
            for group in feature.groups:
                for child in group.children:
                    result.setdefault(child.name, (feature, group))
        return result


UVL_GRAMMAR = r"""
    start: _NL? namespace_decl? features_block constraints_block?

    namespace_decl: "namespace" NAME _NL
    features_block: "features" _NL _INDENT feature _DEDENT

    feature: feature_type? NAME attributes? _NL (_INDENT group+ _DEDENT)?
    ?feature_type: BOOLEAN_TYPE | STRING_TYPE | INTEGER_TYPE | REAL_TYPE

    attributes: "{" (attribute ("," attribute)*)? "}"
    attribute: NAME attribute_value?
    ?attribute_value: "true" -> true
        | "false" -> false
        | INT -> integer
        | DECIMAL -> real
        | STRING -> string
        | NAME -> name

    group: group_kind _NL _INDENT feature+ _DEDENT
    ?group_kind: MANDATORY | OPTIONAL | ALTERNATIVE | OR | cardinality
    cardinality: "[" INT "]" -> exact_cardinality
        | "[" INT ".." INT "]" -> range_cardinality
        | "[" INT ".." "*" "]" -> open_cardinality

    constraints_block: "constraints" _NL (_INDENT constraint_line+ _DEDENT)?
    constraint_line: expr _NL

    ?expr: iff_expr
    ?iff_expr: implies_expr
        | iff_expr "<=>" implies_expr -> iff
    ?implies_expr: or_expr
        | or_expr "=>" implies_expr -> implies
    ?or_expr: and_expr
        | or_expr "|" and_expr -> or_
    ?and_expr: cmp_expr
        | and_expr "&" cmp_expr -> and_
    ?cmp_expr: sum_expr
        | sum_expr "==" sum_expr -> eq
        | sum_expr "!=" sum_expr -> ne
        | sum_expr ">" sum_expr -> gt
        | sum_expr ">=" sum_expr -> ge
        | sum_expr "<" sum_expr -> lt
        | sum_expr "<=" sum_expr -> le
    ?sum_expr: product_expr
        | sum_expr "+" product_expr -> add
        | sum_expr "-" product_expr -> sub
    ?product_expr: unary_expr
        | product_expr "*" unary_expr -> mul
        | product_expr "/" unary_expr -> div
    ?unary_expr: atom
        | "!" unary_expr -> not_
    ?atom: NAME -> feature_ref
        | INT -> integer
        | DECIMAL -> real
        | STRING -> string
        | "true" -> true
        | "false" -> false
        | "len" "(" expr ")" -> len_
        | "floor" "(" expr ")" -> floor_
        | "(" expr ")"

    BOOLEAN_TYPE: "Boolean"
    STRING_TYPE: "String"
    INTEGER_TYPE: "Integer"
    REAL_TYPE: "Real"
    MANDATORY: "mandatory"
    OPTIONAL: "optional"
    ALTERNATIVE: "alternative"
    OR: "or"

    NAME: /[A-Za-z_][A-Za-z0-9_]*/
    INT: /[0-9]+/
    DECIMAL.2: /[0-9]+\.[0-9]+/
    STRING: /"(\\.|[^"\\\n])*"/
    COMMENT: /\/\/[^\n]*/
    _NL: (/\r?\n[\t ]*/ | COMMENT)+

    %ignore /[\t \f]+/
    %ignore COMMENT
    %declare _INDENT _DEDENT
"""


class UvlIndenter(Indenter):
    """Post-lexer producing indentation tokens with located errors."""

    NL_type = "_NL"
    OPEN_PAREN_types = ["LPAR", "LBRACE", "LSQB"]
    CLOSE_PAREN_types = ["RPAR", "RBRACE", "RSQB"]
    INDENT_type = "_INDENT"
    DEDENT_type = "_DEDENT"
    tab_len = 8

    def handle_NL(self, token: Token) -> Iterator[Token]:
        try:
            yield from super().handle_NL(token)
        except DedentError as e:
            indent_str = token.rsplit("\n", 1)[-1]
            location = SourceLocation(token.end_line or token.line or 0, len(indent_str) + 1)
            raise UvlLexError(
                Diagnostic(Severity.ERROR, f"inconsistent indentation: {e}", location)
            ) from e


_PARSER_CACHE = threading.local()


def _uvl_parser() -> Lark:
    # the indenter is stateful, so every thread gets its own parser
    parser = getattr(_PARSER_CACHE, "parser", None)
    if parser is None:
        parser = Lark(UVL_GRAMMAR, parser="lalr", postlex=UvlIndenter(), maybe_placeholders=False)
        _PARSER_CACHE.parser = parser
    return parser


def _location(token: Token) -> Optional[SourceLocation]:
    if token.line is None or token.column is None:
        return None
    return SourceLocation(token.line, token.column)


def _unquote(literal: str) -> str:
    return re.sub(r"\\(.)", r"\1", literal[1:-1])


def _quote(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _format_number(value: Union[int, float]) -> str:
    """Integers as-is, reals in positional ``digits.digits`` form."""
    if isinstance(value, int):
        return str(value)
    text = format(Decimal(repr(value)), "f")
    return text if "." in text else f"{text}.0"


@dataclass(frozen=True)
class _AttributeBlock:
    entries: Tuple[Tuple[str, AttributeValue], ...]


@dataclass(frozen=True)
class _ConstraintBlock:
    constraints: Tuple[ConstraintExpr, ...]


@dataclass(frozen=True)
class _CardinalitySpec:
    lower: int
    upper: Optional[int]
    location: Optional[SourceLocation]


class _UvlTreeBuilder(Transformer):
    """Turns the lark parse tree into UVL model nodes."""

    def start(self, items: list) -> UvlModel:
        namespace: Optional[str] = None
        root: Optional[FeatureNode] = None
        constraints: Tuple[ConstraintExpr, ...] = ()
        for item in items:
            if isinstance(item, FeatureNode):
                root = item
            elif isinstance(item, _ConstraintBlock):
                constraints = item.constraints
            elif isinstance(item, str):
                namespace = str(item)
        assert root is not None
        return UvlModel(root=root, constraints=constraints, namespace=namespace)

    def namespace_decl(self, items: list) -> str:
        return str(items[0])

    def features_block(self, items: list) -> FeatureNode:
        return items[0]

    def feature(self, items: list) -> FeatureNode:
        declared_type = FeatureType.BOOLEAN
        name_token: Optional[Token] = None
        attributes: Tuple[Tuple[str, AttributeValue], ...] = ()
        groups: List[GroupNode] = []
        for item in items:
            if isinstance(item, GroupNode):
                groups.append(item)
            elif isinstance(item, _AttributeBlock):
                attributes = item.entries
            elif isinstance(item, Token) and item.type == "NAME":
                name_token = item
            elif isinstance(item, Token):
                declared_type = FeatureType(str(item))
        assert name_token is not None
        abstract = any(key == "abstract" and value is True for key, value in attributes)
        return FeatureNode(
            name=str(name_token),
            declared_type=declared_type,
            abstract=abstract,
            groups=tuple(groups),
            attributes=attributes,
            location=_location(name_token),
        )

    def attributes(self, items: list) -> _AttributeBlock:
        return _AttributeBlock(tuple(items))

    def attribute(self, items: list) -> Tuple[str, AttributeValue]:
        if len(items) == 1:
            return (str(items[0]), True)
        value = items[1]
        if isinstance(value, UvlLiteral):
            value = value.value
        return (str(items[0]), value)

    def name(self, items: list) -> str:
        return str(items[0])

    def group(self, items: list) -> GroupNode:
        kind_item, children = items[0], tuple(items[1:])
        if isinstance(kind_item, _CardinalitySpec):
            upper = kind_item.upper if kind_item.upper is not None else len(children)
            return GroupNode(
                kind=GroupKind.CARDINALITY,
                children=children,
                lower=kind_item.lower,
                upper=upper,
                location=kind_item.location,
            )
        return GroupNode(kind=GroupKind(str(kind_item)), children=children, location=_location(kind_item))

    def exact_cardinality(self, items: list) -> _CardinalitySpec:
        return _CardinalitySpec(int(items[0]), int(items[0]), _location(items[0]))

    def range_cardinality(self, items: list) -> _CardinalitySpec:
        return _CardinalitySpec(int(items[0]), int(items[1]), _location(items[0]))

    def open_cardinality(self, items: list) -> _CardinalitySpec:
        return _CardinalitySpec(int(items[0]), None, _location(items[0]))

    def constraints_block(self, items: list) -> _ConstraintBlock:
        return _ConstraintBlock(tuple(items))

    def constraint_line(self, items: list) -> ConstraintExpr:
        return items[0]

    def _binary(self, op: UvlOperator, items: list) -> UvlBinary:
        left, right = items
        return UvlBinary(op, left, right, location=left.location)

    def iff(self, items: list) -> UvlBinary:
        return self._binary(UvlOperator.IFF, items)

    def implies(self, items: list) -> UvlBinary:
        return self._binary(UvlOperator.IMPLIES, items)

    def or_(self, items: list) -> UvlBinary:
        return self._binary(UvlOperator.OR, items)

    def and_(self, items: list) -> UvlBinary:
        return self._binary(UvlOperator.AND, items)

    def eq(self, items: list) -> UvlBinary:
        return self._binary(UvlOperator.EQ, items)

    def ne(self, items: list) -> UvlBinary:
        return self._binary(UvlOperator.NE, items)

    def gt(self, items: list) -> UvlBinary:
        return self._binary(UvlOperator.GT, items)

    def ge(self, items: list) -> UvlBinary:
        return self._binary(UvlOperator.GE, items)

    def lt(self, items: list) -> UvlBinary:
        return self._binary(UvlOperator.LT, items)

    def le(self, items: list) -> UvlBinary:
        return self._binary(UvlOperator.LE, items)

    def add(self, items: list) -> UvlBinary:
        return self._binary(UvlOperator.ADD, items)

    def sub(self, items: list) -> UvlBinary:
        return self._binary(UvlOperator.SUB, items)

    def mul(self, items: list) -> UvlBinary:
        return self._binary(UvlOperator.MUL, items)

    def div(self, items: list) -> UvlBinary:
        return self._binary(UvlOperator.DIV, items)

    def not_(self, items: list) -> UvlNot:
        return UvlNot(items[0], location=items[0].location)

    def len_(self, items: list) -> UvlCall:
        return UvlCall("len", items[0], location=items[0].location)

    def floor_(self, items: list) -> UvlCall:
        return UvlCall("floor", items[0], location=items[0].location)

    def feature_ref(self, items: list) -> FeatureRef:
        return FeatureRef(str(items[0]), location=_location(items[0]))

    def integer(self, items: list) -> UvlLiteral:
        return UvlLiteral(int(items[0]), location=_location(items[0]))

    def real(self, items: list) -> UvlLiteral:
        return UvlLiteral(float(items[0]), location=_location(items[0]))

    def string(self, items: list) -> UvlLiteral:
        return UvlLiteral(_unquote(str(items[0])), location=_location(items[0]))

    def true(self, items: list) -> UvlLiteral:
        return UvlLiteral(True)

    def false(self, items: list) -> UvlLiteral:
        return UvlLiteral(False)


_TOKEN_NAMES = {
    "$END": "end of input",
    "_NL": "end of line",
    "_INDENT": "indented block",
    "_DEDENT": "end of indented block",
}


def _describe_token(token: Token) -> str:
    if token.type in _TOKEN_NAMES:
        return _TOKEN_NAMES[token.type]
    return f"'{token.value}'"


def _syntax_error(error: UnexpectedInput, source_name: str) -> UvlSyntaxError:
    location: Optional[SourceLocation] = None
    if getattr(error, "line", -1) and error.line > 0:
        location = SourceLocation(error.line, error.column)
    if isinstance(error, UnexpectedCharacters):
        return UvlLexError(
            Diagnostic(Severity.ERROR, f"unexpected character {error.char!r}", location, source_name)
        )
    if isinstance(error, UnexpectedToken):
        token = error.token
        if {"MANDATORY", "OPTIONAL"} <= set(error.expected) and token.type not in ("_INDENT", "_DEDENT"):
            # only a group keyword may open an indented block under a feature
            return UvlLexError(
                Diagnostic(
                    Severity.ERROR,
                    f"unexpected indentation before {_describe_token(token)}; "
                    "expected a group keyword (mandatory, optional, alternative, or, [n..m])",
                    location,
                    source_name,
                )
            )
        if token.type in ("_INDENT", "_DEDENT") and token.end_line:
            location = SourceLocation(token.end_line, len(token.value) + 1)
        expected = sorted(_TOKEN_NAMES.get(name, name) for name in error.expected)
        hint = f"; expected one of: {', '.join(expected[:6])}" if expected else ""
        return UvlParseError(
            Diagnostic(Severity.ERROR, f"unexpected {_describe_token(token)}{hint}", location, source_name)
        )
    if isinstance(error, UnexpectedEOF):
        return UvlParseError(Diagnostic(Severity.ERROR, "unexpected end of input", location, source_name))
    return UvlParseError(Diagnostic(Severity.ERROR, str(error).splitlines()[0], location, source_name))


def parse_uvl(text: str, source_name: str = "<input>") -> UvlModel:
    """Parse UVL text into a feature model.

    Args:
        text: UVL source
        source_name: file name used in diagnostics

    Raises:
        UvlLexError: bad token or inconsistent indentation
        UvlParseError: unexpected structure
    """
    if not text.endswith("\n"):
        text += "\n"
    try:
        tree = _uvl_parser().parse(text)
    except UvlSyntaxError as e:
        raise type(e)(replace(e.diagnostic, source=source_name)) from e
    except UnexpectedInput as e:
        raise _syntax_error(e, source_name) from e
    model = _UvlTreeBuilder().transform(tree)
    logger.debug(f"Parsed {source_name}: root {model.root.name}, {len(model.constraints)} constraint(s)")
    return replace(model, source_name=source_name)


class _TypeChecker:
    """Infers constraint expression types and reports misuse."""

    def __init__(self, features: Dict[str, FeatureNode], source: str):
        self.features = features
        self.source = source
        self.diagnostics: List[Diagnostic] = []

    def _error(self, message: str, location: Optional[SourceLocation]) -> None:
        self.diagnostics.append(Diagnostic(Severity.ERROR, message, location, self.source))

    def check(self, expr: ConstraintExpr) -> None:
        result = self.infer(expr)
        if result is not None and result is not FeatureType.BOOLEAN:
            self._error(f"constraint must be boolean, found {result.value}", expr.location)

    def infer(self, expr: ConstraintExpr) -> Optional[FeatureType]:
        if isinstance(expr, FeatureRef):
            feature = self.features.get(expr.name)
            if feature is None:
                self._error(f"unknown feature '{expr.name}' in constraint", expr.location)
                return None
            return feature.declared_type
        if isinstance(expr, UvlLiteral):
            if isinstance(expr.value, bool):
                return FeatureType.BOOLEAN
            if isinstance(expr.value, int):
                return FeatureType.INTEGER
            if isinstance(expr.value, float):
                return FeatureType.REAL
            return FeatureType.STRING
        if isinstance(expr, UvlNot):
            operand = self.infer(expr.operand)
            if operand is None:
                return None
            if operand is not FeatureType.BOOLEAN:
                self._error(f"'!' expects a boolean operand, found {operand.value}", expr.location)
                return None
            return FeatureType.BOOLEAN
        if isinstance(expr, UvlCall):
            return self._infer_call(expr)
        if isinstance(expr, UvlBinary):
            return self._infer_binary(expr)
        assert_never(expr)

    def _infer_call(self, expr: UvlCall) -> Optional[FeatureType]:
        if expr.function == "len":
            argument = expr.argument
            if not isinstance(argument, FeatureRef):
                self._error("len() expects a string feature reference", expr.location)
                return None
            kind = self.infer(argument)
            if kind is None:
                return None
            if kind is not FeatureType.STRING:
                self._error(
                    f"len() expects a string feature, '{argument.name}' is {kind.value}", expr.location
                )
                return None
            return FeatureType.INTEGER
        kind = self.infer(expr.argument)
        if kind is None:
            return None
        if not kind.is_numeric:
            self._error(f"{expr.function}() expects a numeric operand, found {kind.value}", expr.location)
            return None
        return FeatureType.INTEGER

    def _infer_binary(self, expr: UvlBinary) -> Optional[FeatureType]:
        left = self.infer(expr.left)
        right = self.infer(expr.right)
        if left is None or right is None:
            return None
        op = expr.op
        if op.is_logical:
            if left is not FeatureType.BOOLEAN or right is not FeatureType.BOOLEAN:
                self._error(
                    f"'{op.value}' expects boolean operands, found {left.value} and {right.value}",
                    expr.location,
                )
                return None
            return FeatureType.BOOLEAN
        if op in (UvlOperator.EQ, UvlOperator.NE):
            if left is not right and not (left.is_numeric and right.is_numeric):
                self._error(f"cannot compare {left.value} with {right.value}", expr.location)
                return None
            return FeatureType.BOOLEAN
        if not (left.is_numeric and right.is_numeric):
            self._error(
                f"'{op.value}' expects numeric operands, found {left.value} and {right.value}",
                expr.location,
            )
            return None
        if op.is_comparison:
            return FeatureType.BOOLEAN
        if FeatureType.REAL in (left, right):
            return FeatureType.REAL
        return FeatureType.INTEGER


def validate_uvl(model: UvlModel) -> List[Diagnostic]:
    """Check a parsed model; an empty list means the model is valid."""
    source = model.source_name
    diagnostics: List[Diagnostic] = []
    seen: Dict[str, FeatureNode] = {}

    for feature in model.features():
        if feature.name in seen:
            diagnostics.append(
                Diagnostic(Severity.ERROR, f"duplicate feature name '{feature.name}'", feature.location, source)
            )
        else:
            seen[feature.name] = feature

        for group in feature.groups:
            count = len(group.children)
            if group.kind is GroupKind.CARDINALITY:
                lower, upper = group.lower, group.upper
                assert lower is not None and upper is not None
                if not (0 <= lower <= upper <= count) or upper < 1:
                    diagnostics.append(
                        Diagnostic(
                            Severity.ERROR,
                            f"cardinality [{lower}..{upper}] of '{feature.name}' is invalid for {count} child(ren)",
                            group.location,
                            source,
                        )
                    )
            if group.kind in (GroupKind.OR, GroupKind.ALTERNATIVE) and count == 1:
                diagnostics.append(
                    Diagnostic(
                        Severity.WARNING,
                        f"{group.kind.value} group of '{feature.name}' has a single child",
                        group.location,
                        source,
                    )
                )
            if group.kind in (GroupKind.OR, GroupKind.ALTERNATIVE, GroupKind.CARDINALITY):
                for child in group.children:
                    if child.declared_type is not FeatureType.BOOLEAN:
                        diagnostics.append(
                            Diagnostic(
                                Severity.ERROR,
                                f"{child.declared_type.value} feature '{child.name}' cannot be a member "
                                f"of a {group.kind.value} group",
                                child.location,
                                source,
                            )
                        )

    checker = _TypeChecker(seen, source)
    for constraint in model.constraints:
        checker.check(constraint)
    diagnostics.extend(checker.diagnostics)

    logger.debug(f"Validated {source}: {len(diagnostics)} diagnostic(s)")
    return diagnostics


def is_boolean_level(model: UvlModel) -> bool:
    """True when the model uses the Boolean language level only."""
    if any(f.declared_type is not FeatureType.BOOLEAN for f in model.features()):
        return False

    def boolean_only(expr: ConstraintExpr) -> bool:
        if isinstance(expr, FeatureRef):
            return True
        if isinstance(expr, UvlLiteral):
            return isinstance(expr.value, bool)
        if isinstance(expr, UvlNot):
            return boolean_only(expr.operand)
        if isinstance(expr, UvlBinary):
            return expr.op.is_logical and boolean_only(expr.left) and boolean_only(expr.right)
        return False

    return all(boolean_only(c) for c in model.constraints)


# loosest first; unary "!" binds tighter than every binary operator
_PRECEDENCE = {
    UvlOperator.IFF: 1,
    UvlOperator.IMPLIES: 2,
    UvlOperator.OR: 3,
    UvlOperator.AND: 4,
    UvlOperator.EQ: 5,
    UvlOperator.NE: 5,
    UvlOperator.GT: 5,
    UvlOperator.GE: 5,
    UvlOperator.LT: 5,
    UvlOperator.LE: 5,
    UvlOperator.ADD: 6,
    UvlOperator.SUB: 6,
    UvlOperator.MUL: 7,
    UvlOperator.DIV: 7,
}
_NOT_PRECEDENCE = 8
_ATOM_PRECEDENCE = 9


def _precedence(expr: ConstraintExpr) -> int:
    if isinstance(expr, UvlBinary):
        return _PRECEDENCE[expr.op]
    if isinstance(expr, UvlNot):
        return _NOT_PRECEDENCE
    return _ATOM_PRECEDENCE


def format_constraint(expr: ConstraintExpr) -> str:
    """Render a constraint with the minimal parentheses the grammar needs."""
    if isinstance(expr, FeatureRef):
        return expr.name
    if isinstance(expr, UvlLiteral):
        value = expr.value
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, str):
            return _quote(value)
        return _format_number(value)
    if isinstance(expr, UvlNot):
        operand = format_constraint(expr.operand)
        if _precedence(expr.operand) < _NOT_PRECEDENCE:
            operand = f"({operand})"
        return f"!{operand}"
    if isinstance(expr, UvlCall):
        return f"{expr.function}({format_constraint(expr.argument)})"
    if isinstance(expr, UvlBinary):
        level = _PRECEDENCE[expr.op]
        left_assoc = expr.op is not UvlOperator.IMPLIES and not expr.op.is_comparison
        right_assoc = expr.op is UvlOperator.IMPLIES
        left = format_constraint(expr.left)
        right = format_constraint(expr.right)
        left_level = _precedence(expr.left)
        right_level = _precedence(expr.right)
        if left_level < level or (left_level == level and not left_assoc):
            left = f"({left})"
        if right_level < level or (right_level == level and not right_assoc):
            right = f"({right})"
        return f"{left} {expr.op.value} {right}"
    assert_never(expr)


def _format_attribute_value(value: AttributeValue) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return _quote(value)
    return _format_number(value)


def _format_feature(feature: FeatureNode, depth: int, lines: List[str]) -> None:
    indent = "\t" * depth
    head = feature.name
    if feature.declared_type is not FeatureType.BOOLEAN:
        head = f"{feature.declared_type.value} {head}"
    if feature.attributes:
        entries = ", ".join(f"{key} {_format_attribute_value(value)}" for key, value in feature.attributes)
        head = f"{head} {{{entries}}}"
    lines.append(indent + head)
    for group in feature.groups:
        if group.kind is GroupKind.CARDINALITY:
            keyword = f"[{group.lower}..{group.upper}]"
        else:
            keyword = group.kind.value
        lines.append("\t" * (depth + 1) + keyword)
        for child in group.children:
            _format_feature(child, depth + 2, lines)


def format_uvl(model: UvlModel) -> str:
    """Serialize a model with canonical tab indentation."""
    lines: List[str] = []
    if model.namespace:
        lines.extend([f"namespace {model.namespace}", ""])
    lines.append("features")
    _format_feature(model.root, 1, lines)
    if model.constraints:
        lines.append("constraints")
        lines.extend("\t" + format_constraint(c) for c in model.constraints)
    return "\n".join(lines) + "\n"
