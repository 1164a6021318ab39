"""IVML core: abstract syntax, text emission and a parser for the emitted subset."""

import logging
import re
from dataclasses import dataclass
from decimal import Decimal
from enum import Enum
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Tuple, Union

from lark import Lark, Token, Transformer
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken
from typing_extensions import assert_never

from .errors import Diagnostic, IvmlModelError, IvmlSyntaxError, Severity, SourceLocation, UnsupportedConstructError


logger = logging.getLogger(__name__)


class TypeKind(str, Enum):
    """Kinds of IVML variable types used by the transformation."""

    BOOLEAN = "Boolean"
    INTEGER = "Integer"
    REAL = "Real"
    STRING = "String"
    ENUM = "enum"
    SET = "setOf"


@dataclass(frozen=True)
class IvmlType:
    """Variable type; ``element`` names the enum for ENUM and SET types."""

    kind: TypeKind
    element: Optional[str] = None

    def render(self) -> str:
        if self.kind is TypeKind.ENUM:
            return str(self.element)
        if self.kind is TypeKind.SET:
            return f"setOf({self.element})"
        return self.kind.value


BOOLEAN = IvmlType(TypeKind.BOOLEAN)
INTEGER = IvmlType(TypeKind.INTEGER)
REAL = IvmlType(TypeKind.REAL)
STRING = IvmlType(TypeKind.STRING)


def enum_type(name: str) -> IvmlType:
    return IvmlType(TypeKind.ENUM, name)


def set_type(name: str) -> IvmlType:
    return IvmlType(TypeKind.SET, name)


class IvmlOperator(str, Enum):
    """Binary operators of IVML constraints."""

    AND = "and"
    OR = "or"
    IMPLIES = "implies"
    IFF = "iff"
    EQ = "=="
    NE = "<>"
    GT = ">"
    GE = ">="
    LT = "<"
    LE = "<="
    ADD = "+"
    SUB = "-"
    MUL = "*"
    DIV = "/"


ConstValue = Union[bool, int, float, str]


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class EnumLiteral:
    """Qualified enum literal ``Enum.Literal``."""

    enum: str
    literal: str


@dataclass(frozen=True, eq=False)
class IvmlConst:
    value: ConstValue

    def _key(self) -> Tuple[str, ConstValue]:
        return (type(self.value).__name__, self.value)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, IvmlConst) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())


@dataclass(frozen=True)
class IvmlCall:
    """Built-in operation: ``isDefined``, ``size``, ``includes`` or ``floor``."""

    function: str
    args: Tuple["IvmlExpr", ...]


@dataclass(frozen=True)
class IvmlNot:
    operand: "IvmlExpr"


@dataclass(frozen=True)
class IvmlBinary:
    op: IvmlOperator
    left: "IvmlExpr"
    right: "IvmlExpr"


IvmlExpr = Union[VarRef, EnumLiteral, IvmlConst, IvmlCall, IvmlNot, IvmlBinary]

TRUE = IvmlConst(True)
FALSE = IvmlConst(False)

BUILTIN_ARITY = {"isDefined": 1, "size": 1, "includes": 2, "floor": 1}


@dataclass(frozen=True)
class EnumDef:
    name: str
    literals: Tuple[str, ...]


@dataclass(frozen=True)
class VarDecl:
    name: str
    type: IvmlType


@dataclass(frozen=True)
class ConstraintDecl:
    expr: IvmlExpr


IvmlDecl = Union[EnumDef, VarDecl, ConstraintDecl]


@dataclass(frozen=True)
class IvmlProject:
    """An IVML project: declarations in emission order."""

    name: str
    declarations: Tuple[IvmlDecl, ...] = ()

    def enums(self) -> Dict[str, EnumDef]:
        return {d.name: d for d in self.declarations if isinstance(d, EnumDef)}

    def variables(self) -> Dict[str, VarDecl]:
        return {d.name: d for d in self.declarations if isinstance(d, VarDecl)}

    def constraints(self) -> List[IvmlExpr]:
        return [d.expr for d in self.declarations if isinstance(d, ConstraintDecl)]


def walk_expr(expr: IvmlExpr) -> Iterator[IvmlExpr]:
    """Pre-order traversal of an expression tree."""
    yield expr
    if isinstance(expr, IvmlCall):
        for arg in expr.args:
            yield from walk_expr(arg)
    elif isinstance(expr, IvmlNot):
        yield from walk_expr(expr.operand)
    elif isinstance(expr, IvmlBinary):
        yield from walk_expr(expr.left)
        yield from walk_expr(expr.right)


def check_project(project: IvmlProject) -> List[str]:
    """Return the invariant violations of a project; empty when it is well-formed."""
    problems: List[str] = []
    declared: Dict[str, IvmlDecl] = {}
    enums: Dict[str, EnumDef] = {}
    variables: Dict[str, VarDecl] = {}

    for decl in project.declarations:
        if isinstance(decl, ConstraintDecl):
            continue
        if decl.name in declared:
            problems.append(f"duplicate declaration '{decl.name}'")
            continue
        declared[decl.name] = decl
        if isinstance(decl, EnumDef):
            enums[decl.name] = decl
            if not decl.literals:
                problems.append(f"enum '{decl.name}' has no literals")
            if len(set(decl.literals)) != len(decl.literals):
                problems.append(f"enum '{decl.name}' has duplicate literals")
        else:
            variables[decl.name] = decl

    for var in variables.values():
        if var.type.kind in (TypeKind.ENUM, TypeKind.SET) and var.type.element not in enums:
            problems.append(f"variable '{var.name}' uses undeclared enum '{var.type.element}'")

    def var_kind(expr: IvmlExpr) -> Optional[TypeKind]:
        if isinstance(expr, VarRef) and expr.name in variables:
            return variables[expr.name].type.kind
        return None

    for constraint in project.constraints():
        for node in walk_expr(constraint):
            if isinstance(node, VarRef) and node.name not in variables:
                problems.append(f"constraint references undeclared variable '{node.name}'")
            elif isinstance(node, EnumLiteral):
                enum = enums.get(node.enum)
                if enum is None:
                    problems.append(f"constraint references undeclared enum '{node.enum}'")
                elif node.literal not in enum.literals:
                    problems.append(f"'{node.literal}' is not a literal of enum '{node.enum}'")
            elif isinstance(node, IvmlCall):
                arity = BUILTIN_ARITY.get(node.function)
                if arity is None or arity != len(node.args):
                    problems.append(f"unsupported call {node.function}/{len(node.args)}")
                    continue
                first = node.args[0]
                if node.function == "includes" and var_kind(first) is not TypeKind.SET:
                    problems.append("includes() expects a setOf variable as first argument")
                elif node.function == "size" and var_kind(first) not in (TypeKind.SET, TypeKind.STRING):
                    problems.append("size() expects a setOf or String variable")
                elif node.function == "isDefined" and not isinstance(first, VarRef):
                    problems.append("isDefined() expects a variable")
    return problems


_PRECEDENCE = {
    IvmlOperator.IFF: 1,
    IvmlOperator.IMPLIES: 2,
    IvmlOperator.OR: 3,
    IvmlOperator.AND: 4,
    IvmlOperator.EQ: 5,
    IvmlOperator.NE: 5,
    IvmlOperator.GT: 5,
    IvmlOperator.GE: 5,
    IvmlOperator.LT: 5,
    IvmlOperator.LE: 5,
    IvmlOperator.ADD: 6,
    IvmlOperator.SUB: 6,
    IvmlOperator.MUL: 7,
    IvmlOperator.DIV: 7,
}
_COMPARISONS = frozenset(
    {IvmlOperator.EQ, IvmlOperator.NE, IvmlOperator.GT, IvmlOperator.GE, IvmlOperator.LT, IvmlOperator.LE}
)
_NOT_PRECEDENCE = 8
_ATOM_PRECEDENCE = 9


def _is_negated_includes(expr: IvmlExpr) -> bool:
    return (
        isinstance(expr, IvmlNot)
        and isinstance(expr.operand, IvmlCall)
        and expr.operand.function == "includes"
    )


def _precedence(expr: IvmlExpr) -> int:
    if isinstance(expr, IvmlBinary):
        return _PRECEDENCE[expr.op]
    if isinstance(expr, IvmlNot) and not _is_negated_includes(expr):
        return _NOT_PRECEDENCE
    return _ATOM_PRECEDENCE


def _quote(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _format_number(value: Union[int, float]) -> str:
    """Integers as-is, reals in positional ``digits.digits`` form."""
    if isinstance(value, int):
        return str(value)
    text = format(Decimal(repr(value)), "f")
    return text if "." in text else f"{text}.0"


def format_expression(expr: IvmlExpr) -> str:
    """Render an expression as IVML constraint text."""
    if isinstance(expr, VarRef):
        return expr.name
    if isinstance(expr, EnumLiteral):
        return f"{expr.enum}.{expr.literal}"
    if isinstance(expr, IvmlConst):
        value = expr.value
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, str):
            return _quote(value)
        return _format_number(value)
    if isinstance(expr, IvmlCall):
        return f"{expr.function}({', '.join(format_expression(a) for a in expr.args)})"
    if isinstance(expr, IvmlNot):
        operand = format_expression(expr.operand)
        if _is_negated_includes(expr):
            return f"({operand} <> true)"
        if _precedence(expr.operand) < _NOT_PRECEDENCE:
            operand = f"({operand})"
        return f"not {operand}"
    if isinstance(expr, IvmlBinary):
        level = _PRECEDENCE[expr.op]
        comparison = expr.op in _COMPARISONS
        implication = expr.op is IvmlOperator.IMPLIES
        left = format_expression(expr.left)
        right = format_expression(expr.right)
        left_level = _precedence(expr.left)
        right_level = _precedence(expr.right)
        if left_level < level or (left_level == level and (comparison or implication)):
            left = f"({left})"
        if implication and isinstance(expr.right, IvmlBinary):
            right = f"({right})"
        elif right_level < level or (right_level == level and not implication):
            right = f"({right})"
        return f"{left} {expr.op.value} {right}"
    assert_never(expr)


def _format_declaration(decl: IvmlDecl) -> str:
    if isinstance(decl, EnumDef):
        return f"enum {decl.name} {{{', '.join(decl.literals)}}};"
    if isinstance(decl, VarDecl):
        return f"{decl.type.render()} {decl.name};"
    if isinstance(decl, ConstraintDecl):
        return f"{format_expression(decl.expr)};"
    assert_never(decl)


def emit_ivml(project: IvmlProject) -> str:
    """Serialize a project to IVML text (LF line endings, trailing newline).

    Raises:
        IvmlModelError: the project violates its invariants
    """
    problems = check_project(project)
    if problems:
        raise IvmlModelError(problems)
    lines = [f"project {project.name} {{"]
    lines.extend(f"    {_format_declaration(d)}" for d in project.declarations)
    lines.append("}")
    return "\n".join(lines) + "\n"


IVML_GRAMMAR = r"""
    start: "project" NAME "{" _declaration* "}"

    _declaration: enum_def | var_decl | constraint_decl
    enum_def: "enum" NAME "{" NAME ("," NAME)* "}" ";"
    var_decl: ivml_type NAME ";"
    ?ivml_type: "Boolean" -> boolean_type
        | "Integer" -> integer_type
        | "Real" -> real_type
        | "String" -> string_type
        | "setOf" "(" NAME ")" -> set_type
        | NAME -> named_type
    constraint_decl: expr ";"

    ?expr: iff_expr
    ?iff_expr: implies_expr
        | iff_expr "iff" implies_expr -> iff
    ?implies_expr: or_expr
        | or_expr "implies" implies_expr -> implies
    ?or_expr: and_expr
        | or_expr "or" and_expr -> or_
    ?and_expr: cmp_expr
        | and_expr "and" cmp_expr -> and_
    ?cmp_expr: sum_expr
        | sum_expr "==" sum_expr -> eq
        | sum_expr "<>" sum_expr -> ne
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
        | "not" unary_expr -> not_
    ?atom: NAME -> var_ref
        | NAME "." NAME -> enum_literal
        | INT -> integer
        | DECIMAL -> real
        | STRING -> string
        | "true" -> true
        | "false" -> false
        | "isDefined" "(" expr ")" -> is_defined
        | "size" "(" expr ")" -> size
        | "includes" "(" expr "," expr ")" -> includes
        | "floor" "(" expr ")" -> floor_
        | "(" expr ")"

    NAME: /[A-Za-z_][A-Za-z0-9_]*/
    INT: /[0-9]+/
    DECIMAL.2: /[0-9]+\.[0-9]+/
    STRING: /"(\\.|[^"\\\n])*"/
    LINE_COMMENT: /\/\/[^\n]*/
    BLOCK_COMMENT: /\/\*(.|\n)*?\*\//

    %ignore /\s+/
    %ignore LINE_COMMENT
    %ignore BLOCK_COMMENT
"""

# Keywords of the full language that the transformation never produces.
UNSUPPORTED_KEYWORDS = frozenset(
    {
        "compound",
        "typedef",
        "abstract",
        "refTo",
        "refBy",
        "sequenceOf",
        "assign",
        "conflicts",
        "if",
        "def",
        "import",
        "interface",
        "attribute",
        "annotate",
        "freeze",
        "eval",
        "let",
    }
)

# Words no declared IVML name may take.
RESERVED_WORDS = (
    UNSUPPORTED_KEYWORDS
    | frozenset(BUILTIN_ARITY)
    | frozenset({"project", "enum", "setOf", "Boolean", "Integer", "Real", "String"})
    | frozenset({"and", "or", "not", "iff", "implies", "true", "false"})
)


@lru_cache(maxsize=1)
def _ivml_parser() -> Lark:
    return Lark(IVML_GRAMMAR, parser="lalr", lexer="basic", maybe_placeholders=False)


def _binary(op: IvmlOperator):  # type: ignore[no-untyped-def]
    def build(self: "_IvmlTreeBuilder", items: list) -> IvmlBinary:
        return IvmlBinary(op, items[0], items[1])

    return build


class _IvmlTreeBuilder(Transformer):
    """Turns the lark parse tree into IVML nodes."""

    def start(self, items: list) -> IvmlProject:
        return IvmlProject(name=str(items[0]), declarations=tuple(items[1:]))

    def enum_def(self, items: list) -> EnumDef:
        return EnumDef(str(items[0]), tuple(str(t) for t in items[1:]))

    def var_decl(self, items: list) -> VarDecl:
        return VarDecl(str(items[1]), items[0])

    def boolean_type(self, items: list) -> IvmlType:
        return BOOLEAN

    def integer_type(self, items: list) -> IvmlType:
        return INTEGER

    def real_type(self, items: list) -> IvmlType:
        return REAL

    def string_type(self, items: list) -> IvmlType:
        return STRING

    def set_type(self, items: list) -> IvmlType:
        return set_type(str(items[0]))

    def named_type(self, items: list) -> IvmlType:
        return enum_type(str(items[0]))

    def constraint_decl(self, items: list) -> ConstraintDecl:
        return ConstraintDecl(items[0])

    iff = _binary(IvmlOperator.IFF)
    implies = _binary(IvmlOperator.IMPLIES)
    or_ = _binary(IvmlOperator.OR)
    and_ = _binary(IvmlOperator.AND)
    eq = _binary(IvmlOperator.EQ)
    gt = _binary(IvmlOperator.GT)
    ge = _binary(IvmlOperator.GE)
    lt = _binary(IvmlOperator.LT)
    le = _binary(IvmlOperator.LE)
    add = _binary(IvmlOperator.ADD)
    sub = _binary(IvmlOperator.SUB)
    mul = _binary(IvmlOperator.MUL)
    div = _binary(IvmlOperator.DIV)

    def ne(self, items: list) -> IvmlExpr:
        left, right = items
        # "x <> true" reads back as a negation
        if right == TRUE:
            return IvmlNot(left)
        return IvmlBinary(IvmlOperator.NE, left, right)

    def not_(self, items: list) -> IvmlNot:
        return IvmlNot(items[0])

    def var_ref(self, items: list) -> VarRef:
        return VarRef(str(items[0]))

    def enum_literal(self, items: list) -> EnumLiteral:
        return EnumLiteral(str(items[0]), str(items[1]))

    def integer(self, items: list) -> IvmlConst:
        return IvmlConst(int(items[0]))

    def real(self, items: list) -> IvmlConst:
        return IvmlConst(float(items[0]))

    def string(self, items: list) -> IvmlConst:
        return IvmlConst(re.sub(r"\\(.)", r"\1", str(items[0])[1:-1]))

    def true(self, items: list) -> IvmlConst:
        return TRUE

    def false(self, items: list) -> IvmlConst:
        return FALSE

    def is_defined(self, items: list) -> IvmlCall:
        return IvmlCall("isDefined", (items[0],))

    def size(self, items: list) -> IvmlCall:
        return IvmlCall("size", (items[0],))

    def includes(self, items: list) -> IvmlCall:
        return IvmlCall("includes", (items[0], items[1]))

    def floor_(self, items: list) -> IvmlCall:
        return IvmlCall("floor", (items[0],))


def _syntax_error(error: UnexpectedInput, source_name: str) -> IvmlSyntaxError:
    location = None
    if getattr(error, "line", -1) and error.line > 0:
        location = SourceLocation(error.line, error.column)
    if isinstance(error, UnexpectedCharacters):
        message = f"unexpected character {error.char!r}"
    elif isinstance(error, UnexpectedToken):
        token: Token = error.token
        message = "unexpected end of input" if token.type == "$END" else f"unexpected '{token.value}'"
    elif isinstance(error, UnexpectedEOF):
        message = "unexpected end of input"
    else:
        message = str(error).splitlines()[0]
    return IvmlSyntaxError(Diagnostic(Severity.ERROR, message, location, source_name))


def _reject_unsupported(text: str, source_name: str) -> None:
    for token in _ivml_parser().lex(text):
        if token.type == "NAME" and str(token) in UNSUPPORTED_KEYWORDS:
            construct = str(token)
            location = SourceLocation(token.line or 0, token.column or 0)
            raise UnsupportedConstructError(
                construct,
                Diagnostic(Severity.ERROR, f"unsupported IVML construct '{construct}'", location, source_name),
            )


def parse_ivml_subset(text: str, source_name: str = "<input>") -> IvmlProject:
    """Parse IVML text restricted to the forms :func:`emit_ivml` produces.

    Raises:
        UnsupportedConstructError: the text uses IVML features outside the subset
        IvmlSyntaxError: the text does not parse
    """
    try:
        _reject_unsupported(text, source_name)
        tree = _ivml_parser().parse(text)
    except UnexpectedInput as e:
        raise _syntax_error(e, source_name) from e
    project = _IvmlTreeBuilder().transform(tree)
    logger.debug(f"Parsed IVML project {project.name} with {len(project.declarations)} declaration(s)")
    return project
