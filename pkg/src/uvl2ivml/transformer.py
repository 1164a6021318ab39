"""One-way UVL to IVML transformation.

Features are classified into bindings first (which IVML element represents a
feature and under which condition it is included), then each group is
translated in a pre-order walk of the feature tree, and finally the cross-tree
constraints are rewritten over the bindings.
"""

import logging
import re
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Set, Tuple

from pydantic import BaseModel, ConfigDict, Field, validator
from typing_extensions import assert_never

from .errors import NameCollisionError, UnboundFeatureError
from .ivml import (
    BOOLEAN,
    FALSE,
    INTEGER,
    REAL,
    RESERVED_WORDS,
    STRING,
    TRUE,
    ConstraintDecl,
    EnumDef,
    EnumLiteral,
    IvmlBinary,
    IvmlCall,
    IvmlConst,
    IvmlDecl,
    IvmlExpr,
    IvmlNot,
    IvmlOperator,
    IvmlProject,
    IvmlType,
    VarDecl,
    VarRef,
    enum_type,
    set_type,
)
from .uvl import (
    ConstraintExpr,
    FeatureNode,
    FeatureRef,
    FeatureType,
    GroupKind,
    GroupNode,
    UvlBinary,
    UvlCall,
    UvlLiteral,
    UvlModel,
    UvlNot,
    UvlOperator,
)


logger = logging.getLogger(__name__)

_IDENTIFIER = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

RESERVED_MARKERS = ("__ENUM__", "__SET__", "__COMPOUND__")


class TransformMode(str, Enum):
    """Which group constraints are emitted."""

    FAITHFUL = "faithful"
    STRICT = "strict"


class NamingMode(str, Enum):
    """How generated enums, instances and sets are named."""

    SUFFIX = "suffix"
    PRETTY = "pretty"


class TransformOptions(BaseModel):
    """Options for a transformation run."""

    model_config = ConfigDict(frozen=True)

    mode: TransformMode = Field(default=TransformMode.FAITHFUL, description="faithful or strict constraints")
    naming: NamingMode = Field(default=NamingMode.SUFFIX, description="suffix or pretty generated names")
    project_name: Optional[str] = Field(
        default=None, description="IVML project name (default: UVL namespace, else root feature)"
    )
    enum_names: Dict[str, str] = Field(
        default_factory=dict, description="Parent feature name to enum name overrides"
    )

    @validator("project_name")
    def validate_project_name(cls, v: Optional[str]) -> Optional[str]:
        """Project names must be identifiers."""
        if v is not None and not _IDENTIFIER.match(v):
            raise ValueError(f"Project name '{v}' is not an identifier")
        if v in RESERVED_WORDS:
            raise ValueError(f"Project name '{v}' is a reserved IVML word")
        return v

    @validator("enum_names")
    def validate_enum_names(cls, v: Dict[str, str]) -> Dict[str, str]:
        """Enum name overrides must be identifiers."""
        for parent, name in v.items():
            if not _IDENTIFIER.match(name):
                raise ValueError(f"Enum name '{name}' for '{parent}' is not an identifier")
            if name in RESERVED_WORDS:
                raise ValueError(f"Enum name '{name}' for '{parent}' is a reserved IVML word")
        return v


class BindingKind(str, Enum):
    """How a UVL feature is represented in IVML."""

    ALWAYS_INCLUDED = "always_included"
    INHERITED = "inherited"
    BOOLEAN_VAR = "boolean_var"
    ALT_MEMBER = "alt_member"
    OR_MEMBER = "or_member"
    TYPED_VAR = "typed_var"


@dataclass(frozen=True)
class FeatureBinding:
    """The IVML representation of one UVL feature.

    ``variable`` is the feature's own variable (BOOLEAN_VAR, TYPED_VAR) or the
    enum instance / set variable of its group (ALT_MEMBER, OR_MEMBER).
    ``inclusion`` is the condition under which the feature is selected.
    """

    feature: str
    kind: BindingKind
    inclusion: IvmlExpr
    parent: Optional[str] = None
    variable: Optional[str] = None
    enum: Optional[str] = None
    literal: Optional[str] = None
    var_type: Optional[IvmlType] = None

    @property
    def has_own_variable(self) -> bool:
        return self.kind in (BindingKind.BOOLEAN_VAR, BindingKind.TYPED_VAR)

    @property
    def reference(self) -> IvmlExpr:
        """Expression a cross-tree constraint reference rewrites to."""
        if self.kind is BindingKind.TYPED_VAR:
            assert self.variable is not None
            return VarRef(self.variable)
        return self.inclusion


class NamePool:
    """Generated-name registry for one transformation run."""

    def __init__(self, source_names: Set[str], naming: NamingMode, enum_names: Optional[Dict[str, str]] = None):
        self.source_names = set(source_names)
        self.naming = naming
        self.enum_names = dict(enum_names or {})
        self._claimed: Set[str] = set()
        self._enum_counters: Dict[str, int] = {}
        self._set_counters: Dict[str, int] = {}
        self._group_counters: Dict[str, int] = {}
        for name in sorted(self.source_names):
            if name in RESERVED_WORDS:
                raise NameCollisionError(name, "is a reserved IVML word")
        if naming is NamingMode.SUFFIX:
            for name in sorted(self.source_names):
                for marker in RESERVED_MARKERS:
                    if marker in name:
                        raise NameCollisionError(name, f"contains the reserved marker '{marker}'")

    def claim(self, name: str, owner: Optional[str] = None) -> str:
        """Register ``name``; ``owner`` is the source feature allowed to share it."""
        if name in RESERVED_WORDS:
            raise NameCollisionError(name, "is a reserved IVML word")
        if name in self._claimed:
            raise NameCollisionError(name, "is already declared")
        if name in self.source_names and name != owner:
            raise NameCollisionError(name, "clashes with a source feature name")
        self._claimed.add(name)
        return name

    @staticmethod
    def _next(counters: Dict[str, int], parent: str) -> int:
        counters[parent] = counters.get(parent, 0) + 1
        return counters[parent]

    def group_names(self, parent: FeatureNode, kind: GroupKind, parent_has_variable: bool) -> Tuple[str, str]:
        """Enum name and instance/set variable name for one of ``parent``'s groups."""
        n = self._next(self._group_counters, parent.name)
        enum_number = self._next(self._enum_counters, parent.name)
        if self.naming is NamingMode.SUFFIX:
            enum_name = f"{parent.name}__ENUM__{enum_number}"
            if kind is GroupKind.ALTERNATIVE:
                variable = f"{enum_name}__INSTANCE"
            else:
                variable = f"{parent.name}__SET__{self._next(self._set_counters, parent.name)}__INSTANCE"
        elif self.naming is NamingMode.PRETTY:
            suffix = "Options" if kind is GroupKind.OR else "Types"
            enum_name = f"{parent.name}{suffix}"
            variable = parent.name
            if n > 1:
                enum_name = f"{enum_name}{n}"
                variable = f"{variable}{n}"
        else:
            assert_never(self.naming)

        override = self.enum_names.get(parent.name)
        if override is not None:
            enum_name = override if n == 1 else f"{override}{n}"

        self.claim(enum_name)
        if variable == parent.name and parent_has_variable:
            raise NameCollisionError(variable, f"is already the variable of feature '{parent.name}'")
        self.claim(variable, owner=parent.name)
        logger.debug(f"Group {n} of {parent.name}: enum {enum_name}, variable {variable}")
        return enum_name, variable


def _implies(condition: IvmlExpr, consequence: IvmlExpr) -> IvmlExpr:
    return IvmlBinary(IvmlOperator.IMPLIES, condition, consequence)


def _size_compare(variable: str, op: IvmlOperator, bound: int) -> IvmlExpr:
    return IvmlBinary(op, IvmlCall("size", (VarRef(variable),)), IvmlConst(bound))


_TYPED = {FeatureType.STRING: STRING, FeatureType.INTEGER: INTEGER, FeatureType.REAL: REAL}


def classify_features(model: UvlModel, opts: Optional[TransformOptions] = None) -> Dict[str, FeatureBinding]:
    """Bind every feature of a validated model to its IVML representation.

    Raises:
        NameCollisionError: a generated name clashes with another name
    """
    opts = opts or TransformOptions()
    pool = NamePool({f.name for f in model.features()}, opts.naming, opts.enum_names)
    bindings: Dict[str, FeatureBinding] = {}
    root = model.root
    bindings[root.name] = FeatureBinding(root.name, BindingKind.ALWAYS_INCLUDED, TRUE)

    def visit(parent: FeatureNode) -> None:
        parent_binding = bindings[parent.name]
        condition = parent_binding.inclusion
        for group in parent.groups:
            if group.kind in (GroupKind.ALTERNATIVE, GroupKind.OR, GroupKind.CARDINALITY):
                enum_name, variable = pool.group_names(parent, group.kind, parent_binding.has_own_variable)
                for child in group.children:
                    literal = EnumLiteral(enum_name, child.name)
                    if group.kind is GroupKind.ALTERNATIVE:
                        selected: IvmlExpr = IvmlBinary(IvmlOperator.EQ, VarRef(variable), literal)
                        if condition != TRUE:
                            defined = IvmlCall("isDefined", (VarRef(variable),))
                            selected = IvmlBinary(IvmlOperator.AND, defined, selected)
                        bindings[child.name] = FeatureBinding(
                            child.name, BindingKind.ALT_MEMBER, selected, parent.name,
                            variable, enum_name, child.name, enum_type(enum_name),
                        )
                    else:
                        bindings[child.name] = FeatureBinding(
                            child.name, BindingKind.OR_MEMBER,
                            IvmlCall("includes", (VarRef(variable), literal)), parent.name,
                            variable, enum_name, child.name, set_type(enum_name),
                        )
            else:
                for child in group.children:
                    bindings[child.name] = _bind_plain_child(child, group.kind, condition, parent.name, pool)
            for child in group.children:
                visit(child)

    visit(root)
    logger.debug(f"Classified {len(bindings)} feature(s)")
    return bindings


def _bind_plain_child(
    child: FeatureNode, kind: GroupKind, condition: IvmlExpr, parent: str, pool: NamePool
) -> FeatureBinding:
    if child.declared_type is not FeatureType.BOOLEAN:
        var_type = _TYPED[child.declared_type]
        pool.claim(child.name, owner=child.name)
        return FeatureBinding(child.name, BindingKind.TYPED_VAR, condition, parent, child.name, var_type=var_type)
    if kind is GroupKind.MANDATORY:
        if condition == TRUE:
            return FeatureBinding(child.name, BindingKind.ALWAYS_INCLUDED, TRUE, parent)
        return FeatureBinding(child.name, BindingKind.INHERITED, condition, parent)
    pool.claim(child.name, owner=child.name)
    return FeatureBinding(
        child.name, BindingKind.BOOLEAN_VAR, VarRef(child.name), parent, child.name, var_type=BOOLEAN
    )


def _translate_group(
    parent: FeatureNode, group: GroupNode, bindings: Dict[str, FeatureBinding], opts: TransformOptions
) -> Tuple[List[IvmlDecl], List[IvmlDecl]]:
    """Forward declarations and strict-mode reverse constraints of one group."""
    condition = bindings[parent.name].inclusion
    strict = opts.mode is TransformMode.STRICT and condition != TRUE
    forward: List[IvmlDecl] = []
    reverse: List[IvmlDecl] = []

    def guarded(expr: IvmlExpr) -> None:
        constraint = simplify(_implies(condition, expr))
        if constraint != TRUE:
            forward.append(ConstraintDecl(constraint))

    if group.kind in (GroupKind.MANDATORY, GroupKind.OPTIONAL):
        for child in group.children:
            binding = bindings[child.name]
            if binding.has_own_variable:
                assert binding.variable is not None and binding.var_type is not None
                forward.append(VarDecl(binding.variable, binding.var_type))
            if strict and binding.kind is BindingKind.BOOLEAN_VAR:
                reverse.append(ConstraintDecl(_implies(binding.inclusion, condition)))
        return forward, reverse

    first = bindings[group.children[0].name]
    assert first.variable is not None and first.enum is not None and first.var_type is not None
    variable = first.variable
    forward.append(EnumDef(first.enum, tuple(child.name for child in group.children)))
    forward.append(VarDecl(variable, first.var_type))

    if group.kind is GroupKind.ALTERNATIVE:
        defined = IvmlCall("isDefined", (VarRef(variable),))
        guarded(defined)
        if strict:
            reverse.append(ConstraintDecl(_implies(defined, condition)))
    elif group.kind in (GroupKind.OR, GroupKind.CARDINALITY):
        lower, upper = group.bounds()
        if lower > 0:
            guarded(_size_compare(variable, IvmlOperator.GE, lower))
        if upper < len(group.children):
            guarded(_size_compare(variable, IvmlOperator.LE, upper))
        if strict:
            reverse.append(ConstraintDecl(_implies(_size_compare(variable, IvmlOperator.GE, 1), condition)))
    else:
        raise AssertionError(f"unexpected group kind {group.kind}")
    return forward, reverse


def transform_group(
    parent: FeatureNode, group: GroupNode, bindings: Dict[str, FeatureBinding], opts: TransformOptions
) -> List[IvmlDecl]:
    """Declarations for one group: enum, instance or set, guarded constraints."""
    forward, reverse = _translate_group(parent, group, bindings, opts)
    return forward + reverse


_OPERATORS = {
    UvlOperator.AND: IvmlOperator.AND,
    UvlOperator.OR: IvmlOperator.OR,
    UvlOperator.IMPLIES: IvmlOperator.IMPLIES,
    UvlOperator.IFF: IvmlOperator.IFF,
    UvlOperator.EQ: IvmlOperator.EQ,
    UvlOperator.NE: IvmlOperator.NE,
    UvlOperator.GT: IvmlOperator.GT,
    UvlOperator.GE: IvmlOperator.GE,
    UvlOperator.LT: IvmlOperator.LT,
    UvlOperator.LE: IvmlOperator.LE,
    UvlOperator.ADD: IvmlOperator.ADD,
    UvlOperator.SUB: IvmlOperator.SUB,
    UvlOperator.MUL: IvmlOperator.MUL,
    UvlOperator.DIV: IvmlOperator.DIV,
}

_FUNCTIONS = {"len": "size", "floor": "floor"}


def _rewrite(expr: ConstraintExpr, bindings: Dict[str, FeatureBinding]) -> IvmlExpr:
    if isinstance(expr, FeatureRef):
        binding = bindings.get(expr.name)
        if binding is None:
            raise UnboundFeatureError(expr.name)
        return binding.reference
    if isinstance(expr, UvlLiteral):
        return IvmlConst(expr.value)
    if isinstance(expr, UvlNot):
        return IvmlNot(_rewrite(expr.operand, bindings))
    if isinstance(expr, UvlCall):
        return IvmlCall(_FUNCTIONS[expr.function], (_rewrite(expr.argument, bindings),))
    if isinstance(expr, UvlBinary):
        return IvmlBinary(_OPERATORS[expr.op], _rewrite(expr.left, bindings), _rewrite(expr.right, bindings))
    assert_never(expr)


def rewrite_constraint(expr: ConstraintExpr, bindings: Dict[str, FeatureBinding]) -> IvmlExpr:
    """Map a UVL cross-tree constraint onto IVML and simplify it.

    Raises:
        UnboundFeatureError: the constraint references a feature without a binding
    """
    return simplify(_rewrite(expr, bindings))


def _simplify_once(expr: IvmlExpr) -> IvmlExpr:
    if isinstance(expr, IvmlNot):
        operand = _simplify_once(expr.operand)
        if operand == TRUE:
            return FALSE
        if operand == FALSE:
            return TRUE
        if isinstance(operand, IvmlNot):
            return operand.operand
        return IvmlNot(operand)
    if isinstance(expr, IvmlCall):
        return IvmlCall(expr.function, tuple(_simplify_once(a) for a in expr.args))
    if not isinstance(expr, IvmlBinary):
        return expr

    op = expr.op
    left = _simplify_once(expr.left)
    right = _simplify_once(expr.right)
    if op is IvmlOperator.IMPLIES:
        if left == TRUE:
            return right
        if left == FALSE or right == TRUE:
            return TRUE
    elif op is IvmlOperator.AND:
        if left == TRUE:
            return right
        if right == TRUE:
            return left
        if FALSE in (left, right):
            return FALSE
    elif op is IvmlOperator.OR:
        if left == FALSE:
            return right
        if right == FALSE:
            return left
        if TRUE in (left, right):
            return TRUE
    elif op is IvmlOperator.IFF:
        if left == TRUE:
            return right
        if right == TRUE:
            return left
    elif op is IvmlOperator.NE:
        if right == TRUE:
            return IvmlNot(left)
    return IvmlBinary(op, left, right)


def simplify(expr: IvmlExpr) -> IvmlExpr:
    """Fold boolean constants and double negation until nothing changes."""
    while True:
        simpler = _simplify_once(expr)
        if simpler == expr:
            return simpler
        expr = simpler


def transform(
    model: UvlModel, opts: Optional[TransformOptions] = None
) -> Tuple[IvmlProject, Dict[str, FeatureBinding]]:
    """Transform a validated UVL model into an IVML project.

    Returns:
        The project and the binding of every feature, for the oracle.

    Raises:
        NameCollisionError: a generated name clashes with another name
    """
    opts = opts or TransformOptions()
    bindings = classify_features(model, opts)
    declarations: List[IvmlDecl] = []
    auxiliary: List[IvmlDecl] = []

    def visit(feature: FeatureNode) -> None:
        for group in feature.groups:
            forward, reverse = _translate_group(feature, group, bindings, opts)
            declarations.extend(forward)
            auxiliary.extend(reverse)
            for child in group.children:
                visit(child)

    visit(model.root)
    for constraint in model.constraints:
        rewritten = rewrite_constraint(constraint, bindings)
        if rewritten != TRUE:
            declarations.append(ConstraintDecl(rewritten))
    declarations.extend(auxiliary)

    name = opts.project_name or model.namespace or model.root.name
    if name in RESERVED_WORDS:
        raise NameCollisionError(name, "is a reserved IVML word and cannot name the project")
    project = IvmlProject(name, tuple(declarations))
    logger.info(
        f"Transformed {model.source_name} into project {name}: "
        f"{len(declarations)} declaration(s), mode {opts.mode.value}, naming {opts.naming.value}"
    )
    return project, bindings
