"""Brute-force configuration-space oracle.

Enumerates the valid configurations of a boolean-level UVL model and the valid
assignments of an IVML project, and checks that the transformation maps one
onto the other.
"""

import heapq
import logging
import math
import time
from dataclasses import dataclass
from enum import Enum
from itertools import product
from typing import Any, Callable, Dict, FrozenSet, Generic, Iterator, List, NamedTuple, Optional, Sequence, Tuple, TypeVar, Union

from more_itertools import powerset
from pydantic import BaseModel, ConfigDict, Field
from typing_extensions import assert_never

from .config import OracleConfig
from .errors import EnumerationCapError, IvmlEvaluationError, MappingError, NonBooleanModelError
from .ivml import (
    EnumLiteral,
    IvmlBinary,
    IvmlCall,
    IvmlConst,
    IvmlExpr,
    IvmlNot,
    IvmlOperator,
    IvmlProject,
    TypeKind,
    VarDecl,
    VarRef,
)
from .transformer import BindingKind, FeatureBinding
from .uvl import (
    ConstraintExpr,
    FeatureNode,
    FeatureRef,
    GroupKind,
    GroupNode,
    UvlBinary,
    UvlLiteral,
    UvlModel,
    UvlNot,
    UvlOperator,
    is_boolean_level,
)


logger = logging.getLogger(__name__)

T = TypeVar("T")


class Undefined(Enum):
    """Value of an enum instance that has not been assigned."""

    UNDEFINED = "UNDEFINED"

    def __repr__(self) -> str:
        return "UNDEFINED"


UNDEFINED = Undefined.UNDEFINED


class EnumValue(NamedTuple):
    enum: str
    literal: str


IvmlValue = Union[bool, int, float, str, EnumValue, FrozenSet[str], Undefined]


def format_value(value: IvmlValue) -> str:
    if value is UNDEFINED:
        return "UNDEFINED"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, EnumValue):
        return f"{value.enum}.{value.literal}"
    if isinstance(value, frozenset):
        return "{" + ", ".join(sorted(value)) + "}"
    return repr(value)


@dataclass(frozen=True)
class Configuration:
    """Selected features of a UVL configuration."""

    selected: FrozenSet[str]

    def is_selected(self, feature: str) -> bool:
        return feature in self.selected

    def sort_key(self) -> Tuple[int, Tuple[str, ...]]:
        """Smaller selections first, then by sorted feature names."""
        return len(self.selected), tuple(sorted(self.selected))

    def __str__(self) -> str:
        return "{" + ", ".join(sorted(self.selected)) + "}"


@dataclass(frozen=True)
class IvmlAssignment:
    """Values of every IVML variable, sorted by variable name."""

    values: Tuple[Tuple[str, IvmlValue], ...]

    @classmethod
    def of(cls, mapping: Dict[str, IvmlValue]) -> "IvmlAssignment":
        return cls(tuple(sorted(mapping.items(), key=lambda item: item[0])))

    def as_dict(self) -> Dict[str, IvmlValue]:
        return dict(self.values)

    def __getitem__(self, name: str) -> IvmlValue:
        for key, value in self.values:
            if key == name:
                return value
        raise KeyError(name)

    def __str__(self) -> str:
        return "{" + ", ".join(f"{name}={format_value(value)}" for name, value in self.values) + "}"


# UVL side


def decision_features(model: UvlModel) -> List[str]:
    """Features whose selection is not fixed by an all-mandatory chain from the root."""
    decisions: List[str] = []

    def visit(feature: FeatureNode, fixed: bool) -> None:
        for group in feature.groups:
            for child in group.children:
                child_fixed = fixed and group.kind is GroupKind.MANDATORY
                if not child_fixed:
                    decisions.append(child.name)
                visit(child, child_fixed)

    visit(model.root, True)
    return decisions


def _subtree_selections(feature: FeatureNode, selected: FrozenSet[str] = frozenset()) -> Iterator[FrozenSet[str]]:
    """Lazily yield every selection of a subtree given that ``feature`` is selected."""
    yield from _group_selections(feature.groups, selected | {feature.name})


def _group_selections(groups: Sequence[GroupNode], selected: FrozenSet[str]) -> Iterator[FrozenSet[str]]:
    if not groups:
        yield selected
        return
    group, rest = groups[0], groups[1:]
    lower, upper = group.bounds()
    for chosen in powerset(group.children):
        if not lower <= len(chosen) <= upper:
            continue
        for with_children in _children_selections(chosen, selected):
            yield from _group_selections(rest, with_children)


def _children_selections(children: Sequence[FeatureNode], selected: FrozenSet[str]) -> Iterator[FrozenSet[str]]:
    if not children:
        yield selected
        return
    for with_first in _subtree_selections(children[0], selected):
        yield from _children_selections(children[1:], with_first)


def _holds(expr: ConstraintExpr, selected: FrozenSet[str]) -> bool:
    if isinstance(expr, FeatureRef):
        return expr.name in selected
    if isinstance(expr, UvlLiteral):
        if not isinstance(expr.value, bool):
            raise NonBooleanModelError(f"non-boolean literal {expr.value!r} in constraint")
        return expr.value
    if isinstance(expr, UvlNot):
        return not _holds(expr.operand, selected)
    if isinstance(expr, UvlBinary):
        left = _holds(expr.left, selected)
        right = _holds(expr.right, selected)
        if expr.op is UvlOperator.AND:
            return left and right
        if expr.op is UvlOperator.OR:
            return left or right
        if expr.op is UvlOperator.IMPLIES:
            return (not left) or right
        if expr.op is UvlOperator.IFF:
            return left == right
    raise NonBooleanModelError(f"constraint is not boolean-level: {expr!r}")


def iter_uvl_configurations(model: UvlModel, limit: int = 24) -> Iterator[Configuration]:
    """Lazily yield the valid configurations of a boolean-level model.

    The checks run when the function is called, before the first configuration
    is requested. Configurations come in structural order, not sorted.

    Raises:
        NonBooleanModelError: the model uses typed features or non-boolean constraints
        EnumerationCapError: more than ``limit`` decision features
    """
    if not is_boolean_level(model):
        raise NonBooleanModelError("only boolean-level models can be enumerated")
    decisions = decision_features(model)
    if len(decisions) > limit:
        raise EnumerationCapError("number of decision features", len(decisions), limit)
    constraints = model.constraints
    return (
        Configuration(selected)
        for selected in _subtree_selections(model.root)
        if all(_holds(constraint, selected) for constraint in constraints)
    )


def enumerate_uvl_configurations(model: UvlModel, limit: int = 24) -> List[Configuration]:
    """All valid configurations of a boolean-level model, sorted canonically.

    Raises:
        NonBooleanModelError: the model uses typed features or non-boolean constraints
        EnumerationCapError: more than ``limit`` decision features
    """
    valid = sorted(iter_uvl_configurations(model, limit), key=Configuration.sort_key)
    logger.debug(f"UVL enumeration: {len(valid)} valid configuration(s)")
    return valid


# IVML side

Env = Dict[str, IvmlValue]
Evaluator = Callable[[Env], IvmlValue]


def _constant(value: IvmlValue) -> Evaluator:
    return lambda env: value


class _Compiler:
    """Compiles constraint expressions into closures over an assignment.

    Evaluation is three-valued: reading an unassigned enum instance yields
    UNDEFINED, which propagates except through a deciding operand of
    ``and``/``or``/``implies`` and through ``isDefined``.
    """

    def __init__(self, project: IvmlProject):
        self.variables: Dict[str, VarDecl] = project.variables()

    def compile(self, expr: IvmlExpr) -> Evaluator:
        if isinstance(expr, VarRef):
            name = expr.name
            if name not in self.variables:
                raise IvmlEvaluationError(f"unknown variable '{name}'")
            return lambda env: env[name]
        if isinstance(expr, EnumLiteral):
            return _constant(EnumValue(expr.enum, expr.literal))
        if isinstance(expr, IvmlConst):
            return _constant(expr.value)
        if isinstance(expr, IvmlCall):
            return self._compile_call(expr)
        if isinstance(expr, IvmlNot):
            operand = self.compile(expr.operand)

            def negate(env: Env) -> IvmlValue:
                value = operand(env)
                return UNDEFINED if value is UNDEFINED else not value

            return negate
        if isinstance(expr, IvmlBinary):
            return self._compile_binary(expr)
        assert_never(expr)

    def _require_kind(self, expr: IvmlExpr, kinds: Sequence[TypeKind], function: str) -> None:
        if isinstance(expr, VarRef) and expr.name in self.variables:
            kind = self.variables[expr.name].type.kind
            if kind not in kinds:
                raise IvmlEvaluationError(f"{function}() applied to {kind.value} variable '{expr.name}'")

    def _compile_call(self, expr: IvmlCall) -> Evaluator:
        function = expr.function
        args = [self.compile(arg) for arg in expr.args]
        if function == "isDefined":
            (arg,) = args
            return lambda env: arg(env) is not UNDEFINED
        if function == "size":
            self._require_kind(expr.args[0], (TypeKind.SET, TypeKind.STRING), function)
            (arg,) = args

            def size(env: Env) -> IvmlValue:
                value = arg(env)
                if value is UNDEFINED:
                    return UNDEFINED
                if not isinstance(value, (frozenset, str)):
                    raise IvmlEvaluationError(f"size() of non-collection value {value!r}")
                return len(value)

            return size
        if function == "includes":
            self._require_kind(expr.args[0], (TypeKind.SET,), function)
            collection, element = args

            def includes(env: Env) -> IvmlValue:
                value = collection(env)
                item = element(env)
                if value is UNDEFINED or item is UNDEFINED:
                    return UNDEFINED
                if not isinstance(value, frozenset):
                    raise IvmlEvaluationError(f"includes() on non-set value {value!r}")
                literal = item.literal if isinstance(item, EnumValue) else item
                return literal in value

            return includes
        if function == "floor":
            (arg,) = args

            def floor(env: Env) -> IvmlValue:
                value = arg(env)
                return UNDEFINED if value is UNDEFINED else math.floor(value)  # type: ignore[arg-type]

            return floor
        raise IvmlEvaluationError(f"unsupported operation {function}()")

    def _compile_binary(self, expr: IvmlBinary) -> Evaluator:
        left = self.compile(expr.left)
        right = self.compile(expr.right)
        op = expr.op

        if op is IvmlOperator.AND:

            def conjunction(env: Env) -> IvmlValue:
                a = left(env)
                if a is False:
                    return False
                b = right(env)
                if b is False:
                    return False
                return True if a is True and b is True else UNDEFINED

            return conjunction
        if op is IvmlOperator.OR:

            def disjunction(env: Env) -> IvmlValue:
                a = left(env)
                if a is True:
                    return True
                b = right(env)
                if b is True:
                    return True
                return False if a is False and b is False else UNDEFINED

            return disjunction
        if op is IvmlOperator.IMPLIES:

            def implication(env: Env) -> IvmlValue:
                a = left(env)
                if a is False:
                    return True
                b = right(env)
                if b is True:
                    return True
                return False if a is True and b is False else UNDEFINED

            return implication

        strict = _STRICT_OPERATIONS[op]

        def apply(env: Env) -> IvmlValue:
            a = left(env)
            b = right(env)
            if a is UNDEFINED or b is UNDEFINED:
                return UNDEFINED
            return strict(a, b)

        return apply


def _divide(a: IvmlValue, b: IvmlValue) -> IvmlValue:
    if b == 0:
        return UNDEFINED
    if isinstance(a, int) and isinstance(b, int):
        return a // b
    return a / b  # type: ignore[operator]


_STRICT_OPERATIONS: Dict[IvmlOperator, Callable[[IvmlValue, IvmlValue], IvmlValue]] = {
    IvmlOperator.IFF: lambda a, b: a == b,
    IvmlOperator.EQ: lambda a, b: a == b,
    IvmlOperator.NE: lambda a, b: a != b,
    IvmlOperator.GT: lambda a, b: a > b,  # type: ignore[operator]
    IvmlOperator.GE: lambda a, b: a >= b,  # type: ignore[operator]
    IvmlOperator.LT: lambda a, b: a < b,  # type: ignore[operator]
    IvmlOperator.LE: lambda a, b: a <= b,  # type: ignore[operator]
    IvmlOperator.ADD: lambda a, b: a + b,  # type: ignore[operator]
    IvmlOperator.SUB: lambda a, b: a - b,  # type: ignore[operator]
    IvmlOperator.MUL: lambda a, b: a * b,  # type: ignore[operator]
    IvmlOperator.DIV: _divide,
}


class CompiledProject:
    """An IVML project with its constraints compiled for repeated evaluation."""

    def __init__(self, project: IvmlProject):
        self.project = project
        self.variables = project.variables()
        compiler = _Compiler(project)
        self._constraints = [compiler.compile(c) for c in project.constraints()]

    def satisfied(self, env: Env) -> bool:
        return all(constraint(env) is True for constraint in self._constraints)

    def evaluate(self, assignment: IvmlAssignment) -> bool:
        env = assignment.as_dict()
        missing = [name for name in self.variables if name not in env]
        if missing:
            raise IvmlEvaluationError(f"assignment has no value for {', '.join(sorted(missing))}")
        return self.satisfied(env)

    def domains(self) -> Dict[str, List[IvmlValue]]:
        """Finite value domain of every variable.

        Raises:
            NonBooleanModelError: the project declares Integer, Real or String variables
        """
        enums = self.project.enums()
        result: Dict[str, List[IvmlValue]] = {}
        for name, decl in self.variables.items():
            kind = decl.type.kind
            if kind is TypeKind.BOOLEAN:
                result[name] = [False, True]
            elif kind is TypeKind.ENUM:
                literals = enums[str(decl.type.element)].literals
                result[name] = [UNDEFINED, *(EnumValue(str(decl.type.element), lit) for lit in literals)]
            elif kind is TypeKind.SET:
                literals = enums[str(decl.type.element)].literals
                result[name] = [frozenset(subset) for subset in powerset(literals)]
            else:
                raise NonBooleanModelError(f"variable '{name}' has unbounded type {kind.value}")
        return result


def evaluate_ivml(project: IvmlProject, assignment: IvmlAssignment) -> bool:
    """True iff every constraint of ``project`` is definitely true under ``assignment``.

    Raises:
        IvmlEvaluationError: type mismatch or a variable without a value
    """
    return CompiledProject(project).evaluate(assignment)


class AssignmentSpace:
    """The finite domain product of a compiled project.

    Every assignment has an index in ``range(size)``: variables are taken in
    name order and the last one varies fastest, matching ``itertools.product``.

    Raises:
        NonBooleanModelError: a variable has an unbounded domain
        EnumerationCapError: the domain product exceeds ``limit``
    """

    def __init__(self, compiled: CompiledProject, limit: int = 2**24):
        self.compiled = compiled
        domains = compiled.domains()
        self.names: List[str] = sorted(domains)
        self.domains: List[List[IvmlValue]] = [domains[name] for name in self.names]
        self.size = math.prod(len(domain) for domain in self.domains)
        if self.size > limit:
            raise EnumerationCapError("IVML assignment space", self.size, limit)
        self._positions = [{value: i for i, value in enumerate(domain)} for domain in self.domains]

    def index(self, assignment: IvmlAssignment) -> int:
        """Position of ``assignment`` in enumeration order.

        Raises:
            MappingError: a value lies outside its variable's domain
        """
        env = assignment.as_dict()
        code = 0
        for name, domain, positions in zip(self.names, self.domains, self._positions):
            value = env.get(name, UNDEFINED)
            if value not in positions:
                raise MappingError(f"value {format_value(value)} is outside the domain of '{name}'")
            code = code * len(domain) + positions[value]
        return code

    def valid(self) -> Iterator[Tuple[int, IvmlAssignment]]:
        """Yield ``(index, assignment)`` for every assignment satisfying all constraints."""
        logger.debug(f"IVML enumeration over {len(self.names)} variable(s), {self.size} candidate(s)")
        names = self.names
        for code, combo in enumerate(product(*self.domains)):
            if self.compiled.satisfied(dict(zip(names, combo))):
                yield code, IvmlAssignment(tuple(zip(names, combo)))


def enumerate_ivml_assignments(
    project: IvmlProject, limit: int = 2**24, compiled: Optional[CompiledProject] = None
) -> Iterator[IvmlAssignment]:
    """Yield the valid assignments of the project's finite domain product.

    Raises:
        NonBooleanModelError: a variable has an unbounded domain
        EnumerationCapError: the domain product exceeds ``limit``
    """
    space = AssignmentSpace(compiled or CompiledProject(project), limit)
    return (assignment for _, assignment in space.valid())


def map_configuration(config: Configuration, bindings: Dict[str, FeatureBinding]) -> IvmlAssignment:
    """Image of a UVL configuration under the transformation's bindings.

    Raises:
        MappingError: two members of one alternative group are selected
        NonBooleanModelError: a binding is a typed variable
    """
    values: Dict[str, IvmlValue] = {}
    for binding in bindings.values():
        kind = binding.kind
        if kind in (BindingKind.ALWAYS_INCLUDED, BindingKind.INHERITED):
            continue
        assert binding.variable is not None
        selected = config.is_selected(binding.feature)
        if kind is BindingKind.BOOLEAN_VAR:
            values[binding.variable] = selected
        elif kind is BindingKind.ALT_MEMBER:
            current = values.setdefault(binding.variable, UNDEFINED)
            if selected:
                if current is not UNDEFINED:
                    raise MappingError(
                        f"configuration selects both {format_value(current)} and {binding.literal} "
                        f"for '{binding.variable}'"
                    )
                values[binding.variable] = EnumValue(str(binding.enum), str(binding.literal))
        elif kind is BindingKind.OR_MEMBER:
            members = values.setdefault(binding.variable, frozenset())
            if selected:
                values[binding.variable] = members | {str(binding.literal)}  # type: ignore[operator]
        elif kind is BindingKind.TYPED_VAR:
            raise NonBooleanModelError(f"typed feature '{binding.feature}' has no boolean image")
        else:
            assert_never(kind)
    return IvmlAssignment.of(values)


class EquivalenceReport(BaseModel):
    """Outcome of comparing a UVL configuration space with an IVML assignment space."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    uvl_count: int = Field(..., ge=0, description="Valid UVL configurations")
    ivml_count: int = Field(..., ge=0, description="Valid IVML assignments")
    injective: bool = Field(..., description="Distinct configurations have distinct images")
    invalid_image_count: int = Field(default=0, ge=0, description="Configurations mapped to invalid assignments")
    unmapped_count: int = Field(default=0, ge=0, description="Valid assignments that are no image")
    bijective: bool = Field(..., description="Counts equal, all images valid and injective")
    unmapped_ivml: List[IvmlAssignment] = Field(default_factory=list, description="Sample unmapped assignments")
    invalid_images: List[Tuple[Configuration, IvmlAssignment]] = Field(
        default_factory=list, description="Sample configurations with invalid images"
    )
    elapsed: float = Field(default=0.0, ge=0, description="Seconds spent enumerating")

    @property
    def all_images_valid(self) -> bool:
        return self.invalid_image_count == 0

    def summary_line(self) -> str:
        verdict = "true" if self.bijective else "false"
        return f"EQUIV uvl={self.uvl_count} ivml={self.ivml_count} bijective={verdict}"

    def render(self) -> str:
        """Multi-line text report ending with the summary line."""

        def flag(value: bool) -> str:
            return "true" if value else "false"

        lines = [
            f"UVL configurations:   {self.uvl_count}",
            f"IVML assignments:     {self.ivml_count}",
            f"all images valid:     {flag(self.all_images_valid)}",
            f"injective:            {flag(self.injective)}",
            f"bijective:            {flag(self.bijective)}",
            f"elapsed:              {self.elapsed:.3f}s",
        ]
        if self.invalid_images:
            lines.append(f"invalid images ({self.invalid_image_count}):")
            lines.extend(f"  {config} -> {image}" for config, image in self.invalid_images)
        if self.unmapped_ivml:
            lines.append(f"unmapped IVML assignments ({self.unmapped_count}):")
            lines.extend(f"  {assignment}" for assignment in self.unmapped_ivml)
        lines.append(self.summary_line())
        return "\n".join(lines)

    def as_dict(self) -> Dict[str, object]:
        """JSON-friendly view with samples rendered as text."""
        return {
            "uvl_count": self.uvl_count,
            "ivml_count": self.ivml_count,
            "bijective": self.bijective,
            "injective": self.injective,
            "all_images_valid": self.all_images_valid,
            "invalid_images": [f"{config} -> {image}" for config, image in self.invalid_images],
            "unmapped_ivml": [str(a) for a in self.unmapped_ivml],
            "elapsed": self.elapsed,
            "summary": self.summary_line(),
        }


class _Samples(Generic[T]):
    """The ``limit`` smallest items seen so far under ``key``."""

    def __init__(self, limit: int, key: Callable[[T], Any]):
        self.limit = limit
        self.key = key
        self._items: List[T] = []

    def add(self, item: T) -> None:
        self._items.append(item)
        if len(self._items) > 2 * self.limit:
            self._items = heapq.nsmallest(self.limit, self._items, key=self.key)

    def items(self) -> List[T]:
        return heapq.nsmallest(self.limit, self._items, key=self.key)


def check_equivalence(
    model: UvlModel,
    project: IvmlProject,
    bindings: Dict[str, FeatureBinding],
    limits: Optional[OracleConfig] = None,
) -> EquivalenceReport:
    """Compare the configuration space of ``model`` with the assignment space of ``project``.

    Both spaces are streamed. Images are recorded as bits indexed by their
    position in the IVML assignment space, so memory stays bounded by the
    assignment cap.

    Raises:
        NonBooleanModelError: the model is not boolean-level
        EnumerationCapError: either space exceeds its cap
    """
    limits = limits or OracleConfig()
    started = time.perf_counter()
    configurations = iter_uvl_configurations(model, limits.max_features)
    compiled = CompiledProject(project)
    space = AssignmentSpace(compiled, limits.max_assignments)

    mapped = bytearray((space.size + 7) // 8)
    uvl_count = 0
    injective = True
    invalid_count = 0
    invalid: _Samples[Tuple[Configuration, IvmlAssignment]] = _Samples(
        limits.max_samples, key=lambda pair: pair[0].sort_key()
    )
    for config in configurations:
        uvl_count += 1
        image = map_configuration(config, bindings)
        if not compiled.evaluate(image):
            invalid_count += 1
            invalid.add((config, image))
        byte, bit = divmod(space.index(image), 8)
        if mapped[byte] >> bit & 1:
            injective = False
        mapped[byte] |= 1 << bit
    logger.debug(f"UVL enumeration: {uvl_count} valid configuration(s)")

    ivml_count = 0
    unmapped_count = 0
    unmapped: _Samples[IvmlAssignment] = _Samples(limits.max_samples, key=str)
    for code, assignment in space.valid():
        ivml_count += 1
        byte, bit = divmod(code, 8)
        if not mapped[byte] >> bit & 1:
            unmapped_count += 1
            unmapped.add(assignment)

    bijective = uvl_count == ivml_count and invalid_count == 0 and injective
    report = EquivalenceReport(
        uvl_count=uvl_count,
        ivml_count=ivml_count,
        injective=injective,
        invalid_image_count=invalid_count,
        unmapped_count=unmapped_count,
        bijective=bijective,
        unmapped_ivml=unmapped.items(),
        invalid_images=invalid.items(),
        elapsed=time.perf_counter() - started,
    )
    logger.info(report.summary_line())
    return report
