"""Tests for the configuration-space oracle."""

from math import comb

import pytest

from conftest import ONLINESHOP_CONFIGURATIONS, parse_text, read_data
from uvl2ivml.config import OracleConfig
from uvl2ivml.errors import EnumerationCapError, IvmlEvaluationError, MappingError, NonBooleanModelError
from uvl2ivml.ivml import (
    BOOLEAN,
    ConstraintDecl,
    EnumDef,
    EnumLiteral,
    IvmlBinary,
    IvmlCall,
    IvmlNot,
    IvmlOperator,
    IvmlProject,
    VarDecl,
    VarRef,
    enum_type,
    parse_ivml_subset,
)
from uvl2ivml.oracle import (
    UNDEFINED,
    Configuration,
    EnumValue,
    IvmlAssignment,
    AssignmentSpace,
    CompiledProject,
    check_equivalence,
    decision_features,
    enumerate_ivml_assignments,
    enumerate_uvl_configurations,
    evaluate_ivml,
    iter_uvl_configurations,
    map_configuration,
)
from uvl2ivml.transformer import TransformMode, TransformOptions, transform
from uvl2ivml.uvl import parse_uvl


STRICT = TransformOptions(mode=TransformMode.STRICT)


def group_model(keyword: str, k: int) -> str:
    children = "".join(f"            C{i}\n" for i in range(1, k + 1))
    return f"features\n    R\n        {keyword}\n{children}"


def golden_assignment(**overrides):
    values = {
        "Payment": EnumValue("PaymentTypes", "DebitCard"),
        "UserManagement": frozenset({"Security"}),
        "Review": frozenset({"Stars", "Numerical"}),
        "Platform": frozenset({"PC"}),
        "Sort": True,
        "Search": False,
        "Categories": False,
        "Newsletter": False,
    }
    values.update(overrides)
    return IvmlAssignment.of(values)


class TestClosedForms:
    @pytest.mark.parametrize("k", range(2, 7))
    def test_or_group(self, k):
        model = parse_text(group_model("or", k))
        assert len(enumerate_uvl_configurations(model)) == 2**k - 1
        report = check_equivalence(model, *transform(model, STRICT))
        assert report.bijective
        assert report.ivml_count == 2**k - 1

    @pytest.mark.parametrize("k", range(2, 7))
    def test_alternative_group(self, k):
        model = parse_text(group_model("alternative", k))
        assert len(enumerate_uvl_configurations(model)) == k
        report = check_equivalence(model, *transform(model, STRICT))
        assert report.bijective
        assert report.ivml_count == k

    @pytest.mark.parametrize(
        "k, lower, upper",
        [(k, lower, upper) for k in range(2, 7) for lower, upper in [(0, 1), (1, k), (2, k - 1), (k, k)] if lower <= upper],
    )
    def test_cardinality_group(self, k, lower, upper):
        model = parse_text(group_model(f"[{lower}..{upper}]", k))
        expected = sum(comb(k, i) for i in range(lower, upper + 1))
        assert len(enumerate_uvl_configurations(model)) == expected
        report = check_equivalence(model, *transform(model, STRICT))
        assert report.bijective
        assert report.ivml_count == expected


class TestUvlEnumeration:
    def test_optional_child(self):
        model = parse_text("features\n    R\n        optional\n            A\n")
        configs = enumerate_uvl_configurations(model)
        assert configs == [Configuration(frozenset({"R"})), Configuration(frozenset({"A", "R"}))]

    def test_smaller_selections_sort_first(self):
        model = parse_text("features\n    R\n        optional\n            B\n            A\n")
        configs = [sorted(c.selected) for c in enumerate_uvl_configurations(model)]
        assert configs == [["R"], ["A", "R"], ["B", "R"], ["A", "B", "R"]]

    def test_enumeration_is_lazy(self):
        model = parse_uvl(read_data("huge.uvl"))
        configs = iter_uvl_configurations(model, limit=30)
        assert next(configs) == Configuration(frozenset({"Root"}))
        assert next(configs).is_selected("Root")

    def test_lazy_enumeration_checks_eagerly(self):
        model = parse_uvl(read_data("huge.uvl"))
        with pytest.raises(EnumerationCapError):
            iter_uvl_configurations(model)

    def test_root_always_selected_and_children_need_parent(self, onlineshop_model):
        features = onlineshop_model.parent_map()
        for config in enumerate_uvl_configurations(onlineshop_model):
            assert config.is_selected("Onlineshop")
            for name in config.selected:
                if name in features:
                    assert config.is_selected(features[name][0].name)

    def test_onlineshop_count(self, onlineshop_model):
        assert len(enumerate_uvl_configurations(onlineshop_model)) == ONLINESHOP_CONFIGURATIONS

    def test_decision_features(self, onlineshop_model):
        decisions = decision_features(onlineshop_model)
        assert len(decisions) == 16
        assert "Catalog" not in decisions
        assert "Search" in decisions

    def test_cross_tree_constraints_filter(self):
        model = parse_text(
            "features\n    R\n        optional\n            A\n            B\nconstraints\n    A => !B\n"
        )
        assert len(enumerate_uvl_configurations(model)) == 3

    def test_unselected_features_are_false(self):
        model = parse_text(
            "features\n    R\n        optional\n            P\n                optional\n                    A\n"
            "constraints\n    !A\n"
        )
        assert len(enumerate_uvl_configurations(model)) == 2

    def test_cap(self):
        model = parse_uvl(read_data("huge.uvl"))
        with pytest.raises(EnumerationCapError) as excinfo:
            enumerate_uvl_configurations(model)
        assert excinfo.value.cap == 24
        assert excinfo.value.size == 30
        assert "24" in str(excinfo.value)

    def test_non_boolean_model(self):
        model = parse_text("features\n    R\n        optional\n            Integer N\n")
        with pytest.raises(NonBooleanModelError):
            enumerate_uvl_configurations(model)


class TestEvaluate:
    @pytest.fixture
    def golden_project(self, onlineshop_ivml):
        return parse_ivml_subset(onlineshop_ivml)

    def test_valid_assignment(self, golden_project):
        assert evaluate_ivml(golden_project, golden_assignment())

    def test_empty_or_set(self, golden_project):
        assert not evaluate_ivml(golden_project, golden_assignment(UserManagement=frozenset()))

    def test_mutual_exclusion(self, golden_project):
        assert not evaluate_ivml(golden_project, golden_assignment(UserManagement=frozenset({"Security", "Payments"})))

    def test_undefined_instance(self, golden_project):
        assert not evaluate_ivml(golden_project, golden_assignment(Payment=UNDEFINED))

    def test_missing_variable(self, golden_project):
        values = golden_assignment().as_dict()
        del values["Sort"]
        with pytest.raises(IvmlEvaluationError):
            evaluate_ivml(golden_project, IvmlAssignment.of(values))

    def test_set_operation_on_boolean(self):
        project = IvmlProject(
            "P",
            (
                EnumDef("E", ("X",)),
                VarDecl("A", BOOLEAN),
                ConstraintDecl(IvmlCall("includes", (VarRef("A"), EnumLiteral("E", "X")))),
            ),
        )
        with pytest.raises(IvmlEvaluationError):
            evaluate_ivml(project, IvmlAssignment.of({"A": True}))

    def test_three_valued_reads(self):
        instance = VarRef("I")
        selected = IvmlBinary(IvmlOperator.EQ, instance, EnumLiteral("E", "A"))
        defined = IvmlCall("isDefined", (instance,))
        declarations = (EnumDef("E", ("A", "B")), VarDecl("I", enum_type("E")))
        undefined = IvmlAssignment.of({"I": UNDEFINED})

        def holds(expr):
            return evaluate_ivml(IvmlProject("P", declarations + (ConstraintDecl(expr),)), undefined)

        assert not holds(selected)
        assert not holds(IvmlNot(selected))
        assert holds(IvmlNot(defined))
        assert holds(IvmlNot(IvmlBinary(IvmlOperator.AND, defined, selected)))
        assert holds(IvmlBinary(IvmlOperator.IMPLIES, defined, selected))
        assert holds(IvmlBinary(IvmlOperator.OR, IvmlNot(defined), selected))

    def test_removing_constraints_never_invalidates(self, golden_project):
        assignment = golden_assignment()
        for index in range(len(golden_project.declarations)):
            if not isinstance(golden_project.declarations[index], ConstraintDecl):
                continue
            reduced = IvmlProject(golden_project.name, golden_project.declarations[:index] + golden_project.declarations[index + 1 :])
            assert evaluate_ivml(reduced, assignment)

    def test_golden_assignment_space(self, golden_project):
        assert sum(1 for _ in enumerate_ivml_assignments(golden_project)) == ONLINESHOP_CONFIGURATIONS

    def test_assignment_cap(self, golden_project):
        with pytest.raises(EnumerationCapError):
            list(enumerate_ivml_assignments(golden_project, limit=1000))


class TestMapping:
    def test_alternative_and_or_images(self, onlineshop_model, golden_options):
        _, bindings = transform(onlineshop_model, golden_options)
        selected = {"Onlineshop", "Payment", "DebitCard", "Platform", "Mobile", "PC", "Sort"}
        image = map_configuration(Configuration(frozenset(selected)), bindings)
        assert image["Payment"] == EnumValue("PaymentTypes", "DebitCard")
        assert image["Platform"] == frozenset({"Mobile", "PC"})
        assert image["Sort"] is True
        assert image["Search"] is False

    def test_unselected_subtree(self):
        model = parse_text(
            "features\n    R\n        optional\n            P\n"
            "                alternative\n                    A\n                    B\n"
            "                or\n                    C\n                    D\n"
        )
        _, bindings = transform(model)
        image = map_configuration(Configuration(frozenset({"R"})), bindings)
        assert image.as_dict() == {
            "P": False,
            "P__ENUM__1__INSTANCE": UNDEFINED,
            "P__SET__1__INSTANCE": frozenset(),
        }

    def test_two_alternatives_selected(self):
        model = parse_text(group_model("alternative", 2))
        _, bindings = transform(model)
        with pytest.raises(MappingError):
            map_configuration(Configuration(frozenset({"R", "C1", "C2"})), bindings)


class TestEquivalence:
    def test_onlineshop_strict(self, onlineshop_model):
        report = check_equivalence(onlineshop_model, *transform(onlineshop_model, STRICT))
        assert report.bijective
        assert report.uvl_count == report.ivml_count == ONLINESHOP_CONFIGURATIONS
        assert report.summary_line() == f"EQUIV uvl={ONLINESHOP_CONFIGURATIONS} ivml={ONLINESHOP_CONFIGURATIONS} bijective=true"

    def test_optional_or_faithful_is_not_bijective(self):
        model = parse_uvl(read_data("optional_or.uvl"))
        report = check_equivalence(model, *transform(model))
        assert report.all_images_valid
        assert report.injective
        assert not report.bijective
        assert (report.uvl_count, report.ivml_count) == (4, 7)
        assert report.unmapped_count == 3
        assert len(report.unmapped_ivml) == 3
        assert all(a["P"] is False for a in report.unmapped_ivml)

    def test_optional_or_strict(self):
        model = parse_uvl(read_data("optional_or.uvl"))
        report = check_equivalence(model, *transform(model, STRICT))
        assert report.bijective
        assert (report.uvl_count, report.ivml_count) == (4, 4)

    def test_zero_variability(self):
        model = parse_text("features\n    A\n        mandatory\n            B\n")
        report = check_equivalence(model, *transform(model))
        assert report.bijective
        assert (report.uvl_count, report.ivml_count) == (1, 1)

    def test_invalid_images_are_reported(self):
        model = parse_uvl(read_data("optional_or.uvl"))
        project, bindings = transform(model)
        broken = IvmlProject(project.name, project.declarations + (ConstraintDecl(IvmlNot(VarRef("P"))),))
        report = check_equivalence(model, broken, bindings, OracleConfig(max_samples=2))
        assert not report.all_images_valid
        assert report.invalid_image_count == 3
        assert len(report.invalid_images) == 2
        rendered = report.render()
        assert "invalid images (3):" in rendered
        assert rendered.splitlines()[-1] == report.summary_line()

    def test_cap_from_config(self, onlineshop_model):
        with pytest.raises(EnumerationCapError):
            check_equivalence(onlineshop_model, *transform(onlineshop_model), OracleConfig(max_features=10))

    def test_flat_optional_group_streams(self):
        model = parse_text(group_model("optional", 12))
        report = check_equivalence(model, *transform(model, STRICT), OracleConfig(max_samples=1))
        assert report.bijective
        assert report.uvl_count == report.ivml_count == 2**12

    def test_samples_are_bounded_and_smallest(self):
        model = parse_uvl(read_data("optional_or.uvl"))
        full = check_equivalence(model, *transform(model))
        report = check_equivalence(model, *transform(model), OracleConfig(max_samples=1))
        assert report.unmapped_count == 3
        assert report.unmapped_ivml == full.unmapped_ivml[:1]

    def test_invalid_samples_follow_configuration_order(self):
        model = parse_text(group_model("optional", 4))
        project, bindings = transform(model, STRICT)
        broken = IvmlProject(project.name, project.declarations + (ConstraintDecl(IvmlNot(VarRef("C1"))),))
        report = check_equivalence(model, broken, bindings, OracleConfig(max_samples=2))
        assert report.invalid_image_count == 8
        assert [sorted(config.selected) for config, _ in report.invalid_images] == [["C1", "R"], ["C1", "C2", "R"]]


class TestAssignmentSpace:
    def test_index_matches_enumeration_order(self, onlineshop_ivml):
        compiled = CompiledProject(parse_ivml_subset(onlineshop_ivml))
        space = AssignmentSpace(compiled)
        valid = list(space.valid())
        assert len(valid) == ONLINESHOP_CONFIGURATIONS
        assert all(space.index(assignment) == code for code, assignment in valid)
        codes = [code for code, _ in valid]
        assert codes == sorted(codes)

    def test_value_outside_domain(self):
        model = parse_text(group_model("alternative", 2))
        compiled = CompiledProject(transform(model)[0])
        space = AssignmentSpace(compiled)
        bogus = IvmlAssignment.of({name: "nonsense" for name in space.names})
        with pytest.raises(MappingError):
            space.index(bogus)

    def test_cap(self, onlineshop_ivml):
        with pytest.raises(EnumerationCapError) as excinfo:
            AssignmentSpace(CompiledProject(parse_ivml_subset(onlineshop_ivml)), limit=1000)
        assert excinfo.value.cap == 1000
