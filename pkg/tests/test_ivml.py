"""Tests for the IVML core: emission, invariant checks and the subset parser."""

import pytest

from conftest import read_data
from uvl2ivml.errors import IvmlModelError, IvmlSyntaxError, UnsupportedConstructError
from uvl2ivml.ivml import (
    BOOLEAN,
    FALSE,
    TRUE,
    ConstraintDecl,
    EnumDef,
    EnumLiteral,
    IvmlBinary,
    IvmlCall,
    IvmlConst,
    IvmlNot,
    IvmlOperator,
    IvmlProject,
    TypeKind,
    VarDecl,
    VarRef,
    check_project,
    emit_ivml,
    enum_type,
    format_expression,
    parse_ivml_subset,
    set_type,
)


def includes(set_name: str, enum: str, literal: str) -> IvmlCall:
    return IvmlCall("includes", (VarRef(set_name), EnumLiteral(enum, literal)))


A, B, C = VarRef("A"), VarRef("B"), VarRef("C")


class TestEmit:
    def test_empty_project(self):
        assert emit_ivml(IvmlProject("Empty")) == "project Empty {\n}\n"

    def test_declarations(self):
        project = IvmlProject(
            "P",
            (
                EnumDef("ColorTypes", ("Red", "Green")),
                VarDecl("Color", enum_type("ColorTypes")),
                VarDecl("Colors", set_type("ColorTypes")),
                VarDecl("Flag", BOOLEAN),
                ConstraintDecl(IvmlCall("isDefined", (VarRef("Color"),))),
            ),
        )
        assert emit_ivml(project) == (
            "project P {\n"
            "    enum ColorTypes {Red, Green};\n"
            "    ColorTypes Color;\n"
            "    setOf(ColorTypes) Colors;\n"
            "    Boolean Flag;\n"
            "    isDefined(Color);\n"
            "}\n"
        )

    def test_negated_includes_uses_not_equal_true(self):
        expr = IvmlBinary(
            IvmlOperator.IMPLIES,
            includes("S", "E", "X"),
            IvmlNot(includes("S", "E", "Y")),
        )
        assert format_expression(expr) == "includes(S, E.X) implies (includes(S, E.Y) <> true)"

    @pytest.mark.parametrize(
        "expr, text",
        [
            (IvmlNot(A), "not A"),
            (IvmlNot(IvmlBinary(IvmlOperator.AND, A, B)), "not (A and B)"),
            (IvmlBinary(IvmlOperator.AND, IvmlBinary(IvmlOperator.OR, A, B), C), "(A or B) and C"),
            (IvmlBinary(IvmlOperator.OR, A, IvmlBinary(IvmlOperator.AND, B, C)), "A or B and C"),
            (IvmlBinary(IvmlOperator.IMPLIES, A, IvmlBinary(IvmlOperator.OR, B, C)), "A implies (B or C)"),
            (IvmlBinary(IvmlOperator.IMPLIES, IvmlBinary(IvmlOperator.IMPLIES, A, B), C), "(A implies B) implies C"),
            (IvmlBinary(IvmlOperator.IFF, A, IvmlBinary(IvmlOperator.IFF, B, C)), "A iff (B iff C)"),
            (
                IvmlBinary(IvmlOperator.GE, IvmlCall("size", (VarRef("S"),)), IvmlConst(2)),
                "size(S) >= 2",
            ),
            (
                IvmlBinary(
                    IvmlOperator.MUL, IvmlBinary(IvmlOperator.ADD, VarRef("N"), IvmlConst(1)), IvmlConst(2)
                ),
                "(N + 1) * 2",
            ),
            (
                IvmlBinary(
                    IvmlOperator.SUB, VarRef("N"), IvmlBinary(IvmlOperator.SUB, VarRef("M"), IvmlConst(1))
                ),
                "N - (M - 1)",
            ),
            (IvmlBinary(IvmlOperator.EQ, VarRef("S"), IvmlConst('a "b"')), 'S == "a \\"b\\""'),
            (IvmlBinary(IvmlOperator.LT, VarRef("R"), IvmlConst(2.5)), "R < 2.5"),
            (IvmlBinary(IvmlOperator.LT, VarRef("R"), IvmlConst(1e20)), "R < 100000000000000000000.0"),
            (IvmlBinary(IvmlOperator.GT, VarRef("R"), IvmlConst(1e-7)), "R > 0.0000001"),
            (FALSE, "false"),
        ],
    )
    def test_format_expression(self, expr, text):
        assert format_expression(expr) == text

    def test_emit_rejects_broken_project(self):
        project = IvmlProject("P", (ConstraintDecl(VarRef("Missing")),))
        with pytest.raises(IvmlModelError) as excinfo:
            emit_ivml(project)
        assert "Missing" in str(excinfo.value)


class TestCheckProject:
    def test_golden_is_well_formed(self, onlineshop_ivml):
        assert check_project(parse_ivml_subset(onlineshop_ivml)) == []

    def test_duplicate_declaration(self):
        project = IvmlProject("P", (VarDecl("A", BOOLEAN), VarDecl("A", BOOLEAN)))
        assert check_project(project) == ["duplicate declaration 'A'"]

    def test_enum_problems(self):
        project = IvmlProject("P", (EnumDef("E", ()), EnumDef("F", ("X", "X"))))
        assert check_project(project) == ["enum 'E' has no literals", "enum 'F' has duplicate literals"]

    def test_dangling_enum_type(self):
        project = IvmlProject("P", (VarDecl("S", set_type("Nope")),))
        assert check_project(project) == ["variable 'S' uses undeclared enum 'Nope'"]

    def test_bad_literal(self):
        project = IvmlProject(
            "P",
            (
                EnumDef("E", ("X",)),
                VarDecl("S", set_type("E")),
                ConstraintDecl(includes("S", "E", "Y")),
            ),
        )
        assert check_project(project) == ["'Y' is not a literal of enum 'E'"]

    def test_includes_on_boolean(self):
        project = IvmlProject(
            "P",
            (EnumDef("E", ("X",)), VarDecl("A", BOOLEAN), ConstraintDecl(includes("A", "E", "X"))),
        )
        assert check_project(project) == ["includes() expects a setOf variable as first argument"]

    def test_size_on_enum_instance(self):
        project = IvmlProject(
            "P",
            (
                EnumDef("E", ("X",)),
                VarDecl("I", enum_type("E")),
                ConstraintDecl(IvmlBinary(IvmlOperator.GE, IvmlCall("size", (VarRef("I"),)), IvmlConst(1))),
            ),
        )
        assert check_project(project) == ["size() expects a setOf or String variable"]


class TestParse:
    def test_golden_structure(self, onlineshop_ivml):
        project = parse_ivml_subset(onlineshop_ivml)
        assert project.name == "OnlineShop"
        assert len(project.enums()) == 4
        variables = project.variables()
        assert sum(1 for v in variables.values() if v.type.kind is TypeKind.SET) == 3
        assert sum(1 for v in variables.values() if v.type.kind is TypeKind.ENUM) == 1
        assert sum(1 for v in variables.values() if v.type.kind is TypeKind.BOOLEAN) == 4
        assert len(project.constraints()) == 8

    def test_golden_negation_is_normalized(self, onlineshop_ivml):
        constraints = parse_ivml_subset(onlineshop_ivml).constraints()
        assert constraints[-2] == IvmlBinary(
            IvmlOperator.IMPLIES,
            includes("UserManagement", "UserManagementOptions", "Payments"),
            IvmlNot(includes("UserManagement", "UserManagementOptions", "Security")),
        )

    def test_golden_round_trip(self, onlineshop_ivml):
        project = parse_ivml_subset(onlineshop_ivml)
        assert emit_ivml(project) == onlineshop_ivml
        assert parse_ivml_subset(emit_ivml(project)) == project

    def test_comments_are_ignored(self):
        project = parse_ivml_subset("// header\nproject P { /* block */ Boolean A; A or true; }")
        assert project == IvmlProject(
            "P", (VarDecl("A", BOOLEAN), ConstraintDecl(IvmlBinary(IvmlOperator.OR, A, TRUE)))
        )

    def test_not_equal_other_than_true_is_kept(self):
        project = parse_ivml_subset("project P { Integer N; N <> 3; }")
        assert project.constraints() == [IvmlBinary(IvmlOperator.NE, VarRef("N"), IvmlConst(3))]

    def test_unsupported_construct(self):
        with pytest.raises(UnsupportedConstructError) as excinfo:
            parse_ivml_subset(read_data("unsupported.ivml"), "unsupported.ivml")
        assert excinfo.value.construct == "compound"
        assert excinfo.value.diagnostic.location is not None
        assert excinfo.value.diagnostic.location.line == 2

    @pytest.mark.parametrize("keyword", ["typedef", "assign", "conflicts", "import", "freeze"])
    def test_other_unsupported_keywords(self, keyword):
        with pytest.raises(UnsupportedConstructError):
            parse_ivml_subset(f"project P {{ {keyword} X; }}")

    def test_syntax_error(self):
        with pytest.raises(IvmlSyntaxError) as excinfo:
            parse_ivml_subset("project P {\n    Boolean A\n}\n", "broken.ivml")
        assert not isinstance(excinfo.value, UnsupportedConstructError)
        assert excinfo.value.diagnostic.location is not None
        assert excinfo.value.diagnostic.location.line == 3

    def test_bad_character(self):
        with pytest.raises(IvmlSyntaxError):
            parse_ivml_subset("project P { Boolean A; A # B; }")
