"""Tests for the uvl2ivml command line."""

import shutil

import pytest

from conftest import ONLINESHOP_CONFIGURATIONS, read_data
from uvl2ivml.cli import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, main


@pytest.fixture(autouse=True)
def isolated_env(tmp_path, monkeypatch):
    """Run every command from an empty directory with no oracle overrides."""
    monkeypatch.chdir(tmp_path)
    for name in ("UVL2IVML_CAP", "UVL2IVML_ASSIGNMENT_CAP", "UVL2IVML_SAMPLES", "DEBUG", "UVL2IVML_DEBUG"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def data(data_dir, tmp_path):
    """Copy a data file into the working directory and return its path."""

    def copy(name: str) -> str:
        target = tmp_path / name
        shutil.copy(data_dir / name, target)
        return str(target)

    return copy


class TestTransform:
    def test_pretty_golden_file(self, data, tmp_path):
        output = tmp_path / "out.ivml"
        code = main(
            [
                "transform", data("onlineshop.uvl"), "-o", str(output),
                "--naming", "pretty", "--project-name", "OnlineShop", "--enum-name", "Platform=PlatformType",
            ]
        )
        assert code == EXIT_OK
        assert output.read_text(encoding="utf-8") == read_data("onlineshop.ivml")

    def test_standard_output(self, data, capsys):
        assert main(["transform", data("optional_or.uvl"), "-o", "-"]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("project R {")
        assert "setOf(P__ENUM__1) P__SET__1__INSTANCE;" in out

    def test_output_is_required(self, data, capsys):
        assert main(["transform", data("onlineshop.uvl")]) == EXIT_USAGE
        assert "-o/--output" in capsys.readouterr().err

    def test_missing_input(self, tmp_path):
        assert main(["transform", str(tmp_path / "nope.uvl"), "-o", "-"]) == EXIT_USAGE

    def test_duplicate_names_fail_without_output(self, data, tmp_path, capsys):
        output = tmp_path / "dup.ivml"
        assert main(["transform", data("dup_names.uvl"), "-o", str(output)]) == EXIT_FAILURE
        assert not output.exists()
        assert "duplicate feature name 'A'" in capsys.readouterr().err

    def test_syntax_error_is_located(self, data, capsys):
        assert main(["transform", data("garbage.uvl"), "-o", "-"]) == EXIT_FAILURE
        err = capsys.readouterr().err
        assert "garbage.uvl:7:" in err

    def test_failure_keeps_previous_output(self, data, tmp_path):
        output = tmp_path / "keep.ivml"
        output.write_text("previous\n", encoding="utf-8")
        assert main(["transform", data("dup_names.uvl"), "-o", str(output)]) == EXIT_FAILURE
        assert output.read_text(encoding="utf-8") == "previous\n"
        assert [p.name for p in tmp_path.iterdir() if p.name.startswith(".keep.ivml.")] == []

    def test_bad_enum_name_flag(self, data):
        assert main(["transform", data("onlineshop.uvl"), "-o", "-", "--enum-name", "Platform"]) == EXIT_USAGE

    def test_bad_project_name(self, data, capsys):
        assert main(["transform", data("onlineshop.uvl"), "-o", "-", "--project-name", "1abc"]) == EXIT_USAGE

    def test_input_that_is_not_utf8(self, tmp_path, capsys):
        path = tmp_path / "latin.uvl"
        path.write_bytes(b"features\n    R\xff\n")
        assert main(["transform", str(path), "-o", "-"]) == EXIT_USAGE
        assert "cannot read" in capsys.readouterr().err


class TestCheck:
    def test_onlineshop_strict(self, data, capsys):
        assert main(["check", data("onlineshop.uvl"), "--mode", "strict"]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.strip() == (
            f"EQUIV uvl={ONLINESHOP_CONFIGURATIONS} ivml={ONLINESHOP_CONFIGURATIONS} bijective=true"
        )

    def test_default_mode_is_strict(self, data, capsys):
        assert main(["check", data("optional_or.uvl")]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "EQUIV uvl=4 ivml=4 bijective=true"

    def test_faithful_passes_on_valid_images(self, data, capsys):
        assert main(["check", data("optional_or.uvl"), "--mode", "faithful"]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "EQUIV uvl=4 ivml=7 bijective=false"

    def test_verbose_report(self, data, capsys):
        assert main(["check", data("optional_or.uvl"), "--mode", "faithful", "-v"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "unmapped IVML assignments (3):" in out
        assert out.strip().splitlines()[-1] == "EQUIV uvl=4 ivml=7 bijective=false"

    def test_cap_exceeded(self, data, capsys):
        assert main(["check", data("huge.uvl")]) == EXIT_USAGE
        assert "exceeds the enumeration cap of 24" in capsys.readouterr().err

    def test_cap_flag(self, data):
        assert main(["check", data("onlineshop.uvl"), "--cap", "10"]) == EXIT_USAGE

    def test_cap_from_environment(self, data, monkeypatch):
        monkeypatch.setenv("UVL2IVML_CAP", "10")
        assert main(["check", data("onlineshop.uvl")]) == EXIT_USAGE

    def test_cap_flag_overrides_environment(self, data, monkeypatch):
        monkeypatch.setenv("UVL2IVML_CAP", "10")
        assert main(["check", data("onlineshop.uvl"), "--cap", "16"]) == EXIT_OK

    def test_invalid_cap(self, data):
        assert main(["check", data("onlineshop.uvl"), "--cap", "0"]) == EXIT_USAGE

    def test_invalid_cap_in_environment(self, data, monkeypatch, capsys):
        monkeypatch.setenv("UVL2IVML_CAP", "many")
        assert main(["check", data("onlineshop.uvl")]) == EXIT_USAGE
        assert "Configuration error" in capsys.readouterr().err

    def test_typed_model(self, tmp_path, capsys):
        path = tmp_path / "typed.uvl"
        path.write_text("features\n    R\n        optional\n            Integer N\n", encoding="utf-8")
        assert main(["check", str(path)]) == EXIT_USAGE
        assert "boolean-level" in capsys.readouterr().err

    def test_input_that_is_not_utf8(self, tmp_path, capsys):
        path = tmp_path / "latin.uvl"
        path.write_bytes(b"features\n    R\xff\n")
        assert main(["check", str(path)]) == EXIT_USAGE
        assert "cannot read" in capsys.readouterr().err


class TestValidate:
    @pytest.mark.parametrize("name", ["onlineshop.uvl", "onlineshop.ivml"])
    def test_golden_files_are_valid(self, data, name):
        assert main(["validate", data(name)]) == EXIT_OK

    def test_garbage(self, data, capsys):
        assert main(["validate", data("garbage.uvl")]) == EXIT_FAILURE
        assert "garbage.uvl:7:" in capsys.readouterr().err

    def test_unsupported_ivml(self, data, capsys):
        assert main(["validate", data("unsupported.ivml")]) == EXIT_FAILURE
        assert "compound" in capsys.readouterr().err

    def test_unknown_extension(self, data, tmp_path):
        path = tmp_path / "model.txt"
        shutil.copy(data("onlineshop.uvl"), path)
        assert main(["validate", str(path)]) == EXIT_USAGE
        assert main(["validate", str(path), "--lang", "uvl"]) == EXIT_OK

    def test_single_child_or_group_only_warns(self, tmp_path, capsys):
        path = tmp_path / "warn.uvl"
        path.write_text("features\n    R\n        or\n            A\n", encoding="utf-8")
        assert main(["validate", str(path)]) == EXIT_OK
        assert "warning" in capsys.readouterr().err

    def test_input_that_is_not_utf8(self, tmp_path, capsys):
        path = tmp_path / "latin.uvl"
        path.write_bytes(b"features\n    R\xff\n")
        assert main(["validate", str(path)]) == EXIT_USAGE
        assert "cannot read" in capsys.readouterr().err


def test_version(capsys):
    assert main(["--version"]) == EXIT_OK
    assert "0.1.0" in capsys.readouterr().out


def test_missing_subcommand():
    assert main([]) == EXIT_USAGE
