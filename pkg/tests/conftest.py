import re
from pathlib import Path
from typing import List

import pytest

from uvl2ivml.transformer import NamingMode, TransformMode, TransformOptions
from uvl2ivml.uvl import UvlModel, parse_uvl


DATA_DIR = Path(__file__).parent / "data"

# Count of valid Onlineshop configurations, checked by hand:
# Payment 2, Categories 2, Newsletter 2, Review 4, Platform 7,
# Sort/Search/UserManagement under the cross-tree constraints 19.
ONLINESHOP_CONFIGURATIONS = 4256

_TOKEN = re.compile(r"[A-Za-z_][A-Za-z0-9_]*|[0-9]+|<>|>=|<=|==|\S")


def tokens(text: str) -> List[str]:
    return _TOKEN.findall(text)


def read_data(name: str) -> str:
    return (DATA_DIR / name).read_text(encoding="utf-8")


def parse_text(text: str) -> UvlModel:
    return parse_uvl(text if text.endswith("\n") else text + "\n")


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def onlineshop_uvl() -> str:
    return read_data("onlineshop.uvl")


@pytest.fixture
def onlineshop_ivml() -> str:
    return read_data("onlineshop.ivml")


@pytest.fixture
def onlineshop_model(onlineshop_uvl: str) -> UvlModel:
    return parse_uvl(onlineshop_uvl, "onlineshop.uvl")


@pytest.fixture
def golden_options() -> TransformOptions:
    """Options that reproduce the hand-written Onlineshop IVML project."""
    return TransformOptions(
        mode=TransformMode.FAITHFUL,
        naming=NamingMode.PRETTY,
        project_name="OnlineShop",
        enum_names={"Platform": "PlatformType"},
    )
