from __future__ import annotations

import pathlib
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))

from fpslopes import load_model, lower_to_program

DOCS = pathlib.Path(__file__).resolve().parents[1] / "docs"


@pytest.fixture(scope="session")
def filter_model():
    return load_model(str(DOCS / "filter.fps"))


@pytest.fixture(scope="session")
def filter_program(filter_model):
    return lower_to_program(filter_model)


@pytest.fixture(scope="session")
def newton_model():
    return load_model(str(DOCS / "newton.fps"))


@pytest.fixture(scope="session")
def newton_program(newton_model):
    return lower_to_program(newton_model)


@pytest.fixture(scope="session")
def sums_model():
    return load_model(str(DOCS / "sums.fps"))


@pytest.fixture(scope="session")
def sums_program(sums_model):
    return lower_to_program(sums_model)
