from pathlib import Path

import pytest

from dsl.parser import load_model

MODELS = Path(__file__).resolve().parent.parent / "models"

SIX_GAUSSIAN = """
noise U_Z ~ Normal(0, 1)
noise U_X ~ Normal(0, 1)
noise U_Y ~ Normal(0, 1)
var Z = U_Z
var X = Z + U_X
var Y = X + Z + U_Y
"""

# U_X on three equally likely atoms; U_Z, U_Y two atoms each
SIX_CATEGORICAL = """
noise U_Z ~ Categorical(1, 2, 0.5, 0.5)
noise U_X ~ Categorical(-1, 0, 1, 0.25, 0.5, 0.25)
noise U_Y ~ Categorical(0, 7, 0.5, 0.5)
var Z = U_Z
var X = Z + U_X
var Y = X + Z + U_Y
"""


def model_path(name: str) -> str:
    return str(MODELS / name)


@pytest.fixture
def example6():
    return load_model((MODELS / "example6.scm.txt").read_text())


@pytest.fixture
def six_gaussian():
    return load_model(SIX_GAUSSIAN)


@pytest.fixture
def six_categorical():
    return load_model(SIX_CATEGORICAL)


@pytest.fixture
def coins():
    return load_model((MODELS / "coins.scm.txt").read_text())


@pytest.fixture
def six_facts():
    return {"X": 1.0, "Y": 10.0, "Z": 2.0}
