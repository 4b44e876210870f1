import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from convinv import HeisenbergModel, LocallyFiniteModel, ZdModel


@pytest.fixture(scope="session")
def z1():
    return ZdModel(1)


@pytest.fixture(scope="session")
def z2():
    return ZdModel(2)


@pytest.fixture(scope="session")
def heis():
    return HeisenbergModel()


@pytest.fixture(scope="session")
def lf():
    return LocallyFiniteModel()
