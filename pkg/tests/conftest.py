import os
import sys

import numpy as np
import pytest

# Ensure the project root is on the module search path when the package is not
# installed. This allows ``import discord_recall`` to succeed during test
# collection without requiring an editable installation.
ROOT_DIR = os.path.dirname(os.path.dirname(__file__))
if ROOT_DIR not in sys.path:
    sys.path.insert(0, ROOT_DIR)

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(1))


@pytest.fixture
def data_path():
    def _path(name: str) -> str:
        return os.path.join(DATA_DIR, name)

    return _path
