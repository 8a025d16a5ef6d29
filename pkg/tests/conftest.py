import numpy as np
import pytest

from moimpute.datasets import normalize
from moimpute.harness import load_dataset


@pytest.fixture(scope="session")
def iris():
    return load_dataset("iris")


@pytest.fixture(scope="session")
def iris_norm(iris):
    return normalize(iris)


@pytest.fixture(scope="session")
def sonar():
    return load_dataset("sonar")


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
