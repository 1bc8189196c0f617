import numpy as np
import pytest

from rkhsbvp.bench import builtin_example
from rkhsbvp.kernel import default_kernel
from rkhsbvp.problem import homogenize


@pytest.fixture(scope="session")
def K():
    return default_kernel()


@pytest.fixture(scope="session")
def h41():
    return homogenize(builtin_example("4.1"))
