import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import numpy as np
import pytest

from cmiflow import _kernels_numba


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # compile the jitted kernels once up front so individual tests stay fast
    _kernels_numba.warmup()


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
