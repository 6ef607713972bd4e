import numpy as np
import pandas as pd
import pytest

from youden_gibbs.core import COVARIATE, Dataset


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def separable_two_class():
    return Dataset(x=[1.0, 2.0, 3.0, 4.0], y=[1, 1, 2, 2])


@pytest.fixture
def three_class(rng):
    """Gamma classes shaped like the first multiclass scenario, 40 per class"""
    x = np.concatenate([rng.gamma(2.0, 1.0, 40), rng.gamma(3.0, 1.0, 40), rng.gamma(5.0, 2.0, 40)])
    y = np.repeat([1, 2, 3], 40)
    return Dataset(x=x, y=y)


@pytest.fixture
def separable_covariate(rng):
    """Healthy below z - 0.5, diseased above it"""
    z = rng.uniform(0, 1, 60)
    y = np.repeat([-1, 1], 30)
    x = np.where(y == 1, z + rng.uniform(0.5, 1.5, 60), z - rng.uniform(0.5, 1.5, 60) - 1.0)
    return Dataset(x=x, y=y, z=z, kind=COVARIATE)


@pytest.fixture
def write_table(tmp_path):
    def _write(frame: pd.DataFrame, name: str = "data.csv"):
        path = tmp_path / name
        frame.to_csv(path, index=False)
        return path
    return _write
