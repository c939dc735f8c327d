import numpy as np
import pytest

from semipert.funcspace import from_grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_nonneg_grid_function(rng, lo=-4.0, hi=4.0, n_nodes=7, scale=3.0):
    nodes = np.unique(np.sort(rng.uniform(lo, hi, n_nodes)))
    while nodes.size < 2:
        nodes = np.unique(np.sort(rng.uniform(lo, hi, n_nodes)))
    values = rng.uniform(0.0, scale, nodes.size)
    return from_grid(nodes, values)
