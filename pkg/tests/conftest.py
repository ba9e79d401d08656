import numpy as np
import pytest

import rfda
from rfda.processing import build_observing_matrix, canonical_grid

# desk-scale setup used across the unit tests (paper-scale runs live in
# test_acceptance.py)
N_DESK = 64
M_DESK = 32


@pytest.fixture(scope="session")
def cfg():
    return rfda.ArrayConfig(N_DESK, 0.025, 3.0e9, 1.0e6)


@pytest.fixture(scope="session")
def dist():
    return rfda.DiscreteUniform(M_DESK)


@pytest.fixture(scope="session")
def draw(cfg, dist):
    return rfda.sample_frequencies(dist, cfg.n_elements, 20240)


@pytest.fixture(scope="session")
def grid(cfg):
    return canonical_grid(cfg, M_DESK)


@pytest.fixture(scope="session")
def obs(cfg, draw, grid):
    return build_observing_matrix(cfg, draw, grid)


@pytest.fixture(scope="session")
def paper_cfg():
    return rfda.ArrayConfig(128, 0.025, 3.0e9, 1.0e6)
