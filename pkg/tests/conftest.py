import numpy as np
import pytest

from antizeno import build_chain


@pytest.fixture
def two_site_disordered():
    """Two-site model with eps=10v, kappa=0.5v, Gamma=0.001v."""
    return build_chain(2, [10.0, 0.0], v=1.0, trap_rate=0.5, decay_rate=0.001)


@pytest.fixture
def resonant_dimer():
    return build_chain(2, [0.0, 0.0], v=1.0, trap_rate=0.0, decay_rate=0.0)


@pytest.fixture
def three_site_degenerate():
    """Three-site chain with eps_1 = eps_3 = v, eps_2 = 10v, excitation at site 2."""
    return build_chain(3, [1.0, 10.0, 1.0], v=1.0, trap_rate=0.0, decay_rate=0.0, initial_site=2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
