"""Shared fixtures: random bounded test functions and cached chains."""

import numpy as np
import pytest

from copulab.core import FGM, MDensitySpec, make_m_copula
from copulab.perturbations import tilde
from copulab.simulate import sample_chain


def random_unit_function(rng, degree=4):
    """A random polynomial mapped to [eps, 1]: nonnegative with sup at most 1.

    The bilinear density family needs nonnegative ingredients for unit
    margins, and variant 1 additionally needs sup h <= 1 for nonnegativity.
    """
    coeffs = rng.uniform(-1.0, 1.0, degree + 1)
    p = np.polynomial.Polynomial(coeffs)
    grid = np.linspace(0.0, 1.0, 2001)
    vals = p(grid)
    shifted = p - vals.min() + 0.05
    return shifted / (vals.max() - vals.min() + 0.05)


@pytest.fixture(scope="session")
def random_hg_pairs():
    rng = np.random.default_rng(20240817)
    return [(random_unit_function(rng), random_unit_function(rng)) for _ in range(5)]


@pytest.fixture(scope="session")
def m1_model():
    return make_m_copula(MDensitySpec(h=lambda x: x, g=lambda x: x, variant=1))


@pytest.fixture(scope="session")
def fgm1_chain():
    return sample_chain(FGM(1.0), 100_000, seed=42)


@pytest.fixture(scope="session")
def tilde_fgm_chain():
    return sample_chain(tilde(FGM(0.8), 0.5), 200_000, seed=202)
