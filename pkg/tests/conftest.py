"""
Shared fixtures: seeded generators, random operators and preset systems
"""

import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

import numpy as np
import pytest

from polynomials.poly_matrix import PolyMatrix
from operators.pi_operator import PIOperator
from pie.examples import (
    example_euler_bernoulli,
    example_ode_estimator,
    example_ode_test,
    example_ode_two_input,
    example_reaction_diffusion,
)

DOMAIN = (0.0, 1.0)


def random_poly(rng, rows, cols, degree, vars="s", domain=DOMAIN):
    """Random polynomial matrix in s (or in s and theta)."""
    if vars == "st":
        keys = [(i, j) for i in range(degree + 1) for j in range(degree + 1 - i)]
    elif vars == "s":
        keys = [(i, 0) for i in range(degree + 1)]
    else:
        keys = [(0, 0)]
    coeffs = {key: rng.standard_normal((rows, cols)) for key in keys}
    return PolyMatrix(rows, cols, coeffs, domain, vars)


def random_operator(rng, dims_in, dims_out, degree=2, domain=DOMAIN):
    """Random 4-PI operator with every block populated."""
    (m1, n1), (m2, n2) = dims_in, dims_out
    return PIOperator(
        dims_in, dims_out, domain,
        rng.standard_normal((m2, m1)),
        random_poly(rng, m2, n1, degree, "s", domain),
        random_poly(rng, n2, m1, degree, "s", domain),
        random_poly(rng, n2, n1, degree, "s", domain),
        random_poly(rng, n2, n1, degree, "st", domain),
        random_poly(rng, n2, n1, degree, "st", domain),
    )


# =============================================================================
# TEST FIXTURES
# =============================================================================

@pytest.fixture
def rng():
    """Seeded generator so randomized checks are reproducible."""
    return np.random.default_rng(20240611)


@pytest.fixture
def ode_test():
    return example_ode_test()


@pytest.fixture
def ode_estimator():
    return example_ode_estimator()


@pytest.fixture
def ode_two_input():
    return example_ode_two_input()


@pytest.fixture
def reaction_diffusion():
    return example_reaction_diffusion()


@pytest.fixture
def beam():
    return example_euler_bernoulli()
