"""
Test Suite for 4-PI Operators
Composition, adjoint and concatenation against pointwise application
"""

import numpy as np
import pytest
from scipy import integrate

from polynomials.poly_matrix import PolyMatrix
from operators.pi_operator import PIOperator, block_operator, blockdiag, hcat, vcat
from operators.rl2 import RL2Function, gauss_legendre, probe_basis
from operators.serialization import dumps, load_operators, loads, save_operators
from tests.conftest import random_operator

TOL = 1e-9
DIM_CHOICES = [(0, 1), (1, 0), (1, 1), (2, 1), (1, 2)]


def rl2_difference(f: RL2Function, g: RL2Function) -> float:
    """Relative max-norm difference on a Gauss grid."""
    nodes, _ = gauss_legendre(f.domain, 32)
    diffs = [np.max(np.abs(f.finite - g.finite), initial=0.0)]
    diffs.append(np.max(np.abs(f.values(nodes) - g.values(nodes)), initial=0.0))
    scale = max(1.0, np.max(np.abs(g.finite), initial=0.0), np.max(np.abs(g.values(nodes)), initial=0.0))
    return float(max(diffs) / scale)


def random_dims(rng):
    return DIM_CHOICES[rng.integers(len(DIM_CHOICES))]


def composition_case(rng) -> float:
    d0, d1, d2 = random_dims(rng), random_dims(rng), random_dims(rng)
    A = random_operator(rng, d1, d2)
    B = random_operator(rng, d0, d1)
    f = RL2Function.random(rng, *d0, degree=3)
    return rl2_difference((A @ B).apply(f), A.apply(B.apply(f)))


def adjoint_case(rng) -> float:
    d_in, d_out = random_dims(rng), random_dims(rng)
    A = random_operator(rng, d_in, d_out)
    f = RL2Function.random(rng, *d_in, degree=3)
    g = RL2Function.random(rng, *d_out, degree=3)
    lhs = g.inner(A.apply(f))
    rhs = A.adjoint().apply(g).inner(f)
    return abs(lhs - rhs) / max(1.0, abs(lhs))


def concatenation_case(rng) -> float:
    d_in, d_a, d_b = random_dims(rng), random_dims(rng), random_dims(rng)
    A = random_operator(rng, d_in, d_a)
    B = random_operator(rng, d_in, d_b)
    f = RL2Function.random(rng, *d_in, degree=3)
    top, bottom = vcat(A, B).apply(f).split(*d_a)
    error = max(rl2_difference(top, A.apply(f)), rl2_difference(bottom, B.apply(f)))
    C = random_operator(rng, d_b, d_a)
    g = RL2Function.random(rng, *d_b, degree=3)
    joined = hcat(A, C).apply(f.concat(g))
    return max(error, rl2_difference(joined, A.apply(f) + C.apply(g)))


# =============================================================================
# ALGEBRA ORACLES
# =============================================================================

@pytest.mark.parametrize("case", [composition_case, adjoint_case, concatenation_case])
def test_algebra_oracles_quick(case, rng):
    errors = [case(rng) for _ in range(10)]
    assert max(errors) <= TOL


@pytest.mark.slow
@pytest.mark.parametrize("case", [composition_case, adjoint_case, concatenation_case])
def test_algebra_oracles_full(case):
    rng = np.random.default_rng(7)
    errors = [case(rng) for _ in range(200)]
    assert max(errors) <= TOL


def test_composition_is_associative(rng):
    d = (1, 1)
    A, B, C = (random_operator(rng, d, d, degree=1) for _ in range(3))
    assert ((A @ B) @ C).allclose(A @ (B @ C), atol=1e-9)


def test_adjoint_is_involution(rng):
    A = random_operator(rng, (1, 2), (2, 1))
    assert A.adjoint().adjoint() == A


def test_composition_dimension_mismatch(rng):
    A = random_operator(rng, (1, 1), (1, 1))
    B = random_operator(rng, (1, 1), (2, 1))
    with pytest.raises(ValueError):
        A @ B


# =============================================================================
# CONSTRUCTORS AND APPLICATION
# =============================================================================

def test_identity_and_zero(rng):
    f = RL2Function.random(rng, 2, 1, degree=3)
    assert rl2_difference(PIOperator.identity(2, 1).apply(f), f) <= 1e-14
    image = PIOperator.zero((2, 1), (1, 2)).apply(f)
    assert (image.m, image.n) == (1, 2)
    assert image.norm() == 0.0


def test_matrix_operator_is_matrix():
    M = np.array([[1.0, 2.0], [3.0, 4.0]])
    op = PIOperator.matrix(M)
    assert op.is_matrix
    image = op.apply(RL2Function.make([1.0, -1.0]))
    np.testing.assert_allclose(image.finite, M @ [1.0, -1.0])


def test_volterra_against_quadrature():
    # (V f)(s) = int_0^s theta f(theta) dtheta with f = 1 + s
    V = PIOperator.build(R1=PolyMatrix.monomial(0, 1), dims_in=(0, 1), dims_out=(0, 1))
    image = V.apply(RL2Function.make(None, [[1.0, 1.0]]))
    for s in (0.25, 0.5, 1.0):
        expected, _ = integrate.quad(lambda t: t * (1.0 + t), 0.0, s)
        assert image.values(np.array([s]))[0, 0] == pytest.approx(expected, rel=1e-12)


def test_apply_on_grid_matches_apply(rng):
    A = random_operator(rng, (1, 2), (2, 1))
    f = RL2Function.random(rng, 1, 2, degree=4)
    exact = A.apply(f)
    finite, nodes, dist = A.apply_on_grid(f)
    np.testing.assert_allclose(finite, exact.finite, atol=1e-10)
    np.testing.assert_allclose(dist, exact.values(nodes), atol=1e-10)


def test_self_adjoint_detection(rng):
    A = random_operator(rng, (1, 1), (1, 1))
    assert (A + A.adjoint()).is_self_adjoint()
    assert not A.is_self_adjoint()


def test_block_operator_layout(rng):
    A = random_operator(rng, (1, 0), (1, 0))
    B = random_operator(rng, (0, 1), (1, 0))
    C = random_operator(rng, (1, 0), (0, 1))
    D = random_operator(rng, (0, 1), (0, 1))
    K = block_operator([[A, B], [C, D]])
    assert K.dims_in == (1, 1) and K.dims_out == (1, 1)
    f = RL2Function.random(rng, 1, 1, degree=2)
    x, g = f.split(1, 0)
    expected = (A.apply(x) + B.apply(g)).concat(C.apply(x) + D.apply(g))
    assert rl2_difference(K.apply(f), expected) <= TOL


def test_blockdiag(rng):
    A = random_operator(rng, (1, 1), (1, 1))
    B = random_operator(rng, (2, 0), (2, 0))
    D = blockdiag(A, B)
    assert D.dims_in == (3, 1)


def test_probe_basis_size():
    assert len(probe_basis(2, 3, 4)) == 2 + 3 * 5


# =============================================================================
# SERIALIZATION
# =============================================================================

def test_text_round_trip_is_exact(rng):
    A = random_operator(rng, (2, 1), (1, 2))
    assert loads(dumps(A)) == A


def test_bundle_round_trip(tmp_path, rng):
    A = random_operator(rng, (1, 1), (1, 1))
    path = save_operators(tmp_path / "bundle.json", {"A": A, "M": [[1.0, 2.0]]}, meta={"kind": "test"})
    items = load_operators(path)
    assert items["A"] == A
    assert items["M"] == [[1.0, 2.0]]
    assert items["__meta__"]["kind"] == "test"


def test_missing_bundle(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_operators(tmp_path / "missing.json")
