"""
Positive Operator Parameterization
Basis operator Z for positive 4-PI operators of the form Z* M Z with M PSD
"""

import math
from typing import List, Sequence, Tuple

import numpy as np

from polynomials.poly_matrix import PolyMatrix
from operators.pi_operator import PIOperator


def monomials_1d(degree: int) -> List[Tuple[int, int]]:
    """Exponents s^0 .. s^degree."""
    return [(i, 0) for i in range(degree + 1)]


def monomials_2d(degree: int) -> List[Tuple[int, int]]:
    """Exponents s^i theta^j with i + j <= degree."""
    return [(i, j) for i in range(degree + 1) for j in range(degree + 1 - i)]


def basis_size(m: int, n: int, degree: int) -> int:
    """Number of rows of Z, i.e. the size of the PSD matrix M."""
    if n == 0:
        return m
    return m + n * len(monomials_1d(degree)) + 2 * n * len(monomials_2d(degree))


def _stacked_monomials(exponents: Sequence[Tuple[int, int]], n: int, domain) -> PolyMatrix:
    """Column of monomials, Kronecker with I_n: rows k*n..(k+1)*n carry x^e_k I_n."""
    rows = len(exponents) * n
    coeffs = {}
    for k, key in enumerate(exponents):
        block = np.zeros((rows, n))
        block[k * n:(k + 1) * n, :] = np.eye(n)
        coeffs[key] = block
    return PolyMatrix(rows, n, coeffs, domain)


def positive_basis(m: int, n: int, degree: int, domain: Sequence[float] = (0.0, 1.0)) -> PIOperator:
    """
    Operator Z : R^m x L2^n -> L2^q such that <f, Z* M Z f> = <Z f, M Z f> >= 0
    for every PSD M.

    Rows of Z f(s), top to bottom:
        x / sqrt(b - a)
        U(s) (x) f(s)                   with U = [1, s, ..., s^d]
        int_a^s V(s, th) (x) f(th) dth  with V = monomials of total degree <= d
        int_s^b V(s, th) (x) f(th) dth
    """
    a, b = float(domain[0]), float(domain[1])
    q = basis_size(m, n, degree)
    top = np.eye(m) / math.sqrt(b - a)
    if n == 0:
        return PIOperator.build(Q2=PolyMatrix.constant(top, domain, "s"), dims_in=(m, 0), dims_out=(0, q), domain=domain)

    n_u = n * len(monomials_1d(degree))
    n_v = n * len(monomials_2d(degree))
    U = _stacked_monomials(monomials_1d(degree), n, domain)
    V = _stacked_monomials(monomials_2d(degree), n, domain)

    Q2 = np.zeros((q, m))
    Q2[:m, :] = top

    def place(block: PolyMatrix, offset: int) -> PolyMatrix:
        coeffs = {}
        for key, value in block.blocks.items():
            full = np.zeros((q, n))
            full[offset:offset + block.rows, :] = value[:, :, 0]
            coeffs[key] = full
        return PolyMatrix(q, n, coeffs, domain)

    return PIOperator.build(
        Q2=PolyMatrix.constant(Q2, domain, "s"),
        R0=place(U, m),
        R1=place(V, m + n_u).with_vars("st"),
        R2=place(V, m + n_u + n_v).with_vars("st"),
        dims_in=(m, n),
        dims_out=(0, q),
        domain=domain,
    )


def positive_operator(M: PolyMatrix, m: int, n: int, degree: int, domain: Sequence[float] = (0.0, 1.0)) -> PIOperator:
    """Z* M Z for a (possibly decision-dependent) symmetric matrix M."""
    Z = positive_basis(m, n, degree, domain)
    q = Z.dims_out[1]
    if M.shape != (q, q):
        raise ValueError(f"M has shape {M.shape}, expected ({q}, {q})")
    M_op = PIOperator.multiplier(M.with_vars("s"))
    return Z.adjoint() @ (M_op @ Z)


def _relocate(block: np.ndarray, ids: np.ndarray, n_terms: int) -> np.ndarray:
    """Move local affine terms 1..k to global positions 1 + ids."""
    out = np.zeros(block.shape[:2] + (n_terms,))
    out[:, :, 0] = block[:, :, 0]
    k = min(block.shape[2] - 1, ids.size)
    out[:, :, 1 + ids[:k]] = block[:, :, 1:1 + k]
    return out


def positive_operator_from_index(
    index_map: np.ndarray,
    n_terms: int,
    m: int,
    n: int,
    degree: int,
    domain: Sequence[float] = (0.0, 1.0),
    chunk: int = 256,
) -> PIOperator:
    """
    Z* M Z where M[i, j] is the decision variable index_map[i, j].

    The sandwich is assembled in chunks of variables so that the affine axis
    of intermediate products stays small; each chunk is then placed at its
    global variable positions in an affine axis of length n_terms.
    """
    Z = positive_basis(m, n, degree, domain)
    Z_star = Z.adjoint()
    q = Z.dims_out[1]
    if index_map.shape != (q, q):
        raise ValueError(f"Index map has shape {index_map.shape}, expected ({q}, {q})")
    rows, cols = np.triu_indices(q)
    var_ids = index_map[rows, cols]
    total = None
    for start in range(0, var_ids.size, chunk):
        r, c = rows[start:start + chunk], cols[start:start + chunk]
        ids = var_ids[start:start + chunk]
        local = np.zeros((q, q, 1 + ids.size))
        local[r, c, 1 + np.arange(ids.size)] = 1.0
        local[c, r, 1 + np.arange(ids.size)] = 1.0
        M = PolyMatrix(q, q, {(0, 0): local}, domain, "s")
        part = Z_star @ (PIOperator.multiplier(M) @ Z)
        part = part.map_blocks(
            lambda poly: PolyMatrix(
                poly.rows, poly.cols,
                {key: _relocate(blk, ids, n_terms) for key, blk in poly.blocks.items()},
                poly.domain, poly.vars,
            )
        )
        total = part if total is None else total + part
    return total
