"""
Polynomials package
Polynomial matrices in s or (s, theta) over a fixed interval
"""

from polynomials.poly_matrix import (
    PolyMatrix,
    MAX_DEGREE,
    add,
    mul,
    integrate,
    integrate_product,
    substitute,
    evaluate,
    transpose,
    hstack,
    vstack,
)

__all__ = [
    "PolyMatrix",
    "MAX_DEGREE",
    "add",
    "mul",
    "integrate",
    "integrate_product",
    "substitute",
    "evaluate",
    "transpose",
    "hstack",
    "vstack",
]
