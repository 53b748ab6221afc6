"""
PI operator algebra
"""

from operators.rl2 import RL2Function, gauss_legendre, legendre_polynomial, probe_basis
from operators.pi_operator import (
    PIOperator,
    apply,
    compose,
    add,
    scale,
    negate,
    adjoint,
    vcat,
    hcat,
    blockdiag,
    block_operator,
)
from operators.inversion import (
    InversionError,
    InversionResult,
    invert_pi,
    invert_pi_with_residual,
    inversion_residual,
)

__all__ = [
    "RL2Function",
    "gauss_legendre",
    "legendre_polynomial",
    "probe_basis",
    "PIOperator",
    "apply",
    "compose",
    "add",
    "scale",
    "negate",
    "adjoint",
    "vcat",
    "hcat",
    "blockdiag",
    "block_operator",
    "InversionError",
    "InversionResult",
    "invert_pi",
    "invert_pi_with_residual",
    "inversion_residual",
]
