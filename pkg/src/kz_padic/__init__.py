"""Exact-arithmetic toolkit for KZ-type systems modulo p**s.

Constructs the polynomial solutions coming from master-polynomial
coefficients, verifies them symbolically, relates multiplication by p to
Cartier-Manin matrices, and follows the solutions into an asymptotic zone
where their p-adic limits are explicit series.
"""

from .kz import KZInstance, kz_residue, omega, verify_master_identities, verify_solution
from .padic import PAdic, hensel_sqrt, teichmuller
from .sparsepoly import ModulusContext, Polynomial, PolyVector
from .solutions import (
    SolutionRecord,
    coefficient_vector,
    extract_solution,
    is_quasi_constant,
    leading_term_vector,
    master_polynomial,
    module_element,
    verify_shift_relation,
)

__version__ = "0.1.0"

__all__ = [
    "KZInstance",
    "ModulusContext",
    "PAdic",
    "Polynomial",
    "PolyVector",
    "SolutionRecord",
    "coefficient_vector",
    "extract_solution",
    "hensel_sqrt",
    "is_quasi_constant",
    "kz_residue",
    "leading_term_vector",
    "master_polynomial",
    "module_element",
    "omega",
    "teichmuller",
    "verify_master_identities",
    "verify_shift_relation",
    "verify_solution",
    "__version__",
]
