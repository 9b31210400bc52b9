"""Product-formula and multi-product-formula simulation bounds.

Symbolic Pauli algebra, grouped lattice Hamiltonians, Trotter product
formulas of arbitrary even order, effective-generator (BCH) coefficients,
nested-commutator sums, Richardson-style multi-product combinations, and the
closed-form step-count / error budgets that tie them together, all verified
against a dense backend at small size.
"""

from .pauli import PauliSum, PauliTerm

__all__ = ["PauliSum", "PauliTerm"]
__version__ = "0.1.0"
