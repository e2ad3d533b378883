"""Pauli strings and Clifford tableaus: the computational substrate.

Run: python demos/01_pauli_algebra.py
"""

import numpy as np

from logacc import CliffordTableau, PauliString, multiply, random_pauli, symplectic_product

# ── Paulis in binary symplectic form ────────────────────────────────

x = PauliString.from_label("+XIZ")
y = PauliString.from_label("-YZI")
print("operators:", x, "and", y)
print("weights:", x.weight, y.weight, "supports:", x.support, y.support)

# the symplectic product is 0 for commuting pairs, 1 for anticommuting
print("symplectic product:", symplectic_product(x, y))
prod = multiply(x, y)
print("product:", prod, "(sign tracked exactly)" if prod.is_hermitian else "(transient phase)")

# ── Conjugation through Clifford circuits ───────────────────────────

tableau = CliffordTableau.from_gates(3, [("H", (0,)), ("CNOT", (0, 1)), ("S", (2,))])
p = PauliString.from_label("+ZIX")
print("\nconjugating", p, "through H(0), CNOT(0,1), S(2):")
print("  ->", tableau.conjugate(p))
print("inverse undoes it:", tableau.then(tableau.inverse()).conjugate(p))

# commutation relations survive any Clifford conjugation
rng = np.random.default_rng(7)
a, b = random_pauli(3, range(3), rng), random_pauli(3, range(3), rng)
print(
    "\nsymplectic product preserved under conjugation:",
    symplectic_product(a, b)
    == symplectic_product(tableau.conjugate(a), tableau.conjugate(b)),
)
