"""
Bell sampling reads off Pauli weights
-------------------------------------

Measuring the Choi state of a unitary in the Bell basis returns the string
``s`` with probability ``|alpha_s|^2``.  Here we check that on the 3-qubit
Grover diffusion operator, whose coefficients are known in closed form.
"""

import numpy as np

from paulisparse import zoo
from paulisparse.pauli import decompose, index_to_label, pauli_vector
from paulisparse.rng import stream
from paulisparse.sim import UnitaryOracle, bell_sample, digits_to_index

###############################################################################
# The diffusion operator ``2|+><+| - I`` has Pauli l1 norm ``3 - 2^(2 - n)``.

n = 3
u = zoo.grover_diffusion(n)
coeffs = decompose(u)
for label, c in coeffs.items():
    print(f"{label}  {c.real:+.4f}")
print("l1 norm:", sum(abs(c) for _, c in coeffs.items()), "expected:", 3 - 2 ** (2 - n))

###############################################################################
# Sample 20000 Bell outcomes and compare frequencies with ``|alpha_s|^2``.

oracle = UnitaryOracle(u)
shots = 20000
digits = bell_sample(oracle.choi_copies(shots), stream(0, "demo-bell"), shots)
freq = np.bincount(digits_to_index(digits), minlength=4**n) / shots
exact = np.abs(pauli_vector(u)) ** 2

for s in np.flatnonzero(exact > 1e-12):
    print(f"{index_to_label(int(s), n)}  sampled {freq[s]:.4f}  exact {exact[s]:.4f}")
print("total variation:", 0.5 * np.abs(freq - exact).sum())
print("queries spent:", oracle.queries)
