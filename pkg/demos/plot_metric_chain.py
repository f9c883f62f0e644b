"""
How the distances compare
-------------------------

For two unitaries the restricted (maximally entangled input) distance, the
exact diamond distance, the phase-optimized operator distance and the Pauli
l1 distance obey a chain of inequalities.  We print them for a pair that
drifts apart.
"""

import numpy as np
from scipy.linalg import expm
from scipy.stats import unitary_group

from paulisparse.metrics import d_optphase, diamond_exact_unitary, min_phase_l1, restricted_diamond_mm

u = unitary_group.rvs(4, random_state=0)
rng = np.random.default_rng(0)
g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
herm = (g + g.conj().T) / 2

print(f"{'t':>5} {'restricted':>11} {'diamond':>9} {'2*d_op':>8} {'2*l1P':>8}")
for t in [0.01, 0.05, 0.2, 0.5]:
    v = expm(1j * t * herm) @ u
    r = restricted_diamond_mm(u, v)
    e = diamond_exact_unitary(u, v)
    d = d_optphase(u, v)[0]
    l1 = min_phase_l1(u, v)[0]
    print(f"{t:5.2f} {r:11.5f} {e:9.5f} {2 * d:8.5f} {2 * l1:8.5f}")
