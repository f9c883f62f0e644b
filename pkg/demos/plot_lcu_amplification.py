"""
From coefficients back to a circuit
-----------------------------------

A learned coefficient list is a linear combination of Pauli strings, so it
can be block-encoded with prepare/select and then pushed back towards a
unitary by oblivious amplitude amplification.
"""

import numpy as np

from paulisparse import zoo
from paulisparse.lcu import LcuSpec, amplified_block, effective_block, oaa_rounds, padded_norm, success_probability
from paulisparse.metrics import d_optphase
from paulisparse.pauli import PauliCoefficientMap, decompose

###############################################################################
# The 2-qubit Grover operator has subnormalization ``a = 2``, which one round
# of amplification handles exactly.

u = zoo.grover_diffusion(2)
spec = LcuSpec(decompose(u))
print("a =", spec.a, " ancillas:", spec.m, " success probability:", success_probability(spec))
print("block * a equals U:", np.allclose(spec.a * effective_block(spec), u))
print("rounds for a=2:", oaa_rounds(2.0))
print("distance after amplification:", d_optphase(u, amplified_block(spec))[0])

###############################################################################
# A perturbed coefficient list, as a learner would return, gives an error
# that shrinks with the size of the perturbation.

cz = zoo.build("cz")
for gamma in [1e-2, 1e-3, 1e-4]:
    noisy = decompose(cz) + PauliCoefficientMap(2, {"XX": gamma, "YZ": -gamma})
    spec = LcuSpec(noisy, gamma=gamma)
    a_pad, rounds = padded_norm(spec.a)
    dist = d_optphase(cz, amplified_block(spec))[0]
    print(f"gamma={gamma:.0e}  a={spec.a:.4f}  padded to {a_pad:.4f} with {rounds} rounds  "
          f"distance={dist:.2e}  a*sqrt(gamma)={spec.a * np.sqrt(gamma):.2e}")
