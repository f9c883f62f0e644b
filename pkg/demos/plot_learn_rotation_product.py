"""
Learning a nearly sparse unitary
--------------------------------

A product of small Pauli rotations is dominated by a handful of Pauli
strings.  The learner finds them by Bell sampling, then estimates their
coefficients with classical shadows, and we measure how close the result is.
"""

from paulisparse import zoo
from paulisparse.learner import aligned_distance, learn_nearly_sparse
from paulisparse.metrics import diamond_upper, restricted_diamond_mm
from paulisparse.pauli import decompose, nearly_sparse_certificate, synthesize
from paulisparse.rng import stream
from paulisparse.sim import UnitaryOracle

###############################################################################
# Three qubits, ``ZZ`` couplings and one ``XXX`` rotation, all at angle 0.06.

u = zoo.build("rotprod", n=3, theta=0.06)
truth = decompose(u)
support, residual = nearly_sparse_certificate(truth, 4)
print("heaviest four strings:", support, " mass outside:", round(residual, 5))

###############################################################################
# Learn with sparsity 4 and accuracy 0.05.  The shadow budget here is far
# beyond what snapshot-by-snapshot simulation can do, so the estimator
# switches to its exact Gaussian model of the batch means.

oracle = UnitaryOracle(u)
report = learn_nearly_sparse(oracle, 4, 0.05, 0.1, stream(7, "demo-learn"))
print("support found:", report.support_X)
print("anchor:", report.anchor_t, " backend:", report.backend)
print(f"queries: m1={report.m1}  m2={report.m2}  total={report.total_queries}")

###############################################################################
# Compare with the truth after removing the unobservable global phase.

v = synthesize(report.alpha_hat)
print("aligned l1 error:", aligned_distance(report.alpha_hat, truth, 1), "(target 0.1)")
print("restricted diamond distance:", restricted_diamond_mm(u, v))
print("diamond upper bound:", diamond_upper(u, v))
