"""Brute-force reference computations and the repeated-trial harness.

Every function here takes a deliberately different route from the production
code it checks: explicit traces instead of the Walsh-Hadamard transform,
Bell-vector overlaps instead of decomposition, breadth-first closure of the
Clifford group instead of symplectic sampling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .clifford import CX, H, S, CliffordTableau, _tab_gate
from .pauli import PauliCoefficientMap, PauliString, index_to_label
from .sim import bell_basis, check_unitary, prepare_choi


def brute_force_coefficients(op: np.ndarray) -> np.ndarray:
    """``2^-n Tr(op sigma^s)`` for every ``s`` in base-4 order, one trace at a time."""
    op = np.asarray(op, dtype=complex)
    N = op.shape[0]
    n = N.bit_length() - 1
    out = np.empty(4**n, dtype=complex)
    for s in range(4**n):
        out[s] = np.trace(op @ PauliString.from_label(index_to_label(s, n)).to_matrix()) / N
    return out


def brute_force_map(op: np.ndarray, tol: float = 1e-12) -> PauliCoefficientMap:
    n = np.asarray(op).shape[0].bit_length() - 1
    c = brute_force_coefficients(op)
    return PauliCoefficientMap(n, {index_to_label(s, n): v for s, v in enumerate(c) if abs(v) > tol})


def exact_bell_distribution(u: np.ndarray) -> np.ndarray:
    """``|<phi_s|J(u)>|^2`` over all ``s`` via explicit Bell vectors."""
    n = check_unitary(u)
    if n > 4:
        raise ValueError("exact Bell tables are limited to n <= 4")
    return np.abs(bell_basis(n).conj() @ prepare_choi(u)) ** 2


def dense_conjugation(t: CliffordTableau, p: PauliString) -> np.ndarray:
    c = t.to_matrix()
    return c @ p.to_matrix() @ c.conj().T


def enumerate_clifford_group(k: int) -> set[CliffordTableau]:
    """All tableaux reachable from the identity by ``H``, ``S`` and ``CNOT``."""
    gens = [(H, q, q) for q in range(k)] + [(S, q, q) for q in range(k)]
    gens += [(CX, a, b) for a in range(k) for b in range(k) if a != b]
    start = CliffordTableau.identity(k)
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for t in frontier:
            for op, a, b in gens:
                sym = t.symplectic.copy()
                ph = t.phases.copy()
                _tab_gate(sym, ph, k, op, a, b)
                c = CliffordTableau(k, sym, ph)
                if c not in seen:
                    seen.add(c)
                    nxt.append(c)
        frontier = nxt
    return seen


def clifford_group_order(k: int) -> int:
    """``2^(k^2 + 2k) prod_j (4^j - 1)``, the size modulo phase."""
    out = 2 ** (k * k + 2 * k)
    for j in range(1, k + 1):
        out *= 4**j - 1
    return out


def grid_align(alpha_hat: PauliCoefficientMap, alpha_true: PauliCoefficientMap, points: int = 10_000):
    """Brute-force version of least-squares phase alignment."""
    labels = sorted(set(alpha_hat.labels()) | set(alpha_true.labels()))
    a = np.array([alpha_true[s] for s in labels])
    b = np.array([alpha_hat[s] for s in labels])
    phis = np.linspace(0, 2 * np.pi, points, endpoint=False)
    errs = np.abs(b[None, :] - np.exp(-1j * phis)[:, None] * a[None, :]).max(axis=1)
    j = int(np.argmin(errs))
    return float(phis[j]), float(errs[j])


def grid_optphase(u: np.ndarray, v: np.ndarray, points: int = 100_000) -> float:
    phis = np.linspace(0, 2 * np.pi, points, endpoint=False)
    best = math.inf
    for lo in range(0, points, 4096):
        ph = phis[lo : lo + 4096]
        stack = u[None] - np.exp(1j * ph)[:, None, None] * v[None]
        best = min(best, float(np.linalg.svd(stack, compute_uv=False)[:, 0].min()))
    return best


# ---------------------------------------------------------------------------
# repeated trials
# ---------------------------------------------------------------------------

def binomial_threshold(p: float, trials: int, sigmas: float = 3.0) -> int:
    """Smallest pass count accepted for success probability ``p``."""
    return max(0, math.floor(trials * p - sigmas * math.sqrt(trials * p * (1 - p))))


@dataclass
class TrialSummary:
    criterion: str
    trials: int
    passes: int
    threshold: int
    slack: str = "3-sigma binomial"

    @property
    def ok(self) -> bool:
        return self.passes >= self.threshold

    def __str__(self):
        return f"{self.criterion}: {self.passes}/{self.trials} (need {self.threshold})"


def repeated_trial(
    criterion: Callable[[int], bool],
    trials: int,
    seed: int,
    p_success: float = 1.0,
    name: str = "criterion",
    threshold: int | None = None,
) -> TrialSummary:
    """Run ``criterion(trial_seed)`` ``trials`` times with derived seeds."""
    ss = np.random.SeedSequence(seed)
    seeds = [int(s.generate_state(1, dtype=np.uint64)[0]) for s in ss.spawn(trials)]
    passes = sum(bool(criterion(s)) for s in seeds)
    if threshold is None:
        threshold = binomial_threshold(p_success, trials) if p_success < 1 else trials
    return TrialSummary(name, trials, passes, threshold)
