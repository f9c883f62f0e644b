"""Dense statevector engine.

States are complex numpy vectors of length ``2^k`` and operators are
``2^k x 2^k`` complex arrays.  Qubit 0 is the most significant bit of an
amplitude index.  A Choi state of an ``n``-qubit unitary lives on ``2n`` qubits
in block layout ``[A | R]``: system qubits ``0..n-1`` followed by reference
qubits ``n..2n-1``; Bell pairs are ``(i, n + i)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .pauli import DENSE_CAP, PauliString, index_to_label

UNITARY_TOL = 1e-10


def num_qubits(dim: int) -> int:
    k = int(dim).bit_length() - 1
    if dim < 1 or (1 << k) != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return k


def is_unitary(m: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol)


def check_unitary(m: np.ndarray, tol: float = UNITARY_TOL) -> int:
    """Raise unless ``m`` is unitary; return its qubit count."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"operator must be square, got shape {m.shape}")
    if not is_unitary(m, tol):
        raise ValueError("operator is not unitary")
    return num_qubits(m.shape[0])


@dataclass
class QueryCounter:
    """Number of applications of the black-box unitary.  Only ever grows."""

    count: int = 0

    def charge(self, k: int = 1) -> None:
        if k < 0:
            raise ValueError("query charges are non-negative")
        self.count += int(k)


@dataclass
class UnitaryOracle:
    """Black-box access to ``U``: the learner only sees Choi states.

    Each Choi copy handed out costs one query.
    """

    _u: np.ndarray = field(repr=False)
    counter: QueryCounter = field(default_factory=QueryCounter)

    def __post_init__(self):
        self._u = np.asarray(self._u, dtype=complex)
        self.n = check_unitary(self._u)
        if 2 * self.n > DENSE_CAP:
            raise ValueError(f"Choi state on {2 * self.n} qubits exceeds the dense cap {DENSE_CAP}")

    @property
    def queries(self) -> int:
        return self.counter.count

    def choi_copies(self, copies: int) -> np.ndarray:
        """One Choi state vector, standing for ``copies`` identical preparations."""
        return prepare_choi(self._u, self.counter, copies=copies)


def prepare_choi(u: np.ndarray, counter: QueryCounter | None = None, copies: int = 1) -> np.ndarray:
    """``|J(U)> = (U x I)(1/sqrt(N)) sum_i |i>|i>``; charges ``copies`` queries."""
    u = np.asarray(u, dtype=complex)
    n = check_unitary(u)
    if 2 * n > DENSE_CAP:
        raise ValueError(f"Choi state on {2 * n} qubits exceeds the dense cap {DENSE_CAP}")
    if counter is not None:
        counter.charge(copies)
    # amplitude at (a, r) is U[a, r] / sqrt(N)
    return u.reshape(-1) / np.sqrt(u.shape[0])


def bell_vector(label: str) -> np.ndarray:
    """``|phi_s> = (sigma^s x I)|EPR>^n`` in the ``[A | R]`` layout."""
    p = PauliString.from_label(label).to_matrix()
    return p.reshape(-1) / np.sqrt(p.shape[0])


def bell_basis(n: int) -> np.ndarray:
    """Row ``s`` is ``|phi_s>``, rows in base-4 order."""
    return np.array([bell_vector(index_to_label(s, n)) for s in range(4**n)])


# per-pair change of basis: row d is <phi_d| on (A_i, R_i), so |phi_d> -> |d>
_PAIR = np.array(
    [
        [1, 0, 0, 1],  # I: |00> + |11>
        [0, 1, 1, 0],  # X: |10> + |01>
        [0, -1j, 1j, 0],  # Y: i|10> - i|01>
        [1, 0, 0, -1],  # Z: |00> - |11>
    ],
    dtype=complex,
)
_PAIR = _PAIR.conj() / np.sqrt(2)


def apply(op: np.ndarray, state: np.ndarray, targets) -> np.ndarray:
    """Apply a ``t``-qubit operator to ``targets`` (in the operator's qubit order)."""
    state = np.asarray(state, dtype=complex)
    k = num_qubits(state.size)
    targets = [int(t) for t in targets]
    t = len(targets)
    if len(set(targets)) != t or any(q < 0 or q >= k for q in targets):
        raise ValueError(f"bad target qubits {targets} for a {k}-qubit state")
    op = np.asarray(op, dtype=complex)
    if op.shape != (1 << t, 1 << t):
        raise ValueError(f"operator shape {op.shape} does not act on {t} qubits")
    psi = state.reshape((2,) * k)
    out = np.tensordot(op.reshape((2,) * (2 * t)), psi, axes=(list(range(t, 2 * t)), targets))
    out = np.moveaxis(out, list(range(t)), targets)
    return out.reshape(-1)


def to_bell_frame(state: np.ndarray) -> np.ndarray:
    """Rotate every pair ``(i, n+i)`` so that ``|phi_s>`` becomes a basis vector."""
    k = num_qubits(np.asarray(state).size)
    if k % 2:
        raise ValueError("Bell sampling needs an even number of qubits")
    n = k // 2
    out = np.asarray(state, dtype=complex)
    for i in range(n):
        out = apply(_PAIR, out, [i, n + i])
    return out


def _pair_digits(outcomes: np.ndarray, n: int) -> np.ndarray:
    k = 2 * n
    bits = (outcomes[:, None] >> (k - 1 - np.arange(k))[None, :]) & 1
    return 2 * bits[:, :n] + bits[:, n:]


def bell_sample(state: np.ndarray, rng: np.random.Generator, shots: int) -> np.ndarray:
    """Measure ``shots`` copies pair-wise in the Bell basis.

    Returns an ``(shots, n)`` integer array of base-4 digits (``I, X, Y, Z``).
    """
    rotated = to_bell_frame(state)
    n = num_qubits(rotated.size) // 2
    if shots == 0:
        return np.zeros((0, n), dtype=np.int64)
    outcomes = _sample_born(rotated, rng, shots)
    return _pair_digits(outcomes, n)


def digits_to_labels(digits: np.ndarray) -> list[str]:
    letters = np.array(list("IXYZ"))
    return ["".join(row) for row in letters[np.asarray(digits)]]


def digits_to_index(digits: np.ndarray) -> np.ndarray:
    digits = np.atleast_2d(digits)
    n = digits.shape[1]
    return digits @ (4 ** np.arange(n - 1, -1, -1))


def _sample_born(state: np.ndarray, rng: np.random.Generator, shots: int) -> np.ndarray:
    p = np.abs(state) ** 2
    p = p / p.sum()
    cdf = np.cumsum(p)
    u = rng.random(shots) * cdf[-1]
    return np.minimum(np.searchsorted(cdf, u, side="right"), p.size - 1)


def measure_computational(state: np.ndarray, rng: np.random.Generator, shots: int | None = None):
    """Computational-basis outcome(s) as integers (qubit 0 = most significant bit)."""
    out = _sample_born(np.asarray(state), rng, 1 if shots is None else shots)
    return int(out[0]) if shots is None else out


def exact_bell_probabilities(state: np.ndarray) -> np.ndarray:
    """``|<phi_s|state>|^2`` for every ``s`` in base-4 order, by direct overlaps."""
    k = num_qubits(np.asarray(state).size)
    basis = bell_basis(k // 2)
    return np.abs(basis.conj() @ state) ** 2


def basis_state(index: int, k: int) -> np.ndarray:
    v = np.zeros(1 << k, dtype=complex)
    v[index] = 1
    return v


def write_shot_log(path, digits: np.ndarray, seed: int, stream_name: str) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps({"seed": seed, "stream": stream_name, "shots": int(len(digits))}) + "\n")
        for i, lab in enumerate(digits_to_labels(digits)):
            fh.write(json.dumps({"shot": i, "outcome": lab}) + "\n")
