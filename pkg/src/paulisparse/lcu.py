"""Block encodings of sparse Pauli sums by prepare/select, plus oblivious amplification.

Register order is ``[ancilla | system]`` with the ancilla most significant, so
the ``|0^m>`` block of a ``2^(m+n)`` matrix is its top-left ``2^n x 2^n``
corner.  Support strings map to ancilla basis states in ascending base-4 order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pauli import PauliCoefficientMap, PauliString, synthesize

C_LCU = 10.0


@dataclass(frozen=True)
class LcuSpec:
    coeffs: PauliCoefficientMap
    gamma: float | None = None

    def __post_init__(self):
        if len(self.coeffs) == 0:
            raise ValueError("cannot block-encode the zero operator")

    @property
    def n(self) -> int:
        return self.coeffs.n

    @property
    def support(self) -> list[str]:
        return self.coeffs.labels()

    @property
    def a(self) -> float:
        return float(sum(abs(c) for _, c in self.coeffs.items()))

    @property
    def m(self) -> int:
        return math.ceil(math.log2(len(self.coeffs))) if len(self.coeffs) > 1 else 0


def _householder(col: np.ndarray) -> np.ndarray:
    """Real orthogonal reflection sending ``e_0`` to the unit vector ``col``."""
    d = col.size
    e0 = np.zeros(d)
    e0[0] = 1
    v = e0 - col
    nv = np.dot(v, v)
    if nv < 1e-30:
        return np.eye(d)
    return np.eye(d) - 2 * np.outer(v, v) / nv


def prepare_column(spec: LcuSpec) -> np.ndarray:
    col = np.zeros(1 << spec.m)
    w = np.array([abs(c) for _, c in spec.coeffs.items()])
    col[: w.size] = np.sqrt(w / spec.a)
    return col


def build_prepare(spec: LcuSpec) -> np.ndarray:
    """``A`` with ``A|0^m> = sum_j sqrt(|alpha_j| / a) |j>``."""
    return _householder(prepare_column(spec)).astype(complex)


def build_select(spec: LcuSpec) -> np.ndarray:
    """``sum_j |j><j| (x) (alpha_j / |alpha_j|) sigma^{s_j}``; identity on unused ``j``."""
    N = 1 << spec.n
    M = 1 << spec.m
    out = np.zeros((M * N, M * N), dtype=complex)
    items = spec.coeffs.items()
    for j in range(M):
        if j < len(items):
            lab, c = items[j]
            if abs(c) == 0:
                raise ValueError(f"zero-magnitude coefficient on {lab}")
            blk = (c / abs(c)) * PauliString.from_label(lab).to_matrix()
        else:
            blk = np.eye(N)
        out[j * N : (j + 1) * N, j * N : (j + 1) * N] = blk
    return out


def build_w(spec: LcuSpec) -> np.ndarray:
    """``W = (A^dag (x) I) V (A (x) I)``."""
    A = np.kron(build_prepare(spec), np.eye(1 << spec.n))
    return A.conj().T @ build_select(spec) @ A


def effective_block(spec: LcuSpec, w: np.ndarray | None = None) -> np.ndarray:
    """``(<0^m| (x) I) W (|0^m> (x) I)``, equal to ``U_hat / a``."""
    N = 1 << spec.n
    w = build_w(spec) if w is None else w
    return w[:N, :N]


def success_probability(spec: LcuSpec) -> float:
    """Post-selection probability of ``|0^m>`` averaged over a maximally mixed input."""
    blk = effective_block(spec)
    return float(np.linalg.norm(blk) ** 2 / blk.shape[0])


def oaa_rounds(a: float) -> int:
    """Rounds so that ``(2r + 1) asin(1/a)`` is closest to ``pi / 2``."""
    if a <= 1:
        return 0
    return max(0, round((math.pi / (2 * math.asin(1 / a)) - 1) / 2))


def padded_norm(a: float) -> tuple[float, int]:
    """Smallest ``a' >= a`` that one exact amplification schedule handles, with its rounds."""
    r = 0
    while True:
        target = 1 / math.sin(math.pi / (2 * (2 * r + 1)))
        if target >= a - 1e-12:
            return target, r
        r += 1


def _pad(w: np.ndarray, ratio: float) -> np.ndarray:
    """Prepend one ancilla rotated so that its ``|0>`` amplitude is ``ratio``."""
    s = math.sqrt(max(0.0, 1 - ratio**2))
    ry = np.array([[ratio, -s], [s, ratio]], dtype=complex)
    return np.kron(ry, w)


def amplify(spec: LcuSpec, rounds: int, pad_to: float | None = None) -> np.ndarray:
    """``(-W R W^dag R)^rounds W`` with ``R = I - 2 |0><0| (x) I`` on the ancillas.

    ``pad_to`` adds one ancilla that lowers the block to ``U_hat / pad_to``,
    e.g. ``pad_to=2`` makes a single round exact for unitary ``U_hat``.
    """
    if rounds < 0:
        raise ValueError("rounds must be non-negative")
    a = spec.a
    w = build_w(spec)
    if pad_to is not None:
        if pad_to < a - 1e-12:
            raise ValueError(f"cannot pad subnormalization {a} down to {pad_to}")
        w = _pad(w, a / pad_to)
        a = pad_to
    if spec.gamma is not None and 1 + spec.gamma > a + 1e-12:
        raise ValueError(f"amplification needs 1 + gamma <= a, got gamma={spec.gamma}, a={a}")
    N = 1 << spec.n
    R = np.ones(w.shape[0])
    R[:N] = -1
    out = w
    for _ in range(rounds):
        out = -w @ (R[:, None] * (w.conj().T @ (R[:, None] * out)))
    return out


def amplified_block(spec: LcuSpec, rounds: int | None = None, pad_to: float | None = None) -> np.ndarray:
    """System block after amplification; defaults to padding to the next exact schedule."""
    if rounds is None:
        pad_to, rounds = padded_norm(spec.a) if pad_to is None else (pad_to, oaa_rounds(pad_to))
    N = 1 << spec.n
    return amplify(spec, rounds, pad_to)[:N, :N]


def gate_count_estimate(spec: LcuSpec) -> dict:
    """Structural counts: ``O(n)`` gates per controlled Pauli, ``2^m`` for prepare."""
    weights = [PauliString.from_label(s).weight() for s in spec.support]
    return {
        "select_controlled_paulis": len(weights),
        "select_single_qubit_ops": int(sum(weights)),
        "prepare_rotations": (1 << spec.m) - 1,
        "ancillas": spec.m,
    }


def block_error(spec: LcuSpec) -> float:
    """``max |a * block - U_hat|``; zero up to rounding for a correct construction."""
    return float(np.max(np.abs(spec.a * effective_block(spec) - synthesize(spec.coeffs))))
