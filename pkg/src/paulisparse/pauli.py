"""Pauli strings, sparse Pauli coefficient maps and the dense <-> Pauli transforms.

Conventions
-----------
* A Pauli label is a string over ``IXYZ``; character ``q`` acts on qubit ``q``.
* Qubit 0 is the most significant bit of a computational-basis index and the
  most significant base-4 digit of a Pauli index (``I, X, Y, Z -> 0, 1, 2, 3``).
* In symplectic form a Pauli is ``i^(x.z) X^x Z^z`` so that ``(1, 1)`` is the
  Hermitian ``Y``.  ``phase_exp`` is an extra power of ``i`` that only shows up
  transiently in products; coefficient maps always store phase-free labels.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

#: Largest qubit count accepted by the dense routines (2n <= 12 for Choi states).
DENSE_CAP = int(os.environ.get("PAULISPARSE_DENSE_CAP", "12"))

PRUNE_TOL = 1e-12

_DIGIT = {"I": 0, "X": 1, "Y": 2, "Z": 3}
_LETTER = "IXYZ"
# digit -> (x, z)
_XZ = ((0, 0), (1, 0), (1, 1), (0, 1))


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliString:
    """An ``n``-qubit Pauli word ``i^phase_exp * P(x_mask, z_mask)``.

    Bit ``n - 1 - q`` of each mask refers to qubit ``q``.
    """

    n: int
    x_mask: int
    z_mask: int
    phase_exp: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")
        full = (1 << self.n) - 1
        if self.x_mask & ~full or self.z_mask & ~full:
            raise ValueError(f"mask wider than {self.n} qubits")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        x = z = 0
        for ch in label:
            try:
                d = _DIGIT[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli character {ch!r} in {label!r}") from None
            xb, zb = _XZ[d]
            x = (x << 1) | xb
            z = (z << 1) | zb
        return cls(len(label), x, z)

    @classmethod
    def from_index(cls, index: int, n: int) -> "PauliString":
        return cls.from_label(index_to_label(index, n))

    @property
    def label(self) -> str:
        out = []
        for q in range(self.n):
            bit = self.n - 1 - q
            xb = (self.x_mask >> bit) & 1
            zb = (self.z_mask >> bit) & 1
            out.append(_LETTER[_XZ.index((xb, zb))])
        return "".join(out)

    @property
    def index(self) -> int:
        return label_to_index(self.label)

    @property
    def digits(self) -> tuple[int, ...]:
        return tuple(_DIGIT[c] for c in self.label)

    def phase_free(self) -> "PauliString":
        return PauliString(self.n, self.x_mask, self.z_mask, 0)

    def weight(self) -> int:
        return _popcount(self.x_mask | self.z_mask)

    def commutes_with(self, other: "PauliString") -> bool:
        return (_popcount(self.x_mask & other.z_mask) + _popcount(self.z_mask & other.x_mask)) % 2 == 0

    def to_matrix(self) -> np.ndarray:
        """Dense ``2^n x 2^n`` matrix including the ``i^phase_exp`` factor."""
        N = 1 << self.n
        idx = np.arange(N)
        cols = idx
        rows = idx ^ self.x_mask
        vals = _column_phases(self.n, self.x_mask, self.z_mask) * (1j ** self.phase_exp)
        m = np.zeros((N, N), dtype=complex)
        m[rows, cols] = vals
        return m

    def __mul__(self, other: "PauliString") -> "PauliString":
        return pauli_mul(self, other)

    def __str__(self) -> str:
        prefix = ("", "i", "-", "-i")[self.phase_exp]
        return prefix + self.label


def _column_phases(n: int, x: int, z: int) -> np.ndarray:
    """Entry of ``P(x, z)`` in column ``i`` (row ``i ^ x``), for every ``i``."""
    N = 1 << n
    idx = np.arange(N)
    # (-1)^{popcount(i & z)}
    par = np.zeros(N, dtype=np.int64)
    v = idx & z
    while np.any(v):
        par ^= v & 1
        v = v >> 1
    return (1j ** _popcount(x & z)) * (1 - 2 * par)


def label_to_index(label: str) -> int:
    s = 0
    for ch in label:
        s = 4 * s + _DIGIT[ch]
    return s


def index_to_label(index: int, n: int) -> str:
    if not 0 <= index < 4**n:
        raise ValueError(f"index {index} out of range for n={n}")
    out = []
    for _ in range(n):
        out.append(_LETTER[index % 4])
        index //= 4
    return "".join(reversed(out))


def pauli_mul(a: PauliString, b: PauliString) -> PauliString:
    """Product ``a * b`` with the power of ``i`` tracked in ``phase_exp``."""
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n} qubits")
    x3 = a.x_mask ^ b.x_mask
    z3 = a.z_mask ^ b.z_mask
    e = (
        a.phase_exp
        + b.phase_exp
        + _popcount(a.x_mask & a.z_mask)
        + _popcount(b.x_mask & b.z_mask)
        + 2 * _popcount(a.z_mask & b.x_mask)
        - _popcount(x3 & z3)
    )
    return PauliString(a.n, x3, z3, e % 4)


class PauliCoefficientMap:
    """Sparse map ``label -> complex coefficient`` on ``n`` qubits.

    Exact zeros are never stored.  Iteration order is ascending base-4 index.
    """

    def __init__(self, n: int, entries: Mapping[str, complex] | Iterable[tuple[str, complex]] = ()):
        self.n = int(n)
        self._d: dict[str, complex] = {}
        items = entries.items() if isinstance(entries, Mapping) else entries
        for label, value in items:
            if len(label) != self.n:
                raise ValueError(f"label {label!r} does not have {self.n} qubits")
            label_to_index(label)  # validates characters
            value = complex(value)
            if value != 0:
                self._d[label] = self._d.get(label, 0) + value
        self._d = {k: v for k, v in self._d.items() if v != 0}

    # mapping protocol
    def __getitem__(self, label: str) -> complex:
        return self._d.get(label, 0j)

    def __contains__(self, label: object) -> bool:
        return label in self._d

    def __len__(self) -> int:
        return len(self._d)

    def __iter__(self):
        return iter(self.labels())

    def labels(self) -> list[str]:
        return sorted(self._d, key=label_to_index)

    def items(self) -> list[tuple[str, complex]]:
        return [(k, self._d[k]) for k in self.labels()]

    def to_dict(self) -> dict[str, complex]:
        return dict(self.items())

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {v:.6g}" for k, v in self.items()[:8])
        more = ", ..." if len(self) > 8 else ""
        return f"PauliCoefficientMap(n={self.n}, {{{body}{more}}})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliCoefficientMap):
            return NotImplemented
        return self.n == other.n and self.to_dict() == other.to_dict()

    # algebra
    def scale(self, c: complex) -> "PauliCoefficientMap":
        return PauliCoefficientMap(self.n, {k: c * v for k, v in self._d.items()})

    def __add__(self, other: "PauliCoefficientMap") -> "PauliCoefficientMap":
        _check_n(self, other)
        out = dict(self._d)
        for k, v in other._d.items():
            out[k] = out.get(k, 0) + v
        return PauliCoefficientMap(self.n, out)

    def __sub__(self, other: "PauliCoefficientMap") -> "PauliCoefficientMap":
        return self + other.scale(-1)

    def __matmul__(self, other: "PauliCoefficientMap") -> "PauliCoefficientMap":
        return multiply(self, other)

    def restrict(self, labels: Iterable[str]) -> "PauliCoefficientMap":
        keep = set(labels)
        return PauliCoefficientMap(self.n, {k: v for k, v in self._d.items() if k in keep})

    def prune(self, tol: float = PRUNE_TOL) -> "PauliCoefficientMap":
        return PauliCoefficientMap(self.n, {k: v for k, v in self._d.items() if abs(v) > tol})

    def vector(self, labels: Iterable[str]) -> np.ndarray:
        return np.array([self[k] for k in labels], dtype=complex)


def _check_n(a: PauliCoefficientMap, b: PauliCoefficientMap) -> None:
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n} qubits")


def multiply(a: PauliCoefficientMap, b: PauliCoefficientMap) -> PauliCoefficientMap:
    """Operator product of two sparse Pauli maps using exact string algebra."""
    _check_n(a, b)
    pa = [(PauliString.from_label(k), v) for k, v in a.items()]
    pb = [(PauliString.from_label(k), v) for k, v in b.items()]
    out: dict[str, complex] = {}
    for p, u in pa:
        for q, w in pb:
            r = pauli_mul(p, q)
            key = r.phase_free().label
            out[key] = out.get(key, 0) + u * w * (1j ** r.phase_exp)
    return PauliCoefficientMap(a.n, out)


def identity_map(n: int) -> PauliCoefficientMap:
    return PauliCoefficientMap(n, {"I" * n: 1.0})


def _num_qubits(op: np.ndarray) -> int:
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError(f"operator must be square, got shape {op.shape}")
    N = op.shape[0]
    n = N.bit_length() - 1
    if N < 1 or (1 << n) != N:
        raise ValueError(f"dimension {N} is not a power of two")
    if n > DENSE_CAP:
        raise ValueError(f"{n} qubits exceeds the dense cap of {DENSE_CAP}")
    return n


def _fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform along the last axis."""
    a = a.copy()
    N = a.shape[-1]
    h = 1
    while h < N:
        a = a.reshape(a.shape[:-1] + (N // (2 * h), 2, h))
        u = a[..., 0, :].copy()
        v = a[..., 1, :]
        a[..., 0, :] = u + v
        a[..., 1, :] = u - v
        a = a.reshape(a.shape[:-3] + (N,))
        h *= 2
    return a


def pauli_coefficient_array(op: np.ndarray) -> np.ndarray:
    """All ``4^n`` coefficients ``2^-n Tr(op P)`` as an ``(x_mask, z_mask)`` array.

    For fixed ``x`` the traces over all ``z`` form a Walsh-Hadamard transform of
    the diagonal ``op[i ^ x, i]``, so the whole spectrum costs ``O(N^2 log N)``.
    """
    n = _num_qubits(op)
    N = 1 << n
    op = np.asarray(op, dtype=complex)
    i = np.arange(N)
    # g[x, i] = op[i, i ^ x]; Tr(op P(x,z)) = i^{|x&z|} sum_i op[i, i^x] (-1)^{i.z}
    g = op[i[None, :], i[None, :] ^ i[:, None]]
    w = _fwht(g)  # w[x, z] = sum_i g[x, i] (-1)^{i.z}
    xz = i[:, None] & i[None, :]
    pc = np.zeros_like(xz)
    v = xz.copy()
    while np.any(v):
        pc += v & 1
        v >>= 1
    return (1j ** pc) * w / N


def pauli_vector(op: np.ndarray) -> np.ndarray:
    """All ``4^n`` coefficients as a flat array in base-4 index order."""
    arr = pauli_coefficient_array(op)
    N = arr.shape[0]
    n = N.bit_length() - 1
    x = np.arange(N)[:, None]
    z = np.arange(N)[None, :]
    index = np.zeros((N, N), dtype=np.int64)
    for q in range(n):
        xb = (x >> q) & 1
        zb = (z >> q) & 1
        index += (xb + zb + 2 * zb * (1 - xb)) * 4**q
    out = np.empty(N * N, dtype=complex)
    out[index.ravel()] = arr.ravel()
    return out


def decompose(op: np.ndarray, tol: float = PRUNE_TOL) -> PauliCoefficientMap:
    """Pauli coefficients ``alpha_s = 2^-n Tr(op sigma^s)`` of a dense operator.

    Entries with magnitude ``<= tol`` are pruned.
    """
    n = _num_qubits(op)
    arr = pauli_coefficient_array(op)
    xs, zs = np.nonzero(np.abs(arr) > tol)
    entries = {}
    for x, z in zip(xs.tolist(), zs.tolist()):
        entries[PauliString(n, x, z).label] = complex(arr[x, z])
    return PauliCoefficientMap(n, entries)


def synthesize(coeffs: PauliCoefficientMap) -> np.ndarray:
    """Dense matrix ``sum_s alpha_s sigma^s``."""
    n = coeffs.n
    if n > DENSE_CAP:
        raise ValueError(f"{n} qubits exceeds the dense cap of {DENSE_CAP}")
    N = 1 << n
    m = np.zeros((N, N), dtype=complex)
    cols = np.arange(N)
    for label, a in coeffs.items():
        p = PauliString.from_label(label)
        m[cols ^ p.x_mask, cols] += a * _column_phases(n, p.x_mask, p.z_mask)
    return m


def norms(coeffs: PauliCoefficientMap) -> tuple[float, float, float]:
    """Pauli ``l1``, ``l2`` and ``l_inf`` norms of the coefficient vector."""
    v = np.abs(np.array([v for _, v in coeffs.items()], dtype=complex))
    if v.size == 0:
        return 0.0, 0.0, 0.0
    return float(v.sum()), float(np.sqrt((v**2).sum())), float(v.max())


def pauli_norm(op_or_map, p: int | float = 1) -> float:
    """Pauli ``p``-norm of a dense operator or coefficient map (p in {1, 2, inf})."""
    c = op_or_map if isinstance(op_or_map, PauliCoefficientMap) else decompose(op_or_map, tol=0.0)
    l1, l2, linf = norms(c)
    return {1: l1, 2: l2, math.inf: linf}[p]


def nearly_sparse_certificate(coeffs: PauliCoefficientMap, s: int) -> tuple[list[str], float]:
    """The ``s`` heaviest labels and the Pauli ``l1`` mass left outside them.

    The residual is the smallest ``eps`` for which the operator is nearly
    ``(s, eps)``-sparse.  Ties go to the smaller base-4 index.
    """
    if s < 0:
        raise ValueError("s must be non-negative")
    ranked = sorted(coeffs.items(), key=lambda kv: (-abs(kv[1]), label_to_index(kv[0])))
    support = [k for k, _ in ranked[:s]]
    residual = float(sum(abs(v) for _, v in ranked[s:]))
    return support, residual


# ---------------------------------------------------------------------------
# JSON-lines coefficient files
# ---------------------------------------------------------------------------

def dumps_jsonl(coeffs: PauliCoefficientMap) -> str:
    lines = [json.dumps({"n": coeffs.n})]
    for label, v in coeffs.items():
        lines.append(json.dumps({"pauli": label, "re": float(v.real), "im": float(v.imag)}))
    return "\n".join(lines) + "\n"


def loads_jsonl(text: str) -> PauliCoefficientMap:
    n = None
    entries = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        rec = json.loads(line)
        if "n" in rec and "pauli" not in rec:
            n = int(rec["n"])
            continue
        try:
            entries.append((rec["pauli"], complex(rec["re"], rec.get("im", 0.0))))
        except KeyError as exc:
            raise ValueError(f"line {lineno}: missing field {exc}") from None
    if n is None:
        raise ValueError("coefficient file has no header record {'n': ...}")
    return PauliCoefficientMap(n, entries)


def write_jsonl(coeffs: PauliCoefficientMap, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_jsonl(coeffs))


def read_jsonl(path) -> PauliCoefficientMap:
    with open(path) as fh:
        return loads_jsonl(fh.read())
