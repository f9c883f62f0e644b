"""Clifford tableaux: exact uniform sampling, Pauli conjugation, gate synthesis.

A tableau on ``k`` qubits stores the images of the generators under
conjugation, ``C X_q C^dag`` in row ``q`` and ``C Z_q C^dag`` in row ``k + q``.
Each row is ``[x bits | z bits]`` plus a sign bit (``(-1)^phase``), with
``(x, z) = (1, 1)`` meaning the Hermitian ``Y``.

Sampling picks a symplectic basis pair by pair, uniformly among the vectors of
the symplectic complement of the pairs chosen so far, followed by uniform sign
bits.  Every element of the Clifford group modulo phase is produced by exactly
one choice of pairs and signs, so the draw is exactly uniform.

The hot loops live in numba kernels so that shadow collection can run
hundreds of thousands of snapshots.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numba
import numpy as np

from .pauli import PauliString, pauli_mul
from .sim import num_qubits

# gate opcodes
H, S, SDG, CX, GX, GY, GZ = range(7)
GATE_NAMES = {H: "H", S: "S", SDG: "SDG", CX: "CNOT", GX: "X", GY: "Y", GZ: "Z"}
GATE_CODES = {v: k for k, v in GATE_NAMES.items()}
_INVERSE = {H: H, S: SDG, SDG: S, CX: CX, GX: GX, GY: GY, GZ: GZ}


# ---------------------------------------------------------------------------
# numba kernels
# ---------------------------------------------------------------------------

@numba.njit(cache=True)
def _omega(a, b, k):
    s = 0
    for q in range(k):
        s ^= (a[q] & b[k + q]) ^ (a[k + q] & b[q])
    return s


@numba.njit(cache=True)
def _fill_bits(word, out, nbits):
    for i in range(nbits):
        out[i] = (word >> np.uint64(i)) & np.uint64(1)


@numba.njit(cache=True)
def _project(p, sym, j, k, tmp):
    """Project ``p`` onto the symplectic complement of pairs ``0..j-1``."""
    for i in range(2 * k):
        tmp[i] = p[i]
    for i in range(j):
        e = sym[i]
        f = sym[k + i]
        wf = _omega(p, f, k)
        we = _omega(p, e, k)
        if wf:
            for c in range(2 * k):
                tmp[c] ^= e[c]
        if we:
            for c in range(2 * k):
                tmp[c] ^= f[c]
    for i in range(2 * k):
        p[i] = tmp[i]


@numba.njit(cache=True)
def _sample_tableau(k, words, ptr, sym, ph):
    """Fill ``sym``/``ph`` with a uniform Clifford.  Returns new pointer or -1."""
    n_words = words.shape[0]
    p = np.zeros(2 * k, dtype=np.uint8)
    tmp = np.zeros(2 * k, dtype=np.uint8)
    for j in range(k):
        while True:
            if ptr >= n_words:
                return -1
            _fill_bits(words[ptr], p, 2 * k)
            ptr += 1
            _project(p, sym, j, k, tmp)
            nz = 0
            for c in range(2 * k):
                nz |= p[c]
            if nz:
                break
        for c in range(2 * k):
            sym[j, c] = p[c]
        while True:
            if ptr >= n_words:
                return -1
            _fill_bits(words[ptr], p, 2 * k)
            ptr += 1
            _project(p, sym, j, k, tmp)
            if _omega(sym[j], p, k) == 1:
                break
        for c in range(2 * k):
            sym[k + j, c] = p[c]
    if ptr >= n_words:
        return -1
    _fill_bits(words[ptr], p, 2 * k)
    ptr += 1
    for c in range(2 * k):
        ph[c] = p[c]
    return ptr


@numba.njit(cache=True)
def _tab_gate(sym, ph, k, op, a, b):
    """Conjugate every tableau row by one gate."""
    for r in range(2 * k):
        xa = sym[r, a]
        za = sym[r, k + a]
        if op == 0:  # H
            ph[r] ^= xa & za
            sym[r, a] = za
            sym[r, k + a] = xa
        elif op == 1:  # S
            ph[r] ^= xa & za
            sym[r, k + a] = za ^ xa
        elif op == 2:  # SDG
            ph[r] ^= xa & (1 - za)
            sym[r, k + a] = za ^ xa
        elif op == 3:  # CX a -> b
            xb = sym[r, b]
            zb = sym[r, k + b]
            ph[r] ^= xa & zb & (xb ^ za ^ 1)
            sym[r, b] = xb ^ xa
            sym[r, k + a] = za ^ zb
        elif op == 4:  # X
            ph[r] ^= za
        elif op == 5:  # Y
            ph[r] ^= xa ^ za
        else:  # Z
            ph[r] ^= xa


@numba.njit(cache=True)
def _emit(sym, ph, k, gates, g, op, a, b):
    _tab_gate(sym, ph, k, op, a, b)
    gates[g, 0] = op
    gates[g, 1] = a
    gates[g, 2] = b
    return g + 1


@numba.njit(cache=True)
def _reduce(sym_in, ph_in, k, red):
    """Gates ``L`` (in time order) with ``L C`` a Pauli; returns (count, signs)."""
    sym = sym_in.copy()
    ph = ph_in.copy()
    g = 0
    for j in range(k):
        # row j -> X_j
        for q in range(j, k):
            if sym[j, k + q]:
                if sym[j, q]:
                    g = _emit(sym, ph, k, red, g, 2, q, q)
                else:
                    g = _emit(sym, ph, k, red, g, 0, q, q)
        pivot = -1
        if sym[j, j]:
            pivot = j
        else:
            for q in range(j + 1, k):
                if sym[j, q]:
                    pivot = q
                    break
        for q in range(j, k):
            if q != pivot and sym[j, q]:
                g = _emit(sym, ph, k, red, g, 3, pivot, q)
        if pivot != j:
            g = _emit(sym, ph, k, red, g, 3, pivot, j)
            g = _emit(sym, ph, k, red, g, 3, j, pivot)
        # row k + j -> Z_j while keeping row j
        g = _emit(sym, ph, k, red, g, 0, j, j)
        for q in range(j + 1, k):
            if sym[k + j, k + q]:
                if sym[k + j, q]:
                    g = _emit(sym, ph, k, red, g, 2, q, q)
                else:
                    g = _emit(sym, ph, k, red, g, 0, q, q)
        for q in range(j + 1, k):
            if sym[k + j, q]:
                g = _emit(sym, ph, k, red, g, 3, j, q)
        if sym[k + j, k + j]:
            g = _emit(sym, ph, k, red, g, 2, j, j)
        g = _emit(sym, ph, k, red, g, 0, j, j)
    return g, ph


@numba.njit(cache=True)
def _synthesize(sym, ph, k, out):
    """Gate sequence for ``C`` (time order) written to ``out``; returns length."""
    red = np.zeros((8 * k * k + 8 * k + 8, 3), dtype=np.int64)
    nred, signs = _reduce(sym, ph, k, red)
    g = 0
    for j in range(k):
        if signs[j] and signs[k + j]:
            out[g, 0] = 5
        elif signs[j]:
            out[g, 0] = 6
        elif signs[k + j]:
            out[g, 0] = 4
        else:
            continue
        out[g, 1] = j
        out[g, 2] = j
        g += 1
    for i in range(nred - 1, -1, -1):
        op = red[i, 0]
        if op == 1:
            op = 2
        elif op == 2:
            op = 1
        out[g, 0] = op
        out[g, 1] = red[i, 1]
        out[g, 2] = red[i, 2]
        g += 1
    return g


@numba.njit(cache=True)
def _state_gate(psi, k, op, a, b, inverse):
    N = psi.shape[0]
    ma = 1 << (k - 1 - a)
    if inverse:
        if op == 1:
            op = 2
        elif op == 2:
            op = 1
    if op == 0:
        r = 1.0 / np.sqrt(2.0)
        for i in range(N):
            if i & ma == 0:
                u = psi[i]
                v = psi[i | ma]
                psi[i] = (u + v) * r
                psi[i | ma] = (u - v) * r
    elif op == 1:
        for i in range(N):
            if i & ma:
                psi[i] = psi[i] * 1j
    elif op == 2:
        for i in range(N):
            if i & ma:
                psi[i] = psi[i] * (-1j)
    elif op == 3:
        mb = 1 << (k - 1 - b)
        for i in range(N):
            if (i & ma) and not (i & mb):
                u = psi[i]
                psi[i] = psi[i | mb]
                psi[i | mb] = u
    elif op == 4:
        for i in range(N):
            if i & ma == 0:
                u = psi[i]
                psi[i] = psi[i | ma]
                psi[i | ma] = u
    elif op == 5:
        for i in range(N):
            if i & ma == 0:
                u = psi[i]
                psi[i] = -1j * psi[i | ma]
                psi[i | ma] = 1j * u
    else:
        for i in range(N):
            if i & ma:
                psi[i] = -psi[i]


@numba.njit(cache=True)
def _run_gates(psi, k, gates, ng):
    for g in range(ng):
        _state_gate(psi, k, gates[g, 0], gates[g, 1], gates[g, 2], False)


@numba.njit(cache=True)
def _run_gates_dagger(psi, k, gates, ng):
    for g in range(ng - 1, -1, -1):
        _state_gate(psi, k, gates[g, 0], gates[g, 1], gates[g, 2], True)


@numba.njit(cache=True)
def _collect_kernel(state, k, start, stop, words, ptr, syms, phs, outcomes, shadows):
    """Snapshots ``start..stop-1``.  Returns (next snapshot, pointer)."""
    N = state.shape[0]
    gates = np.zeros((8 * k * k + 8 * k + 8, 3), dtype=np.int64)
    psi = np.empty(N, dtype=np.complex128)
    for t in range(start, stop):
        for c in range(2 * k):
            for d in range(2 * k):
                syms[t, c, d] = 0
        p2 = _sample_tableau(k, words, ptr, syms[t], phs[t])
        if p2 < 0 or p2 >= words.shape[0]:
            return t, ptr
        ng = _synthesize(syms[t], phs[t], k, gates)
        for i in range(N):
            psi[i] = state[i]
        _run_gates(psi, k, gates, ng)
        u = (words[p2] >> np.uint64(11)) * (1.0 / 9007199254740992.0)
        p2 += 1
        tot = 0.0
        for i in range(N):
            tot += psi[i].real ** 2 + psi[i].imag ** 2
        u *= tot
        acc = 0.0
        b = N - 1
        for i in range(N):
            acc += psi[i].real ** 2 + psi[i].imag ** 2
            if u < acc:
                b = i
                break
        outcomes[t] = b
        for i in range(N):
            shadows[t, i] = 0.0
        shadows[t, b] = 1.0
        _run_gates_dagger(shadows[t], k, gates, ng)
        ptr = p2
    return stop, ptr


# ---------------------------------------------------------------------------
# Python surface
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CliffordTableau:
    """Images of ``X_q`` / ``Z_q`` under ``C . C^dag`` with sign bits."""

    k: int
    symplectic: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        sym = np.ascontiguousarray(self.symplectic, dtype=np.uint8)
        ph = np.ascontiguousarray(self.phases, dtype=np.uint8)
        if sym.shape != (2 * self.k, 2 * self.k) or ph.shape != (2 * self.k,):
            raise ValueError("tableau shape does not match k")
        object.__setattr__(self, "symplectic", sym)
        object.__setattr__(self, "phases", ph)

    @classmethod
    def identity(cls, k: int) -> "CliffordTableau":
        return cls(k, np.eye(2 * k, dtype=np.uint8), np.zeros(2 * k, dtype=np.uint8))

    @classmethod
    def from_gates(cls, gates, k: int) -> "CliffordTableau":
        """Tableau of a gate sequence given as ``(name, targets)`` pairs in time order."""
        sym = np.eye(2 * k, dtype=np.uint8)
        ph = np.zeros(2 * k, dtype=np.uint8)
        for op, a, b in _encode(gates):
            _tab_gate(sym, ph, k, op, a, b)
        return cls(k, sym, ph)

    def __eq__(self, other):
        if not isinstance(other, CliffordTableau):
            return NotImplemented
        return (
            self.k == other.k
            and np.array_equal(self.symplectic, other.symplectic)
            and np.array_equal(self.phases, other.phases)
        )

    def __hash__(self):
        return hash((self.k, self.symplectic.tobytes(), self.phases.tobytes()))

    def is_symplectic(self) -> bool:
        k = self.k
        m = self.symplectic.astype(np.int64)
        lam = np.block([[np.zeros((k, k), int), np.eye(k, dtype=int)], [np.eye(k, dtype=int), np.zeros((k, k), int)]])
        return bool(np.array_equal((m @ lam @ m.T) % 2, lam))

    def row(self, r: int) -> PauliString:
        k = self.k
        x = int("".join(map(str, self.symplectic[r, :k])), 2) if k else 0
        z = int("".join(map(str, self.symplectic[r, k:])), 2) if k else 0
        return PauliString(k, x, z, 2 * int(self.phases[r]))

    def conjugate(self, p: PauliString | str) -> PauliString:
        return conjugate_pauli(self, p)

    def then(self, other: "CliffordTableau") -> "CliffordTableau":
        """Tableau of ``other . self`` (apply ``self`` first)."""
        k = self.k
        sym = np.zeros_like(self.symplectic)
        ph = np.zeros_like(self.phases)
        for r in range(2 * k):
            img = conjugate_pauli(other, self.row(r))
            sym[r, :k] = _bits(img.x_mask, k)
            sym[r, k:] = _bits(img.z_mask, k)
            ph[r] = img.phase_exp // 2
        return CliffordTableau(k, sym, ph)

    def to_gates(self) -> list[tuple[str, tuple[int, ...]]]:
        return to_gates(self)

    def to_matrix(self) -> np.ndarray:
        """Dense unitary (global phase unspecified)."""
        N = 1 << self.k
        return np.stack([apply_to_state(self, _basis(i, N)) for i in range(N)], axis=1)

    def to_json(self) -> str:
        return json.dumps({"k": self.k, "symplectic": self.symplectic.tolist(), "phases": self.phases.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "CliffordTableau":
        d = json.loads(text)
        return cls(int(d["k"]), np.array(d["symplectic"]), np.array(d["phases"]))


def _bits(v: int, k: int) -> np.ndarray:
    return np.array([(v >> (k - 1 - q)) & 1 for q in range(k)], dtype=np.uint8)


def _basis(i: int, N: int) -> np.ndarray:
    v = np.zeros(N, dtype=complex)
    v[i] = 1
    return v


def _encode(gates) -> np.ndarray:
    rows = []
    for name, targets in gates:
        op = GATE_CODES[name.upper() if name.upper() != "CX" else "CNOT"]
        t = tuple(targets)
        rows.append((op, t[0], t[1] if len(t) > 1 else t[0]))
    return np.array(rows, dtype=np.int64).reshape(-1, 3)


def _decode(arr: np.ndarray) -> list[tuple[str, tuple[int, ...]]]:
    out = []
    for op, a, b in arr.tolist():
        out.append((GATE_NAMES[op], (a, b) if op == CX else (a,)))
    return out


def _words_needed(k: int, m: int) -> int:
    return 2 * m * (3 * k + 3) + 256


def sample_uniform(k: int, rng: np.random.Generator) -> CliffordTableau:
    """Exactly uniform element of the ``k``-qubit Clifford group modulo phase."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if 2 * k > 64:
        raise ValueError("k > 32 is not supported")
    while True:
        words = rng.integers(0, 2**64, size=_words_needed(k, 1), dtype=np.uint64)
        sym = np.zeros((2 * k, 2 * k), dtype=np.uint8)
        ph = np.zeros(2 * k, dtype=np.uint8)
        if _sample_tableau(k, words, 0, sym, ph) >= 0:
            return CliffordTableau(k, sym, ph)


def conjugate_pauli(t: CliffordTableau, p: PauliString | str) -> PauliString:
    """``C p C^dag`` as a Pauli string with ``phase_exp`` in ``{0, 2}`` (a sign)."""
    if isinstance(p, str):
        p = PauliString.from_label(p)
    if p.n != t.k:
        raise ValueError(f"Pauli on {p.n} qubits, tableau on {t.k}")
    acc = PauliString(t.k, 0, 0, p.phase_exp)
    for q in range(t.k):
        bit = t.k - 1 - q
        xb = (p.x_mask >> bit) & 1
        zb = (p.z_mask >> bit) & 1
        if xb and zb:
            acc = pauli_mul(pauli_mul(acc, PauliString(t.k, 0, 0, 1)), t.row(q))
            acc = pauli_mul(acc, t.row(t.k + q))
        elif xb:
            acc = pauli_mul(acc, t.row(q))
        elif zb:
            acc = pauli_mul(acc, t.row(t.k + q))
    return acc


def gate_array(t: CliffordTableau) -> np.ndarray:
    out = np.zeros((8 * t.k * t.k + 8 * t.k + 8, 3), dtype=np.int64)
    ng = _synthesize(t.symplectic, t.phases, t.k, out)
    return out[:ng]


def to_gates(t: CliffordTableau) -> list[tuple[str, tuple[int, ...]]]:
    """Gate sequence over ``{H, S, CNOT, X, Y, Z}`` implementing ``t`` (time order)."""
    return _decode(gate_array(t))


def gates_to_json(gates) -> str:
    return json.dumps([{"gate": g, "targets": list(t)} for g, t in gates])


def apply_gates(gates, state: np.ndarray) -> np.ndarray:
    state = np.array(state, dtype=complex)
    k = num_qubits(state.size)
    arr = _encode(gates)
    _run_gates(state, k, arr, arr.shape[0])
    return state


def apply_to_state(t: CliffordTableau, state: np.ndarray) -> np.ndarray:
    """``C |state>`` by running the synthesized gates on the amplitudes."""
    state = np.array(state, dtype=complex)
    if state.size != 1 << t.k:
        raise ValueError(f"state has {state.size} amplitudes, tableau acts on {t.k} qubits")
    arr = gate_array(t)
    _run_gates(state, t.k, arr, arr.shape[0])
    return state


def apply_dagger_to_state(t: CliffordTableau, state: np.ndarray) -> np.ndarray:
    state = np.array(state, dtype=complex)
    arr = gate_array(t)
    _run_gates_dagger(state, t.k, arr, arr.shape[0])
    return state


def collect_arrays(state: np.ndarray, m: int, rng: np.random.Generator):
    """Random-Clifford measurements of ``m`` copies of ``state``.

    Returns ``(symplectic[m], phases[m], outcomes[m], shadow_vectors[m])`` where
    ``shadow_vectors[j] = V_j^dag |b_j>`` up to a global phase.
    """
    state = np.ascontiguousarray(state, dtype=np.complex128)
    k = num_qubits(state.size)
    N = state.size
    syms = np.zeros((m, 2 * k, 2 * k), dtype=np.uint8)
    phs = np.zeros((m, 2 * k), dtype=np.uint8)
    outcomes = np.zeros(m, dtype=np.int64)
    shadows = np.zeros((m, N), dtype=np.complex128)
    done = 0
    while done < m:
        words = rng.integers(0, 2**64, size=_words_needed(k, m - done), dtype=np.uint64)
        done, _ = _collect_kernel(state, k, done, m, words, 0, syms, phs, outcomes, shadows)
    return syms, phs, outcomes, shadows
