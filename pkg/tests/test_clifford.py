import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from paulisparse.clifford import (
    CliffordTableau,
    apply_dagger_to_state,
    apply_gates,
    apply_to_state,
    collect_arrays,
    conjugate_pauli,
    gates_to_json,
    sample_uniform,
    to_gates,
)
from paulisparse.oracles import clifford_group_order, dense_conjugation, enumerate_clifford_group
from paulisparse.pauli import PauliString, index_to_label
from paulisparse.rng import stream

H1 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S1 = np.diag([1, 1j])
SINGLE = {"H": H1, "S": S1, "SDG": S1.conj(), "X": np.array([[0, 1], [1, 0]]),
          "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1])}


def dense_gate(name, targets, k):
    """Independent dense construction, qubit 0 most significant."""
    N = 1 << k
    if name == "CNOT":
        c, t = targets
        out = np.zeros((N, N))
        for i in range(N):
            j = i ^ (1 << (k - 1 - t)) if (i >> (k - 1 - c)) & 1 else i
            out[j, i] = 1
        return out
    mats = [np.eye(2)] * k
    mats[targets[0]] = SINGLE[name]
    out = np.eye(1)
    for m in mats:
        out = np.kron(out, m)
    return out


def random_circuit(rng, k, length):
    out = []
    for _ in range(length):
        g = rng.choice(["H", "S", "SDG", "X", "Y", "Z", "CNOT"] if k > 1 else ["H", "S", "SDG", "X", "Y", "Z"])
        if g == "CNOT":
            a, b = rng.choice(k, size=2, replace=False)
            out.append((g, (int(a), int(b))))
        else:
            out.append((str(g), (int(rng.integers(k)),)))
    return out


def dense_circuit(gates, k):
    u = np.eye(1 << k, dtype=complex)
    for name, t in gates:
        u = dense_gate(name, t, k) @ u
    return u


def equal_up_to_phase(a, b):
    j = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    ph = a[j] / b[j]
    return np.isclose(abs(ph), 1) and np.allclose(a, ph * b, atol=1e-10)


@given(st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_tableau_conjugation_matches_dense(k, seed):
    rng = np.random.default_rng(seed)
    gates = random_circuit(rng, k, 12)
    t = CliffordTableau.from_gates(gates, k)
    u = dense_circuit(gates, k)
    for idx in rng.choice(4**k, size=min(6, 4**k), replace=False):
        p = PauliString.from_index(int(idx), k)
        img = conjugate_pauli(t, p)
        assert np.allclose(img.to_matrix(), u @ p.to_matrix() @ u.conj().T, atol=1e-12)


@given(st.integers(1, 4), st.integers(0, 2**31 - 1))
def test_synthesized_gates_reproduce_tableau(k, seed):
    t = sample_uniform(k, stream(seed, "synth"))
    assert t.is_symplectic()
    assert CliffordTableau.from_gates(to_gates(t), k) == t
    u = t.to_matrix()
    for q in range(2 * k):
        p = t.row(q)
        src = PauliString.from_label(("X" if q < k else "Z").join(["I" * (q % k), "I" * (k - 1 - q % k)]))
        assert np.allclose(u @ src.to_matrix() @ u.conj().T, p.to_matrix(), atol=1e-12)


@given(st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_state_application_matches_dense_circuit(k, seed):
    rng = np.random.default_rng(seed)
    gates = random_circuit(rng, k, 10)
    psi = rng.normal(size=1 << k) + 1j * rng.normal(size=1 << k)
    assert np.allclose(apply_gates(gates, psi), dense_circuit(gates, k) @ psi)
    t = CliffordTableau.from_gates(gates, k)
    assert equal_up_to_phase(t.to_matrix(), dense_circuit(gates, k))
    back = apply_dagger_to_state(t, apply_to_state(t, psi))
    assert np.allclose(back, psi)


def test_composition_order():
    rng = stream(2, "compose")
    a, b = sample_uniform(2, rng), sample_uniform(2, rng)
    assert equal_up_to_phase(a.then(b).to_matrix(), b.to_matrix() @ a.to_matrix())


def test_json_round_trip():
    t = sample_uniform(3, stream(0, "json"))
    assert CliffordTableau.from_json(t.to_json()) == t
    assert '"gate": "H"' in gates_to_json([("H", (0,))])


def test_single_qubit_known_images():
    h = CliffordTableau.from_gates([("H", (0,))], 1)
    assert conjugate_pauli(h, "X").label == "Z"
    assert conjugate_pauli(h, "Y").phase_exp == 2  # HYH = -Y
    s = CliffordTableau.from_gates([("S", (0,))], 1)
    assert conjugate_pauli(s, "X").label == "Y"


@pytest.mark.parametrize("k,order", [(1, 24), (2, 11520)])
def test_group_order(k, order):
    assert clifford_group_order(k) == order
    assert len(enumerate_clifford_group(k)) == order


def test_dense_conjugation_oracle_agrees():
    t = sample_uniform(2, stream(4, "dense"))
    for i in range(16):
        p = PauliString.from_label(index_to_label(i, 2))
        assert np.allclose(dense_conjugation(t, p), conjugate_pauli(t, p).to_matrix(), atol=1e-12)


def test_two_qubit_sampler_reaches_every_class():
    rng = stream(11, "coverage")
    seen = {sample_uniform(2, rng) for _ in range(80000)}
    # coupon collector: 80000 draws over 11520 classes miss each with prob ~1e-3
    assert len(seen) > 11450
    assert seen <= enumerate_clifford_group(2)


def test_collected_shadow_vectors_are_v_dagger_b():
    rng = stream(5, "collect")
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi /= np.linalg.norm(psi)
    syms, phs, outs, vecs = collect_arrays(psi, 30, rng)
    for j in range(30):
        t = CliffordTableau(3, syms[j], phs[j])
        b = np.zeros(8, dtype=complex)
        b[outs[j]] = 1
        assert equal_up_to_phase(vecs[j], t.to_matrix().conj().T @ b)


def test_collection_is_deterministic():
    psi = np.ones(4) / 2
    a = collect_arrays(psi, 50, stream(1, "c"))
    b = collect_arrays(psi, 50, stream(1, "c"))
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
