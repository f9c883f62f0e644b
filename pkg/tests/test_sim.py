import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import unitary_group

from paulisparse.oracles import exact_bell_distribution
from paulisparse.pauli import pauli_vector
from paulisparse.rng import stream
from paulisparse.sim import (
    QueryCounter,
    UnitaryOracle,
    apply,
    bell_basis,
    bell_sample,
    bell_vector,
    check_unitary,
    digits_to_index,
    digits_to_labels,
    exact_bell_probabilities,
    is_unitary,
    prepare_choi,
    to_bell_frame,
    write_shot_log,
)

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def test_choi_of_identity_is_epr_pair():
    epr = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(prepare_choi(np.eye(2)), epr)
    assert np.allclose(bell_vector("I"), epr)


@pytest.mark.parametrize("n", [1, 2])
def test_bell_basis_is_orthonormal(n):
    b = bell_basis(n)
    assert np.allclose(b.conj() @ b.T, np.eye(4**n))


@given(st.integers(1, 2), st.integers(0, 2**31 - 1))
def test_choi_matches_u_tensor_identity_on_epr(n, seed):
    u = unitary_group.rvs(1 << n, random_state=seed)
    epr = bell_vector("I" * n)
    # (U x I) acting on the first n qubits of the [A | R] layout
    assert np.allclose(apply(u, epr, range(n)), prepare_choi(u))


@given(st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_bell_probabilities_are_squared_coefficients(n, seed):
    u = unitary_group.rvs(1 << n, random_state=seed)
    probs = exact_bell_probabilities(prepare_choi(u))
    assert np.allclose(probs, np.abs(pauli_vector(u)) ** 2, atol=1e-12)
    assert np.allclose(probs, exact_bell_distribution(u), atol=1e-12)


def test_bell_frame_sends_bell_vector_to_basis_state():
    for s in ["XZ", "YI", "ZZ"]:
        rotated = to_bell_frame(bell_vector(s))
        assert np.isclose(np.abs(rotated).max(), 1.0)
        digits = bell_sample(bell_vector(s), stream(0, "t"), 5)
        assert digits_to_labels(digits) == [s] * 5


def test_hadamard_choi_samples_x_and_z_equally():
    digits = bell_sample(prepare_choi(H), stream(1, "h"), 20000)
    labels = np.array(digits_to_labels(digits))
    assert set(labels) == {"X", "Z"}
    assert abs((labels == "X").mean() - 0.5) < 0.02


def test_digits_to_index():
    assert digits_to_index(np.array([[1, 3], [3, 0]])).tolist() == [7, 12]


def test_apply_matches_kronecker():
    rng = np.random.default_rng(3)
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    cx = np.eye(4)[[0, 1, 3, 2]]
    # CNOT with control qubit 2 and target qubit 0
    full = np.zeros((8, 8))
    for i in range(8):
        b = [(i >> 2) & 1, (i >> 1) & 1, i & 1]
        if b[2]:
            b[0] ^= 1
        full[(b[0] << 2) | (b[1] << 1) | b[2], i] = 1
    assert np.allclose(apply(cx, psi, [2, 0]), full @ psi)


def test_oracle_charges_queries():
    o = UnitaryOracle(H)
    o.choi_copies(10)
    o.choi_copies(5)
    assert o.queries == 15
    c = QueryCounter()
    prepare_choi(H, c, copies=3)
    assert c.count == 3


def test_non_unitary_rejected():
    assert not is_unitary(np.array([[1, 1], [0, 1]]))
    with pytest.raises(ValueError):
        check_unitary(np.array([[1, 1], [0, 1]]))
    with pytest.raises(ValueError):
        check_unitary(np.eye(3))


def test_sampling_is_reproducible():
    a = bell_sample(prepare_choi(H), stream(5, "x"), 100)
    b = bell_sample(prepare_choi(H), stream(5, "x"), 100)
    c = bell_sample(prepare_choi(H), stream(5, "y"), 100)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_shot_log(tmp_path):
    import json

    path = tmp_path / "shots.jsonl"
    write_shot_log(path, np.array([[1], [3]]), 9, "demo")
    lines = [json.loads(x) for x in path.read_text().splitlines()]
    assert lines[0] == {"seed": 9, "stream": "demo", "shots": 2}
    assert [r["outcome"] for r in lines[1:]] == ["X", "Z"]
