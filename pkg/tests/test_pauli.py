import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paulisparse.oracles import brute_force_coefficients
from paulisparse.pauli import (
    PauliCoefficientMap,
    PauliString,
    decompose,
    identity_map,
    index_to_label,
    label_to_index,
    loads_jsonl,
    dumps_jsonl,
    multiply,
    nearly_sparse_certificate,
    norms,
    pauli_mul,
    pauli_norm,
    pauli_vector,
    read_jsonl,
    synthesize,
    write_jsonl,
)

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1, -1]).astype(complex)
SINGLE = {"I": I2, "X": X, "Y": Y, "Z": Z}

labels = st.integers(1, 4).flatmap(lambda n: st.text("IXYZ", min_size=n, max_size=n))


def kron_label(label):
    out = np.eye(1)
    for ch in label:
        out = np.kron(out, SINGLE[ch])
    return out


@given(labels)
def test_matrix_matches_kronecker_product(label):
    assert np.allclose(PauliString.from_label(label).to_matrix(), kron_label(label))


@given(labels)
def test_label_index_round_trip(label):
    idx = label_to_index(label)
    assert index_to_label(idx, len(label)) == label
    assert PauliString.from_label(label).index == idx


def test_base4_digit_order_is_qubit0_most_significant():
    assert [index_to_label(i, 1) for i in range(4)] == ["I", "X", "Y", "Z"]
    assert label_to_index("XI") == 4
    assert label_to_index("IZ") == 3
    assert label_to_index("ZZ") == 15


@settings(max_examples=60)
@given(labels.flatmap(lambda a: st.tuples(st.just(a), st.text("IXYZ", min_size=len(a), max_size=len(a)))))
def test_product_phase_matches_dense(pair):
    a, b = (PauliString.from_label(x) for x in pair)
    prod = pauli_mul(a, b)
    assert np.allclose(prod.to_matrix(), a.to_matrix() @ b.to_matrix())
    dense_commute = np.allclose(a.to_matrix() @ b.to_matrix(), b.to_matrix() @ a.to_matrix())
    assert a.commutes_with(b) == dense_commute


def test_single_qubit_products():
    xy = PauliString.from_label("X") * PauliString.from_label("Y")
    assert xy.phase_free().label == "Z" and xy.phase_exp == 1
    yx = PauliString.from_label("Y") * PauliString.from_label("X")
    assert yx.phase_exp == 3


def test_weight():
    assert PauliString.from_label("IXIZY").weight() == 3
    assert PauliString.from_label("III").weight() == 0


def test_invalid_label_rejected():
    with pytest.raises(ValueError):
        PauliString.from_label("XQ")


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_decompose_matches_explicit_traces(n, seed):
    rng = np.random.default_rng(seed)
    N = 1 << n
    a = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    assert np.allclose(pauli_vector(a), brute_force_coefficients(a), atol=1e-12)
    assert np.allclose(synthesize(decompose(a)), a, atol=1e-12)


def test_hadamard_coefficients():
    h = (X + Z) / math.sqrt(2)
    c = decompose(h)
    assert set(c.labels()) == {"X", "Z"}
    assert c["X"] == pytest.approx(1 / math.sqrt(2))
    assert c["Z"] == pytest.approx(1 / math.sqrt(2))
    assert c["Y"] == 0


def test_cz_coefficients():
    cz = np.diag([1, 1, 1, -1]).astype(complex)
    c = decompose(cz)
    assert c.to_dict() == pytest.approx({"II": 0.5, "IZ": 0.5, "ZI": 0.5, "ZZ": -0.5})


def test_map_algebra_matches_dense():
    rng = np.random.default_rng(7)
    a = PauliCoefficientMap(2, {"XI": 0.5, "ZY": 1j, "II": -0.2})
    b = PauliCoefficientMap(2, {"XX": 0.3 - 0.1j, "ZY": 0.7})
    assert np.allclose(synthesize(a + b), synthesize(a) + synthesize(b))
    assert np.allclose(synthesize(a - b), synthesize(a) - synthesize(b))
    assert np.allclose(synthesize(a @ b), synthesize(a) @ synthesize(b))
    assert np.allclose(synthesize(multiply(b, a)), synthesize(b) @ synthesize(a))
    c = complex(rng.normal(), rng.normal())
    assert np.allclose(synthesize(a.scale(c)), c * synthesize(a))
    assert np.allclose(synthesize(identity_map(2)), np.eye(4))


def test_restrict_and_prune():
    a = PauliCoefficientMap(2, {"XI": 0.5, "ZY": 1e-15, "II": -0.2})
    assert a.prune().labels() == ["II", "XI"]
    assert a.restrict(["XI", "YY"]).to_dict() == {"XI": 0.5}


def test_norms_of_grover_two_qubit():
    # 2|++><++| - I has four coefficients of magnitude 1/2
    plus = np.full(4, 0.5)
    d = 2 * np.outer(plus, plus) - np.eye(4)
    l1, l2, linf = norms(decompose(d))
    assert (l1, l2, linf) == pytest.approx((2.0, 1.0, 0.5))
    assert pauli_norm(d, 1) == pytest.approx(2.0)
    assert pauli_norm(d, math.inf) == pytest.approx(0.5)


@given(st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_unitary_has_unit_pauli_l2(n, seed):
    from scipy.stats import unitary_group

    u = unitary_group.rvs(1 << n, random_state=seed)
    assert pauli_norm(u, 2) == pytest.approx(1.0, abs=1e-10)


def test_nearly_sparse_certificate():
    c = PauliCoefficientMap(2, {"II": 0.9, "XX": 0.3, "ZZ": -0.1, "YI": 0.05j})
    support, residual = nearly_sparse_certificate(c, 2)
    assert support == ["II", "XX"]
    assert residual == pytest.approx(0.15)


def test_jsonl_round_trip(tmp_path):
    c = PauliCoefficientMap(3, {"XYZ": 0.25 - 0.5j, "III": 1.0})
    assert loads_jsonl(dumps_jsonl(c)) == c
    path = tmp_path / "c.jsonl"
    write_jsonl(c, path)
    assert read_jsonl(path) == c


def test_jsonl_requires_header():
    with pytest.raises(ValueError):
        loads_jsonl('{"pauli": "X", "re": 1.0}\n')
