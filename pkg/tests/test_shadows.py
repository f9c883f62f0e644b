import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import unitary_group

from paulisparse.pauli import index_to_label, pauli_vector
from paulisparse.rng import stream
from paulisparse.shadows import (
    BellObservable,
    SnapshotBatch,
    collect,
    estimate_all,
    eval_snapshot,
    evaluate,
    exact_expectations,
    m_family,
    median_of_means,
    mom_batches,
    ri_family,
    shadow_budget,
    snapshot_covariance,
)
from paulisparse.sim import prepare_choi

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def random_observables(n, rng, count=3):
    labels = [index_to_label(int(i), n) for i in rng.choice(4**n, size=count + 1, replace=False)]
    return m_family(labels[:2]) + ri_family(labels[-1], labels[:-1])


@given(st.integers(1, 2), st.integers(0, 2**31 - 1))
def test_observable_values_equal_coefficient_products(n, seed):
    u = unitary_group.rvs(1 << n, random_state=seed)
    rng = np.random.default_rng(seed)
    obs = random_observables(n, rng)
    alpha = pauli_vector(u)
    from paulisparse.pauli import label_to_index

    expect = []
    for o in obs:
        a_s = alpha[label_to_index(o.s)]
        if o.kind == "M":
            expect.append(abs(a_s) ** 2)
        else:
            z = a_s * np.conj(alpha[label_to_index(o.t)])
            expect.append(z.real if o.kind == "R" else z.imag)
    psi = prepare_choi(u)
    dense = [np.vdot(psi, o.matrix() @ psi).real for o in obs]
    assert np.allclose(exact_expectations(psi, obs), expect, atol=1e-12)
    assert np.allclose(dense, expect, atol=1e-12)


def test_observable_matrices_are_hermitian_with_stated_trace():
    for o in [BellObservable("M", "XZ"), BellObservable("R", "XZ", "II"), BellObservable("I", "XZ", "YY")]:
        m = o.matrix()
        assert np.allclose(m, m.conj().T)
        assert np.isclose(np.trace(m).real, o.trace)


def test_r_and_i_need_anchor():
    with pytest.raises(ValueError):
        BellObservable("R", "X")
    with pytest.raises(ValueError):
        BellObservable("Q", "X")


def test_vectorized_evaluation_matches_dense_single_snapshot():
    rng = stream(1, "eval")
    psi = prepare_choi(unitary_group.rvs(4, random_state=1))
    obs = random_observables(2, np.random.default_rng(1))
    batch = collect(psi, 25, rng)
    fast = evaluate(batch, obs)
    D = psi.size
    for j, snap in enumerate(batch):
        w = snap.shadow_vector()
        for i, o in enumerate(obs):
            dense = (D + 1) * np.vdot(w, o.matrix() @ w).real - o.trace
            assert fast[i, j] == pytest.approx(dense, abs=1e-10)
            assert eval_snapshot(snap, o) == pytest.approx(dense, abs=1e-10)


def test_single_shot_estimates_are_unbiased_with_exact_covariance():
    psi = prepare_choi(np.array([[np.cos(0.3), -1j * np.sin(0.3)], [-1j * np.sin(0.3), np.cos(0.3)]]))
    obs = m_family(["I", "X", "Z"]) + ri_family("I", ["X", "Y"])
    vals = evaluate(collect(psi, 60000, stream(2, "bias")), obs)
    mu = exact_expectations(psi, obs)
    cov = snapshot_covariance(psi, obs)
    stderr = np.sqrt(np.diag(cov) / vals.shape[1])
    assert np.all(np.abs(vals.mean(axis=1) - mu) < 5 * stderr)
    assert np.allclose(np.cov(vals), cov, atol=0.05 * np.abs(cov).max())


def test_covariance_psd():
    psi = prepare_choi(unitary_group.rvs(4, random_state=5))
    cov = snapshot_covariance(psi, random_observables(2, np.random.default_rng(5)))
    assert np.allclose(cov, cov.T)
    assert np.linalg.eigvalsh(cov).min() > -1e-10


def test_gaussian_backend_matches_shot_backend_statistics():
    psi = prepare_choi(H)
    obs = m_family(["X", "Z"]) + ri_family("X", ["Z"])
    m, delta, reps = 3000, 0.1, 40
    shots = np.array([estimate_all(psi, obs, m, delta, stream(r, "s"), backend="shots").values for r in range(reps)])
    gauss = np.array([estimate_all(psi, obs, m, delta, stream(r, "g"), backend="gaussian").values for r in range(reps)])
    mu = exact_expectations(psi, obs)
    scale = np.maximum(shots.std(axis=0), gauss.std(axis=0))
    assert np.all(np.abs(shots.mean(axis=0) - mu) < 4 * scale / np.sqrt(reps) + 1e-3)
    assert np.all(np.abs(gauss.mean(axis=0) - mu) < 4 * scale / np.sqrt(reps) + 1e-3)
    ratio = gauss.std(axis=0) / shots.std(axis=0)
    assert np.all((ratio > 0.5) & (ratio < 2.0))


def test_auto_backend_switch():
    psi = prepare_choi(H)
    obs = m_family(["X"])
    assert estimate_all(psi, obs, 200, 0.1, stream(0, "a")).backend == "shots"
    assert estimate_all(psi, obs, 200, 0.1, stream(0, "a"), shot_limit=100).backend == "gaussian"
    with pytest.raises(ValueError):
        estimate_all(psi, obs, 5, 0.1, stream(0, "a"))


def test_median_of_means_lower_middle():
    v = np.array([1.0, 1.0, 5.0, 5.0, 2.0, 2.0, 9.0, 9.0])
    # batch means 1, 5, 2, 9 -> sorted 1, 2, 5, 9 -> lower middle 2
    assert median_of_means(v, 4) == 2.0
    assert median_of_means(v, 1) == pytest.approx(v.mean())
    rows = np.vstack([v, -v])
    assert median_of_means(rows, 4).tolist() == [2.0, -5.0]
    with pytest.raises(ValueError):
        median_of_means(v, 9)


def test_median_of_means_resists_outliers():
    rng = np.random.default_rng(0)
    v = rng.normal(size=1000)
    v[::100] = 1e6
    assert abs(median_of_means(v, 20)) < 0.5


def test_budgets():
    assert mom_batches(0.05, 4) == math.ceil(8 * math.log(160))
    # epsilon = delta = 0.05 with four observables
    assert shadow_budget(0.05, 0.05, 4) == 59596
    assert shadow_budget(10.0, 0.5, 1) == mom_batches(0.5, 1)


def test_snapshot_archive_round_trip(tmp_path):
    psi = prepare_choi(H)
    batch = collect(psi, 40, stream(3, "save"), stream="save")
    path = tmp_path / "shadows.jsonl"
    batch.save(path)
    back = SnapshotBatch.load(path)
    assert len(back) == 40 and back.stream == "save"
    obs = m_family(["X", "Y"])
    assert np.allclose(evaluate(back, obs), evaluate(batch, obs))
