import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import unitary_group

from paulisparse import zoo
from paulisparse.learner import (
    AnchorError,
    LearnConfig,
    align_phase,
    aligned_distance,
    coefficient_error_bound,
    estimate_coefficients,
    find_support,
    l1_bounded_config,
    learn_l1_bounded,
    learn_nearly_sparse,
    m1_budget,
    m2_budget,
    nearly_sparse_config,
)
from paulisparse.oracles import grid_align
from paulisparse.pauli import PauliCoefficientMap, decompose
from paulisparse.rng import stream
from paulisparse.sim import UnitaryOracle

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CZ = np.diag([1, 1, 1, -1]).astype(complex)


def test_budgets_frozen():
    # (ln(1/0.09) + ln 10) / 0.09 = 52.34
    assert m1_budget(0.3, 0.1) == 53
    # 34 ln(40) / 0.02^2 = 313554.7
    assert m2_budget(4, 0.02, 0.1) == 313555


def test_mode_parameters():
    cfg = nearly_sparse_config(4, 0.05, 0.1)
    assert cfg.theta == pytest.approx(0.025)
    assert cfg.epsilon == pytest.approx(0.05**2 / (144 * 64))
    cfg = l1_bounded_config(2.0, 0.3, 0.1)
    assert cfg.theta == pytest.approx(0.09 / 24)
    assert cfg.epsilon == pytest.approx(0.3**4 / (144 * 4))


def test_config_validation():
    with pytest.raises(ValueError):
        LearnConfig(theta=0, epsilon=0.1, delta=0.1)
    with pytest.raises(ValueError):
        LearnConfig(theta=0.5, epsilon=0.1, delta=1.5)
    with pytest.raises(ValueError):
        LearnConfig(theta=0.2, epsilon=0.01, delta=0.1, strict=True)


def test_error_bound():
    assert coefficient_error_bound(0.01, 0.6) == pytest.approx(0.3 / 0.5)
    assert coefficient_error_bound(0.04, 0.1) == math.inf


@given(st.floats(0, 2 * np.pi), st.integers(0, 2**31 - 1))
def test_alignment_recovers_global_phase(phi, seed):
    rng = np.random.default_rng(seed)
    true = PauliCoefficientMap(1, {lab: complex(*rng.normal(size=2)) for lab in "IXYZ"})
    hat = true.scale(np.exp(-1j * phi))
    got, err = align_phase(hat, true)
    assert err < 1e-10
    assert aligned_distance(hat, true, 1) < 1e-10
    assert aligned_distance(hat, true, 2) < 1e-10


def test_alignment_agrees_with_grid_search():
    rng = np.random.default_rng(4)
    true = PauliCoefficientMap(2, {"II": 0.8, "XZ": 0.3j, "YY": -0.2})
    noisy = PauliCoefficientMap(2, {k: v * np.exp(-0.7j) + 0.02 * complex(*rng.normal(size=2)) for k, v in true.items()})
    phi, err = align_phase(noisy, true)
    grid_phi, grid_err = grid_align(noisy, true)
    # least squares and minimax phases differ slightly; both errors stay near the noise level
    assert abs(err - grid_err) < 0.02
    assert min(abs(phi - grid_phi), 2 * np.pi - abs(phi - grid_phi)) < 0.1


def test_support_contains_heavy_coefficients():
    cfg = LearnConfig(theta=0.3, epsilon=0.02, delta=0.1)
    for seed in range(10):
        X = find_support(UnitaryOracle(CZ), cfg, stream(seed, "support"))
        assert X == ["II", "IZ", "ZI", "ZZ"]


def test_coefficient_estimates_shot_level():
    cfg = LearnConfig(theta=0.3, epsilon=0.02, delta=0.1, backend="shots")
    u = UnitaryOracle(H)
    alpha, t, info = estimate_coefficients(u, ["X", "Z"], cfg, stream(1, "coef"))
    assert t == "X"
    _, err = align_phase(alpha, decompose(H))
    assert err <= coefficient_error_bound(cfg.epsilon, abs(decompose(H)[t]))
    assert u.queries == 2 * info["m2"]
    assert info["backend"] == "shots"


def test_anchor_error_when_signal_below_noise():
    u = unitary_group.rvs(8, random_state=3)
    cfg = LearnConfig(theta=0.5, epsilon=0.5, delta=0.1)
    with pytest.raises(AnchorError):
        estimate_coefficients(UnitaryOracle(u), ["XYZ", "ZZZ"], cfg, stream(0, "anchor"))


def test_end_to_end_shot_level_with_relaxed_accuracy():
    # exp(-0.2iX) is nearly (1, 0.2)-sparse; c_acc is raised so the run needs
    # only a few tens of thousands of snapshots
    rx = np.array([[np.cos(0.2), -1j * np.sin(0.2)], [-1j * np.sin(0.2), np.cos(0.2)]])
    u = UnitaryOracle(rx)
    rep = learn_nearly_sparse(u, 1, 0.3, 0.1, stream(2, "e2e"), c_acc=0.5, backend="shots")
    assert rep.backend == "shots"
    assert rep.m2 < 100_000
    assert rep.total_queries == rep.m1 + 2 * rep.m2 == u.queries
    assert rep.anchor_t == "I"
    assert aligned_distance(rep.alpha_hat, decompose(rx), 1) <= 2 * 0.3


def test_nearly_sparse_rotation_product_gaussian():
    u = zoo.build("rotprod", n=3)
    rep = learn_nearly_sparse(UnitaryOracle(u), 4, 0.05, 0.1, stream(3, "rot"))
    assert rep.backend == "gaussian"
    assert aligned_distance(rep.alpha_hat, decompose(u), 1) <= 0.1
    assert rep.anchor_t in rep.alpha_hat.labels()
    d = json.loads(rep.to_json())
    assert d["total_queries"] == d["m1"] + 2 * d["m2"]
    assert {"pauli", "re", "im"} <= set(d["alpha_hat"][0])


def test_l1_mode_grover():
    u = zoo.build("grover", n=2)
    rep = learn_l1_bounded(UnitaryOracle(u), 2.0, 0.3, 0.1, stream(4, "l1"))
    assert aligned_distance(rep.alpha_hat, decompose(u), 2) <= 0.3
    with pytest.raises(ValueError):
        learn_l1_bounded(UnitaryOracle(u), 0.5, 0.3, 0.1, stream(4, "l1"))


def test_learning_is_reproducible():
    u = zoo.build("cz")
    a = learn_nearly_sparse(UnitaryOracle(u), 4, 0.1, 0.1, stream(9, "r"))
    b = learn_nearly_sparse(UnitaryOracle(u), 4, 0.1, 0.1, stream(9, "r"))
    assert a.alpha_hat == b.alpha_hat
