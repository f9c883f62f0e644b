import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm
from scipy.optimize import minimize
from scipy.stats import unitary_group

from paulisparse.metrics import (
    d_optphase,
    diamond_exact_unitary,
    diamond_upper,
    distance_report,
    l2_bound_check,
    min_phase_l1,
    min_phase_l2,
    restricted_closed_form,
    restricted_diamond_mm,
    tv_contractivity_check,
)
from paulisparse.oracles import grid_optphase
from paulisparse.rng import stream

Z = np.diag([1.0, -1.0]).astype(complex)


def hull_distance_oracle(u, v):
    """Distance from 0 to the convex hull of eig(u^dag v), by constrained minimization."""
    lam = np.linalg.eigvals(u.conj().T @ v)
    d = lam.size

    def f(p):
        return abs(p @ lam) ** 2

    best = math.inf
    for start in np.eye(d).tolist() + [np.full(d, 1 / d).tolist()]:
        res = minimize(
            f,
            start,
            bounds=[(0, 1)] * d,
            constraints=[{"type": "eq", "fun": lambda p: p.sum() - 1}],
            method="SLSQP",
            options={"ftol": 1e-14, "maxiter": 500},
        )
        best = min(best, res.fun)
    return 2 * math.sqrt(max(0.0, 1 - best))


def rz(theta):
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def pair(n, seed, scale=None):
    u = unitary_group.rvs(1 << n, random_state=seed)
    if scale is None:
        v = unitary_group.rvs(1 << n, random_state=seed + 1)
    else:
        rng = np.random.default_rng(seed)
        g = rng.normal(size=u.shape) + 1j * rng.normal(size=u.shape)
        v = expm(1j * scale * (g + g.conj().T) / 2) @ u
    return u, v


def test_known_values():
    assert diamond_exact_unitary(np.eye(2), Z) == pytest.approx(2.0)
    for theta in [0.1, 1.0, 2.5]:
        assert diamond_exact_unitary(np.eye(2), rz(theta)) == pytest.approx(2 * math.sin(theta / 2))
    assert d_optphase(np.eye(2), Z)[0] == pytest.approx(math.sqrt(2))
    assert restricted_diamond_mm(np.eye(2), Z) == pytest.approx(2.0)


def test_phase_invariance_and_phi_star():
    u = unitary_group.rvs(4, random_state=3)
    d, phi = d_optphase(u, np.exp(0.8j) * u)
    assert d < 1e-8
    assert phi == pytest.approx(0.8, abs=1e-6)
    assert restricted_diamond_mm(u, np.exp(0.8j) * u) < 1e-7
    assert diamond_exact_unitary(u, np.exp(0.8j) * u) < 1e-6


@pytest.mark.parametrize("seed", range(5))
def test_optphase_matches_grid_search(seed):
    u, v = pair(2, 10 * seed, scale=0.3)
    points = 20000
    got = d_optphase(u, v)[0]
    grid = grid_optphase(u, v, points)
    # the objective is 1-Lipschitz in theta for unitary v, so the grid overshoots by <= h/2
    assert got <= grid + 1e-9
    assert grid - got <= np.pi / points + 1e-9


@pytest.mark.parametrize("seed", range(6))
def test_exact_diamond_matches_hull_oracle(seed):
    u, v = pair(1 + seed % 2, 20 * seed, scale=0.4 if seed % 3 else None)
    assert diamond_exact_unitary(u, v) == pytest.approx(hull_distance_oracle(u, v), abs=1e-5)


@given(st.integers(1, 3), st.integers(0, 2**20), st.sampled_from([None, 0.05, 0.5]))
def test_metric_chain(n, seed, scale):
    u, v = pair(n, seed, scale)
    restricted = restricted_diamond_mm(u, v)
    exact = diamond_exact_unitary(u, v)
    d, _ = d_optphase(u, v)
    l1, _ = min_phase_l1(u, v)
    tol = 1e-8
    assert restricted <= exact + tol
    assert exact <= 2 * d + tol
    assert d <= l1 + tol
    assert exact <= diamond_upper(u, v) + tol


@given(st.integers(1, 3), st.integers(0, 2**20))
def test_restricted_three_routes(n, seed):
    u, v = pair(n, seed, 0.3)
    dense = restricted_diamond_mm(u, v, "dense")
    assert restricted_diamond_mm(u, v, "subspace") == pytest.approx(dense, abs=1e-10)
    assert restricted_closed_form(u, v) == pytest.approx(dense, abs=1e-8)


@given(st.integers(1, 3), st.integers(0, 2**20))
def test_l2_closed_form(n, seed):
    u, v = pair(n, seed, 0.3)
    N = u.shape[0]
    expect = math.sqrt(max(0.0, 2 - 2 * abs(np.trace(u.conj().T @ v)) / N))
    assert min_phase_l2(u, v) == pytest.approx(expect, abs=1e-8)


@given(st.integers(1, 3), st.integers(0, 2**20), st.floats(1e-3, 0.3))
def test_l2_bound_on_perturbations(n, seed, size):
    u = unitary_group.rvs(1 << n, random_state=seed)
    rng = np.random.default_rng(seed)
    v = u + size * (rng.normal(size=u.shape) + 1j * rng.normal(size=u.shape)) / (1 << n)
    nu, bound, actual = l2_bound_check(u, v)
    assert actual <= bound + 1e-9


def test_l2_bound_check_raises_on_violation(monkeypatch):
    import paulisparse.metrics as m

    monkeypatch.setattr(m, "restricted_diamond_mm", lambda u, v: 10.0)
    with pytest.raises(AssertionError):
        m.l2_bound_check(np.eye(2), Z)


def test_tv_contractivity():
    u, v = pair(1, 7, 0.5)
    restricted = restricted_diamond_mm(u, v)
    tv = tv_contractivity_check(u, v, 200, stream(0, "tv"))
    assert tv <= restricted / 2 + 1e-9
    assert tv > 0.8 * restricted / 2


def test_report_for_non_unitary_estimate():
    u = unitary_group.rvs(2, random_state=1)
    rep = distance_report(u, 0.9 * u)
    assert rep.d_diamond_exact is None
    assert rep.d_optphase == pytest.approx(0.1)
    assert rep.l2P_aligned == pytest.approx(0.1)


def test_shape_mismatch():
    with pytest.raises(ValueError):
        d_optphase(np.eye(2), np.eye(4))
