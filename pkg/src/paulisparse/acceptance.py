"""The twelve acceptance criteria as plain functions.

Each ``criterion_N(seed)`` returns a :class:`CriterionResult`; the test suite
and the ``verify`` subcommand both call these, so there is one definition of
what passing means.  Thresholds are fixed here and never tuned per run.
"""
from __future__ import annotations

import math
import time
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.stats import chisquare, unitary_group

from . import zoo
from .clifford import conjugate_pauli, sample_uniform
from .learner import (
    LearnConfig,
    align_phase,
    aligned_distance,
    coefficient_error_bound,
    estimate_coefficients,
    find_support,
    learn_l1_bounded,
    learn_nearly_sparse,
)
from .lcu import C_LCU, LcuSpec, amplified_block, block_error
from .metrics import (
    d_optphase,
    diamond_exact_unitary,
    l2_bound_check,
    min_phase_l1,
    min_phase_l2,
    restricted_closed_form,
    restricted_diamond_mm,
)
from .oracles import (
    brute_force_coefficients,
    dense_conjugation,
    enumerate_clifford_group,
    exact_bell_distribution,
    repeated_trial,
)
from .pauli import (
    PauliCoefficientMap,
    PauliString,
    decompose,
    index_to_label,
    norms,
    pauli_vector,
    synthesize,
)
from .rng import stream
from .shadows import BellObservable, estimate_all, exact_expectations, shadow_budget
from .sim import UnitaryOracle, bell_sample, digits_to_index, prepare_choi


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number:2d} {self.title} ({self.seconds:.1f}s) {self.detail}"


def _timed(number, title):
    def wrap(fn):
        def run(seed: int = 0, **kw) -> CriterionResult:
            t0 = time.perf_counter()
            passed, detail = fn(seed, **kw)
            return CriterionResult(number, title, bool(passed), detail, time.perf_counter() - t0)

        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        run.number = number
        run.title = title
        return run

    return wrap


def _random_map(rng, n, size):
    labels = rng.choice(4**n, size=min(size, 4**n), replace=False)
    return PauliCoefficientMap(
        n, {index_to_label(int(s), n): complex(rng.normal(), rng.normal()) for s in labels}
    )


def _random_labels(rng, n, count, allow_identity=False):
    lo = 0 if allow_identity else 1
    return [index_to_label(int(s), n) for s in rng.choice(np.arange(lo, 4**n), size=count, replace=False)]


# ---------------------------------------------------------------------------

@_timed(1, "Pauli round-trip")
def criterion_1(seed):
    rng = stream(seed, "criterion-1")
    worst = 0.0
    for i in range(50):
        n = 1 + i % 3
        N = 1 << n
        a = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
        worst = max(worst, float(np.abs(synthesize(decompose(a)) - a).max()))
        worst = max(worst, float(np.abs(pauli_vector(a) - brute_force_coefficients(a)).max()))
        c = _random_map(rng, n, 6)
        back = decompose(synthesize(c))
        diff = (back - c).to_dict()
        worst = max(worst, max((abs(v) for v in diff.values()), default=0.0))
    return worst <= 1e-10, {"max_error": worst}


def zoo_members_small():
    """Every family at ``n <= 3`` used by the law and closed-form checks."""
    out = {
        "identity-1": zoo.build("identity", n=1),
        "identity-3": zoo.build("identity", n=3),
        "hadamard-1": zoo.build("hadamard", n=1),
        "hadamard-2": zoo.build("hadamard", n=2),
        "cz": zoo.build("cz"),
        "mcp-3": zoo.build("mcp", k=3, phi=0.7),
        "grover-2": zoo.build("grover", n=2),
        "grover-3": zoo.build("grover", n=3),
        "phase-oracle-2": zoo.build("phase_oracle", n=2, x="10"),
        "phase-oracle-3": zoo.build("phase_oracle", n=3, x="101"),
        "selective-phase": zoo.build("selective_phase", generators=["ZZ", "XX"], phi=math.pi / 2),
        "rotation-product": zoo.build("rotation_product", factors=[(0.06, "ZZI"), (0.06, "IXX"), (0.06, "YIY")]),
        "hamiltonian": zoo.build("hamiltonian", terms=[(0.3, "ZI"), (0.2, "IX")], t=1.0),
    }
    return out


@_timed(2, "Bell-sampling law")
def criterion_2(seed):
    worst = 0.0
    for name, u in zoo_members_small().items():
        p = exact_bell_distribution(u)
        alpha = pauli_vector(u)
        worst = max(worst, float(np.abs(p - np.abs(alpha) ** 2).max()))
    tvs = []
    for j in range(5):
        u = unitary_group.rvs(4, random_state=seed * 1000 + j)
        rng = stream(seed, "criterion-2", j)
        shots = 200_000
        idx = digits_to_index(bell_sample(prepare_choi(u), rng, shots))
        emp = np.bincount(idx, minlength=16) / shots
        tvs.append(0.5 * float(np.abs(emp - np.abs(pauli_vector(u)) ** 2).sum()))
    ok = worst <= 1e-10 and max(tvs) <= 0.03
    return ok, {"max_prob_error": worst, "max_tv": max(tvs)}


@_timed(3, "closed-form Pauli l1 norms")
def criterion_3(seed):
    errs = {}
    for n in (2, 3, 4):
        errs[f"grover-{n}"] = abs(norms(decompose(zoo.grover_diffusion(n)))[0] - (3 - 2.0 ** (2 - n)))
    for n in (2, 3):
        for x in range(1 << n):
            l1 = norms(decompose(zoo.phase_oracle(n, x)))[0]
            errs[f"oracle-{n}-{x}"] = abs(l1 - (3 - 4 / 2**n))
    for gens in (["ZZ", "XX"], ["ZZI", "IZZ"], ["XXX", "ZZI", "IZZ"], ["Z"]):
        errs["projector-" + ",".join(gens)] = abs(norms(zoo.stabilizer_projector(gens))[0] - 1)
        errs["projector-dense-" + ",".join(gens)] = abs(
            norms(decompose(synthesize(zoo.stabilizer_projector(gens))))[0] - 1
        )
    worst = max(errs.values())
    return worst <= 1e-12, {"max_error": worst}


def random_rotation_product(rng) -> tuple[zoo.RotationProduct, int]:
    n = int(rng.integers(2, 4))
    m = int(rng.integers(2, 6))
    labels = [index_to_label(int(s), n) for s in rng.integers(1, 4**n, size=m)]
    angles = rng.uniform(-0.4, 0.4, size=m)
    return zoo.RotationProduct(tuple(zip(angles, labels))), int(rng.integers(0, 3))


def random_hamiltonian(rng) -> tuple[zoo.SparseHamiltonian, float, int]:
    n = int(rng.integers(1, 4))
    m = int(rng.integers(1, min(5, 4**n - 1) + 1))
    labels = _random_labels(rng, n, m)
    h = zoo.SparseHamiltonian(tuple(zip(rng.uniform(-0.5, 0.5, size=m), labels)))
    return h, float(rng.uniform(0.1, 1.5)), int(rng.integers(0, 4))


@_timed(4, "tail propositions")
def criterion_4(seed):
    rng = stream(seed, "criterion-4")
    violations = 0
    worst_ratio = 0.0
    for _ in range(20):
        rp, k = random_rotation_product(rng)
        res = zoo.subset_residual(rp, k)
        bound = zoo.subset_tail_bound(rp, k)[1]
        violations += res > bound + 1e-12
        worst_ratio = max(worst_ratio, res / bound if bound > 0 else 0.0)
    for _ in range(20):
        h, t, k = random_hamiltonian(rng)
        res = zoo.taylor_residual(h, t, k)
        bound = zoo.taylor_tail_bound(h, t, k)[1]
        violations += res > bound + 1e-12
        worst_ratio = max(worst_ratio, res / bound if bound > 0 else 0.0)
    return violations == 0, {"violations": int(violations), "max_residual_over_bound": worst_ratio}


def _shadow_targets():
    h = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    z = np.diag([1.0, -1.0])
    rz = math.cos(0.3) * np.eye(2) - 1j * math.sin(0.3) * z
    I2 = np.eye(2)
    return {
        "J(H x I)": (np.kron(h, I2), "XI", "ZI"),
        "J(exp(-0.3iZ) x I)": (np.kron(rz, I2), "II", "ZI"),
    }


@_timed(5, "shadow unbiasedness")
def criterion_5(seed):
    eps, delta = 0.05, 0.05
    detail = {}
    ok = True
    for name, (u, t, s) in _shadow_targets().items():
        obs = [
            BellObservable("M", t),
            BellObservable("M", s),
            BellObservable("R", s, t),
            BellObservable("I", s, t),
        ]
        state = prepare_choi(u)
        exact = exact_expectations(state, obs)
        alpha = decompose(u)
        expected = np.array(
            [abs(alpha[t]) ** 2, abs(alpha[s]) ** 2, (alpha[s] * np.conj(alpha[t])).real, (alpha[s] * np.conj(alpha[t])).imag]
        )
        if np.abs(exact - expected).max() > 1e-12:
            return False, {"error": "exact expectations disagree with decomposition"}
        m = shadow_budget(eps, delta, len(obs))

        def trial(tseed, state=state, obs=obs, m=m, expected=expected):
            est = estimate_all(state, obs, m, delta, np.random.default_rng(tseed), backend="shots")
            return bool(np.abs(est.values - expected).max() <= eps)

        summ = repeated_trial(trial, 20, seed * 7919 + len(detail), name=name, threshold=18)
        detail[name] = f"{summ.passes}/20 at m={m}"
        ok &= summ.ok
    return ok, detail


def support_targets():
    h = zoo.build("hadamard", n=1)
    y = np.array([[0, -1j], [1j, 0]])
    return {
        "hadamard": h,
        "exp(-0.4iY)": math.cos(0.4) * np.eye(2) - 1j * math.sin(0.4) * y,
        "grover-2": zoo.grover_diffusion(2),
        "mcp-2-pi/2": zoo.multi_controlled_phase(2, math.pi / 2),
        "rotations-0.5-0.6": zoo.RotationProduct(((0.5, "ZI"), (0.6, "IX"))).matrix(),
    }


@_timed(6, "support recovery")
def criterion_6(seed):
    theta, delta = 0.3, 0.1
    cfg = LearnConfig(theta=theta, epsilon=0.01, delta=delta)
    detail, ok = {}, True
    for j, (name, u) in enumerate(support_targets().items()):
        big = {s for s, c in decompose(u).items() if abs(c) >= theta}

        def trial(tseed, u=u, big=big):
            found = set(find_support(UnitaryOracle(u), cfg, np.random.default_rng(tseed)))
            return big <= found

        summ = repeated_trial(trial, 50, seed * 104729 + j, p_success=1 - delta, name=name)
        detail[name] = f"{summ.passes}/50 (need {summ.threshold})"
        ok &= summ.ok
    return ok, detail


def coefficient_targets():
    y = np.array([[0, -1j], [1j, 0]])
    x = np.array([[0, 1], [1, 0]])
    z = np.diag([1.0, -1.0])
    return {
        "exp(-0.4iY)": math.cos(0.4) * np.eye(2) - 1j * math.sin(0.4) * y,
        "exp(-i(0.5X+0.3Z))": expm(-1j * (0.5 * x + 0.3 * z)),
    }


@_timed(7, "coefficient error")
def criterion_7(seed):
    inner, delta = 0.02, 0.1
    cfg = LearnConfig(theta=0.3, epsilon=inner, delta=delta, backend="shots")
    detail, ok = {}, True
    for j, (name, u) in enumerate(coefficient_targets().items()):
        truth = decompose(u)

        def trial(tseed, u=u, truth=truth):
            rng = np.random.default_rng(tseed)
            oracle = UnitaryOracle(u)
            X = find_support(oracle, cfg, rng)
            alpha, t, _ = estimate_coefficients(oracle, X, cfg, rng)
            _, err = align_phase(alpha, truth.restrict(X))
            return err <= coefficient_error_bound(inner, abs(truth[t]))

        summ = repeated_trial(trial, 20, seed * 15485863 + j, name=name, threshold=18)
        detail[name] = f"{summ.passes}/20"
        ok &= summ.ok
    return ok, detail


def sparse_targets():
    return {
        "cz": zoo.build("cz"),
        "rotation-product-3q": zoo.RotationProduct(((0.06, "ZZI"), (0.06, "IXX"), (0.06, "YIY"))).matrix(),
    }


def learned_sparse_outputs(seed, trials=20):
    """Learner reports for criterion 8, reused by the LCU check."""
    out = {}
    for j, (name, u) in enumerate(sparse_targets().items()):
        runs = []
        for i in range(trials):
            oracle = UnitaryOracle(u)
            rep = learn_nearly_sparse(oracle, 4, 0.05, 0.1, stream(seed, "criterion-8", j, i))
            runs.append((rep, oracle.queries))
        out[name] = (u, runs)
    return out


@_timed(8, "end-to-end nearly-sparse learning")
def criterion_8(seed, outputs=None):
    eps = 0.05
    outputs = outputs or learned_sparse_outputs(seed)
    detail, ok = {}, True
    for name, (u, runs) in outputs.items():
        truth = decompose(u)
        passes = 0
        queries_ok = True
        for rep, q in runs:
            passes += aligned_distance(rep.alpha_hat, truth, 1) <= 2 * eps
            queries_ok &= rep.total_queries == rep.m1 + 2 * rep.m2 == q
        detail[name] = f"{passes}/{len(runs)} queries_ok={queries_ok} backend={runs[0][0].backend}"
        ok &= passes >= 18 and queries_ok
    return ok, detail


def random_lcu_specs(rng, count=30):
    specs = []
    for i in range(count):
        n = 1 + i % 3
        size = int(rng.integers(1, 9))
        specs.append(LcuSpec(_random_map(rng, n, size)))
    return specs


@_timed(9, "LCU contract")
def criterion_9(seed, outputs=None):
    rng = stream(seed, "criterion-9")
    worst_block = max(block_error(s) for s in random_lcu_specs(rng))
    outputs = outputs or learned_sparse_outputs(seed)
    ratios = []
    for name, (u, runs) in outputs.items():
        truth = decompose(u)
        for rep, _ in runs:
            gamma = aligned_distance(rep.alpha_hat, truth, 1)
            spec = LcuSpec(rep.alpha_hat)
            dist, _ = d_optphase(u, amplified_block(spec))
            ratios.append(dist / (C_LCU * spec.a * math.sqrt(gamma)) if gamma > 0 else (0.0 if dist < 1e-9 else math.inf))
    ok = worst_block <= 1e-10 and max(ratios) <= 1
    return ok, {"max_block_error": worst_block, "max_dist_over_bound": max(ratios)}


def _perturbed(rng, u):
    alpha = decompose(u)
    items = alpha.items()
    if rng.random() < 0.5 and len(items) > 1:
        lab = items[int(rng.integers(len(items)))][0]
        return synthesize(alpha - alpha.restrict([lab]))
    noise = PauliCoefficientMap(alpha.n, {s: 0.05 * complex(rng.normal(), rng.normal()) for s, _ in items})
    return synthesize(alpha + noise)


@_timed(10, "metric chain")
def criterion_10(seed):
    rng = stream(seed, "criterion-10")
    chain_bad, closed_err = 0, 0.0
    for i in range(30):
        n = 1 + i % 3
        N = 1 << n
        u = unitary_group.rvs(N, random_state=rng.integers(2**31))
        if i % 2:
            v = unitary_group.rvs(N, random_state=rng.integers(2**31))
        else:
            h = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
            v = u @ expm(-0.1j * (h + h.conj().T))
        r = restricted_diamond_mm(u, v)
        e = diamond_exact_unitary(u, v)
        d, _ = d_optphase(u, v)
        l1, _ = min_phase_l1(u, v)
        tol = 1e-9
        chain_bad += not (r <= e + tol and e <= 2 * d + tol and 2 * d <= 2 * l1 + tol)
        closed_err = max(closed_err, abs(r - restricted_closed_form(u, v)))
    l2_bad = 0
    for i in range(20):
        u = unitary_group.rvs(1 << (1 + i % 3), random_state=rng.integers(2**31))
        try:
            l2_bound_check(u, _perturbed(rng, u))
        except AssertionError:
            l2_bad += 1
    ok = chain_bad == 0 and closed_err <= 1e-8 and l2_bad == 0
    return ok, {"chain_violations": chain_bad, "closed_form_error": closed_err, "l2_violations": l2_bad}


@_timed(11, "Clifford uniformity")
def criterion_11(seed):
    rng = stream(seed, "criterion-11")
    group = enumerate_clifford_group(1)
    counts = Counter(sample_uniform(1, rng) for _ in range(24000))
    unknown = set(counts) - group
    obs = np.array([counts.get(g, 0) for g in group])
    p = float(chisquare(obs).pvalue)
    worst = 0.0
    for i in range(100):
        k = 1 + i % 3
        t = sample_uniform(k, rng)
        p_str = PauliString.from_label(index_to_label(int(rng.integers(4**k)), k))
        img = conjugate_pauli(t, p_str)
        worst = max(worst, float(np.abs(dense_conjugation(t, p_str) - (1j**img.phase_exp) * img.phase_free().to_matrix()).max()))
    ok = not unknown and len(group) == 24 and p > 1e-3 and worst <= 1e-12
    return ok, {"chi2_p": p, "classes_seen": len(counts), "max_conj_error": worst}


def l1_targets():
    phi = math.pi / 2
    return {
        "grover-2": (zoo.grover_diffusion(2), 2.0),
        "selective-phase-ZZ,XX": (zoo.selective_phase(["ZZ", "XX"], phi), 1 + abs(np.exp(1j * phi) - 1)),
    }


@_timed(12, "bounded-l1 learning")
def criterion_12(seed):
    eps = 0.3
    detail, ok = {}, True
    for j, (name, (u, l1)) in enumerate(l1_targets().items()):
        passes = 0
        for i in range(20):
            rep = learn_l1_bounded(UnitaryOracle(u), l1, eps, 0.1, stream(seed, "criterion-12", j, i))
            v = synthesize(rep.alpha_hat)
            nu = min_phase_l2(u, v)
            rd = restricted_diamond_mm(u, v)
            passes += nu <= eps and rd <= 2 * eps + eps**2
        detail[name] = f"{passes}/20"
        ok &= passes >= 18
    return ok, detail


CRITERIA = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
    criterion_11,
    criterion_12,
]


def run_all(seed: int = 0, only=None) -> list[CriterionResult]:
    """Run the criteria in order; criterion 9 reuses the learner runs of criterion 8."""
    results = []
    shared = None
    for fn in CRITERIA:
        if only and fn.number not in only:
            continue
        if fn.number in (8, 9):
            shared = shared or learned_sparse_outputs(seed)
            results.append(fn(seed, outputs=shared))
        else:
            results.append(fn(seed))
    return results
