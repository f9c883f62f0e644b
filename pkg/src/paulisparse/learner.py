"""Learning Pauli-sparse unitaries from Choi-state queries.

The pipeline has two query phases against a black-box :class:`UnitaryOracle`:

1. ``find_support``: Bell-sample ``m1`` Choi copies; every outcome ``s`` appears
   with probability ``|alpha_s|^2`` so all coefficients of size ``>= theta``
   show up with high probability.
2. ``estimate_coefficients``: two shadow rounds of ``m2`` copies each.  The first
   estimates ``|alpha_s|^2`` and picks the largest as the anchor ``t``; the
   second estimates ``alpha_s conj(alpha_t)`` through the ``R``/``I`` observables
   and divides by the anchor magnitude.  The common phase of ``alpha_t`` cannot
   be learned, so results match the truth only up to a global phase.

``learn_nearly_sparse`` and ``learn_l1_bounded`` set the thresholds and inner
accuracies for the two structural assumptions.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .pauli import PauliCoefficientMap, index_to_label, label_to_index
from .shadows import DEFAULT_C, estimate_all, m_family, ri_family
from .sim import UnitaryOracle, bell_sample, digits_to_index


class AnchorError(RuntimeError):
    """The anchor coefficient could not be told apart from estimation noise."""


@dataclass
class LearnConfig:
    theta: float
    epsilon: float
    delta: float
    sparsity_s: int | None = None
    l1_bound: float | None = None
    c_m1: float = 1.0
    c_m2: float = DEFAULT_C
    c_acc: float = 1.0 / 144
    backend: str = "auto"
    strict: bool = False

    def __post_init__(self):
        if not 0 < self.theta <= 1:
            raise ValueError(f"theta must lie in (0, 1], got {self.theta}")
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.strict and self.epsilon > self.theta**2 / 16:
            raise ValueError("strict mode requires epsilon <= theta^2 / 16")


@dataclass
class LearnReport:
    support_X: list[str]
    alpha_hat: PauliCoefficientMap
    anchor_t: str
    anchor_mag: float
    m1: int
    m2: int
    total_queries: int
    truncation_threshold: float
    theta: float = 0.0
    inner_epsilon: float = 0.0
    target_l1_error: float | None = None
    backend: str = ""
    config: dict = field(default_factory=dict)

    def to_json(self) -> str:
        d = {k: v for k, v in asdict(self).items() if k != "alpha_hat"}
        d["alpha_hat"] = [
            {"pauli": lab, "re": float(c.real), "im": float(c.imag)} for lab, c in self.alpha_hat.items()
        ]
        return json.dumps(d, indent=2, sort_keys=True)


def m1_budget(theta: float, delta: float, c_m1: float = 1.0) -> int:
    return math.ceil(c_m1 * (math.log(1 / theta**2) + math.log(1 / delta)) / theta**2)


def m2_budget(size_X: int, epsilon: float, delta: float, c_m2: float = DEFAULT_C) -> int:
    return math.ceil(c_m2 * math.log(max(size_X, 1) / delta) / epsilon**2)


def _sorted_labels(labels) -> list[str]:
    return sorted(set(labels), key=label_to_index)


def find_support(u: UnitaryOracle, cfg: LearnConfig, rng: np.random.Generator) -> list[str]:
    """Distinct Bell outcomes of ``m1`` Choi copies, in base-4 order."""
    m1 = m1_budget(cfg.theta, cfg.delta, cfg.c_m1)
    state = u.choi_copies(m1)
    idx = np.unique(digits_to_index(bell_sample(state, rng, m1)))
    return [index_to_label(int(s), u.n) for s in idx]


def estimate_coefficients(u: UnitaryOracle, X, cfg: LearnConfig, rng: np.random.Generator):
    """Estimate ``alpha_s`` for ``s`` in ``X`` up to a shared phase.

    Returns ``(alpha_hat, anchor_t, info)`` where ``info`` holds ``m2``, the
    anchor magnitude and the shadow backend that ran.
    """
    X = _sorted_labels(X)
    if not X:
        raise ValueError("support set is empty")
    m2 = m2_budget(len(X), cfg.epsilon, cfg.delta, cfg.c_m2)
    # round 1: squared magnitudes
    state = u.choi_copies(m2)
    est1 = estimate_all(state, m_family(X), m2, cfg.delta, rng, backend=cfg.backend)
    mags2 = est1.values
    j = int(np.argmax(mags2))  # first maximum = smallest index
    t = X[j]
    if mags2[j] <= cfg.epsilon:
        raise AnchorError(
            f"anchor estimate {mags2[j]:.3g} <= epsilon {cfg.epsilon:.3g}; "
            "threshold too large or m2 too small"
        )
    anchor = math.sqrt(max(mags2[j], 0.0))
    # round 2: alpha_s conj(alpha_t)
    others = [s for s in X if s != t]
    state = u.choi_copies(m2)
    est2 = estimate_all(state, ri_family(t, others), m2, cfg.delta, rng, backend=cfg.backend)
    vals = est2.values
    coeffs = {t: anchor}
    for i, s in enumerate(others):
        coeffs[s] = complex(vals[2 * i], vals[2 * i + 1]) / anchor
    info = {"m2": m2, "anchor_mag": anchor, "backend": est1.backend}
    return PauliCoefficientMap(u.n, coeffs), t, info


def coefficient_error_bound(epsilon: float, anchor_abs: float) -> float:
    """``3 sqrt(eps) / (|alpha_t| - sqrt(eps))`` (infinite if the denominator is not positive)."""
    d = anchor_abs - math.sqrt(epsilon)
    return math.inf if d <= 0 else 3 * math.sqrt(epsilon) / d


def align_phase(alpha_hat: PauliCoefficientMap, alpha_true: PauliCoefficientMap):
    """Least-squares phase ``phi`` with ``alpha_hat ~ e^{-i phi} alpha_true``.

    Returns ``(phi, max_err)`` over the union of both supports.
    """
    labels = sorted(set(alpha_hat.labels()) | set(alpha_true.labels()), key=label_to_index)
    a = np.array([alpha_true[s] for s in labels])
    b = np.array([alpha_hat[s] for s in labels])
    overlap = np.sum(a * b.conj())
    if abs(overlap) == 0:
        raise ValueError("estimated and true coefficients do not overlap")
    phi = float(np.angle(overlap)) % (2 * np.pi)
    err = float(np.max(np.abs(b - np.exp(-1j * phi) * a)))
    return phi, err


def aligned_distance(alpha_hat: PauliCoefficientMap, alpha_true: PauliCoefficientMap, p: int = 1) -> float:
    """``||alpha_true - e^{i phi} alpha_hat||_p`` at the least-squares phase."""
    phi, _ = align_phase(alpha_hat, alpha_true)
    diff = alpha_true - alpha_hat.scale(np.exp(1j * phi))
    v = np.array([c for _, c in diff.items()])
    return float(np.sum(np.abs(v) ** p) ** (1 / p)) if v.size else 0.0


def _run(u, cfg, rng, truncate: bool, target):
    start = u.queries
    X = find_support(u, cfg, rng)
    m1 = u.queries - start
    alpha, t, info = estimate_coefficients(u, X, cfg, rng)
    threshold = 0.0
    if truncate:
        eps2 = coefficient_error_bound(cfg.epsilon, info["anchor_mag"])
        threshold = 2 * eps2
        alpha = PauliCoefficientMap(u.n, {s: c for s, c in alpha.items() if abs(c) >= threshold or s == t})
    total = u.queries - start
    m2 = info["m2"]
    if total != m1 + 2 * m2:
        raise AssertionError(f"query count {total} != m1 + 2 m2 = {m1 + 2 * m2}")
    return LearnReport(
        support_X=X,
        alpha_hat=alpha,
        anchor_t=t,
        anchor_mag=info["anchor_mag"],
        m1=m1,
        m2=m2,
        total_queries=total,
        truncation_threshold=threshold,
        theta=cfg.theta,
        inner_epsilon=cfg.epsilon,
        target_l1_error=target,
        backend=info["backend"],
        config=asdict(cfg),
    )


def nearly_sparse_config(s: int, epsilon: float, delta: float, **kw) -> LearnConfig:
    c_acc = kw.pop("c_acc", 1.0 / 144)
    theta = epsilon / math.sqrt(s)
    inner = c_acc * epsilon**2 / s**3
    return LearnConfig(theta=theta, epsilon=inner, delta=delta, sparsity_s=s, c_acc=c_acc, **kw)


def l1_bounded_config(l1: float, epsilon: float, delta: float, **kw) -> LearnConfig:
    theta = epsilon**2 / (12 * l1)
    inner = epsilon**4 / (144 * l1**2)
    return LearnConfig(theta=theta, epsilon=inner, delta=delta, l1_bound=l1, **kw)


def learn_nearly_sparse(u: UnitaryOracle, s: int, epsilon: float, delta: float, rng, **kw) -> LearnReport:
    """Learn a nearly ``(s, epsilon)``-sparse unitary; target ``l1`` error ``2 epsilon``.

    Coefficients below ``2 eps2`` are dropped, except the anchor.
    """
    if s < 1:
        raise ValueError("sparsity must be >= 1")
    cfg = nearly_sparse_config(s, epsilon, delta, **kw)
    return _run(u, cfg, rng, truncate=True, target=2 * epsilon)


def learn_l1_bounded(u: UnitaryOracle, l1: float, epsilon: float, delta: float, rng, **kw) -> LearnReport:
    """Learn a unitary with Pauli ``l1`` norm at most ``l1``; target ``l2`` error ``epsilon``."""
    if l1 < 1:
        raise ValueError("a unitary has Pauli l1 norm >= 1")
    cfg = l1_bounded_config(l1, epsilon, delta, **kw)
    return _run(u, cfg, rng, truncate=False, target=epsilon)
