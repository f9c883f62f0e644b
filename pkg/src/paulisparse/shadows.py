"""Classical shadows with random Clifford measurements on Choi states.

A snapshot is a Clifford ``V`` and an outcome ``b``.  For an observable ``O``
on a ``D``-dimensional space the single-shot estimate is

    o_hat = (D + 1) <b| V O V^dag |b> - Tr O,

which is unbiased.  The Bell observables used by the learner have rank at most
two in the Bell basis, so ``<b|V O V^dag|b>`` only needs the overlaps
``c_u = <phi_u| V^dag |b>``:

    M_s      -> |c_s|^2
    R_{t,s}  -> Re(c_s conj(c_t))
    I_{t,s}  -> Im(c_s conj(c_t))

Two backends produce median-of-means estimates.  ``"shots"`` simulates every
snapshot.  ``"gaussian"`` draws the batch means from their normal limit using
the exact mean and the exact single-snapshot covariance (Cliffords form a
unitary 3-design); it is meant for budgets far beyond what can be simulated.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .clifford import CliffordTableau, apply_dagger_to_state, collect_arrays
from .sim import basis_state, bell_vector, num_qubits

DEFAULT_C = 34.0
CHUNK = 20000
SHOT_LIMIT = 1_000_000


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BellObservable:
    """``M_s``, ``R_{t,s}`` or ``I_{t,s}`` over Bell vectors; labels are Pauli strings."""

    kind: str
    s: str
    t: str | None = None

    def __post_init__(self):
        if self.kind not in ("M", "R", "I"):
            raise ValueError(f"unknown observable kind {self.kind!r}")
        if self.kind != "M" and (self.t is None or len(self.t) != len(self.s)):
            raise ValueError(f"{self.kind} observables need an anchor of matching length")

    @property
    def n(self) -> int:
        return len(self.s)

    @property
    def trace(self) -> float:
        return 1.0 if self.kind == "M" else 0.0

    def matrix(self) -> np.ndarray:
        """Dense operator on the ``2n``-qubit Choi space."""
        ps = bell_vector(self.s)
        if self.kind == "M":
            return np.outer(ps, ps.conj())
        pt = bell_vector(self.t)
        ts = np.outer(pt, ps.conj())
        if self.kind == "R":
            return 0.5 * (ts + ts.conj().T)
        return 0.5 * (-1j * ts + 1j * ts.conj().T)

    def value(self, c_s: complex, c_t: complex = 0) -> float:
        """``<w|O|w>`` from overlaps ``c_u = <phi_u|w>``."""
        if self.kind == "M":
            return float(abs(c_s) ** 2)
        z = c_s * np.conj(c_t)
        return float(z.real if self.kind == "R" else z.imag)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "s": self.s, "t": self.t}


def m_family(labels) -> list[BellObservable]:
    return [BellObservable("M", s) for s in labels]


def ri_family(anchor: str, labels) -> list[BellObservable]:
    out = []
    for s in labels:
        out.append(BellObservable("R", s, anchor))
        out.append(BellObservable("I", s, anchor))
    return out


# ---------------------------------------------------------------------------
# snapshots
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Snapshot:
    tableau: CliffordTableau
    outcome: int
    stream: str = ""
    vector: np.ndarray | None = field(default=None, repr=False)

    def shadow_vector(self) -> np.ndarray:
        """``V^dag |b>`` (global phase arbitrary)."""
        if self.vector is not None:
            return self.vector
        return apply_dagger_to_state(self.tableau, basis_state(self.outcome, self.tableau.k))

    def to_dict(self) -> dict:
        k = self.tableau.k
        return {
            "symplectic": self.tableau.symplectic.tolist(),
            "phases": self.tableau.phases.tolist(),
            "outcome": format(self.outcome, f"0{k}b"),
            "stream": self.stream,
        }


class SnapshotBatch:
    """Columnar storage for many snapshots; indexable like a list."""

    def __init__(self, k, symplectic, phases, outcomes, vectors=None, stream=""):
        self.k = int(k)
        self.symplectic = np.asarray(symplectic, dtype=np.uint8).reshape(-1, 2 * k, 2 * k)
        self.phases = np.asarray(phases, dtype=np.uint8).reshape(-1, 2 * k)
        self.outcomes = np.asarray(outcomes, dtype=np.int64).reshape(-1)
        self.stream = stream
        if vectors is None:
            vectors = np.array(
                [self._vector(i) for i in range(len(self.outcomes))], dtype=complex
            ).reshape(-1, 1 << k)
        self.vectors = vectors

    def _vector(self, i):
        t = CliffordTableau(self.k, self.symplectic[i], self.phases[i])
        return apply_dagger_to_state(t, basis_state(int(self.outcomes[i]), self.k))

    def __len__(self):
        return len(self.outcomes)

    def __getitem__(self, i) -> Snapshot:
        t = CliffordTableau(self.k, self.symplectic[i], self.phases[i])
        return Snapshot(t, int(self.outcomes[i]), self.stream, self.vectors[i])

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(json.dumps({"k": self.k, "stream": self.stream, "count": len(self)}) + "\n")
            for snap in self:
                fh.write(json.dumps(snap.to_dict()) + "\n")

    @classmethod
    def load(cls, path) -> "SnapshotBatch":
        with open(path) as fh:
            header = json.loads(fh.readline())
            rows = [json.loads(line) for line in fh if line.strip()]
        k = header["k"]
        sym = np.array([r["symplectic"] for r in rows], dtype=np.uint8).reshape(-1, 2 * k, 2 * k)
        ph = np.array([r["phases"] for r in rows], dtype=np.uint8).reshape(-1, 2 * k)
        out = np.array([int(r["outcome"], 2) for r in rows], dtype=np.int64)
        return cls(k, sym, ph, out, stream=header.get("stream", ""))


def collect(state: np.ndarray, m: int, rng: np.random.Generator, stream: str = "") -> SnapshotBatch:
    """``m`` random-Clifford snapshots of ``state``.

    The caller charges the query counter when ``state`` stands for Choi copies.
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    k = num_qubits(np.asarray(state).size)
    if m == 0:
        return SnapshotBatch(k, np.zeros((0, 2 * k, 2 * k)), np.zeros((0, 2 * k)), np.zeros(0), np.zeros((0, 1 << k), complex), stream)
    sym, ph, out, vec = collect_arrays(state, m, rng)
    return SnapshotBatch(k, sym, ph, out, vec, stream)


def _overlap_rows(observables) -> tuple[np.ndarray, list[int], list[int]]:
    """Bell vectors needed by ``observables`` and per-observable row indices."""
    labels: dict[str, int] = {}
    for o in observables:
        labels.setdefault(o.s, len(labels))
        if o.t is not None:
            labels.setdefault(o.t, len(labels))
    basis = np.array([bell_vector(lab) for lab in labels]).conj()
    si = [labels[o.s] for o in observables]
    ti = [labels[o.t] if o.t is not None else labels[o.s] for o in observables]
    return basis, si, ti


def _values_from_vectors(vectors: np.ndarray, observables, dim: int) -> np.ndarray:
    """``(len(observables), m)`` single-shot estimates from shadow vectors."""
    basis, si, ti = _overlap_rows(observables)
    c = basis @ vectors.T  # (labels, m)
    out = np.empty((len(observables), vectors.shape[0]))
    for j, o in enumerate(observables):
        cs, ct = c[si[j]], c[ti[j]]
        if o.kind == "M":
            raw = np.abs(cs) ** 2
        elif o.kind == "R":
            raw = (cs * ct.conj()).real
        else:
            raw = (cs * ct.conj()).imag
        out[j] = (dim + 1) * raw - o.trace
    return out


def eval_snapshot(snap: Snapshot, obs: BellObservable) -> float:
    """Single-snapshot unbiased estimate of ``Tr(O rho)``."""
    if 2 * obs.n != snap.tableau.k:
        raise ValueError("observable and snapshot sizes differ")
    w = snap.shadow_vector()
    c_s = np.vdot(bell_vector(obs.s), w)
    c_t = np.vdot(bell_vector(obs.t), w) if obs.t is not None else 0
    return (w.size + 1) * obs.value(c_s, c_t) - obs.trace


def evaluate(batch: SnapshotBatch, observables) -> np.ndarray:
    """All single-shot estimates, shape ``(len(observables), len(batch))``."""
    if not observables:
        return np.zeros((0, len(batch)))
    return _values_from_vectors(batch.vectors, observables, 1 << batch.k)


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------

def median_of_means(values, batches: int):
    """Median of contiguous batch means; even counts take the lower-middle one.

    ``values`` may be 2-D, in which case rows are aggregated independently.
    """
    v = np.asarray(values, dtype=float)
    if batches < 1:
        raise ValueError("batches must be >= 1")
    if v.shape[-1] == 0:
        raise ValueError("empty input")
    if v.shape[-1] < batches:
        raise ValueError(f"{v.shape[-1]} values cannot fill {batches} batches")
    size = v.shape[-1] // batches
    means = v[..., : size * batches].reshape(*v.shape[:-1], batches, size).mean(axis=-1)
    return _lower_median(means)


def _lower_median(means: np.ndarray):
    srt = np.sort(means, axis=-1)
    med = srt[..., (srt.shape[-1] - 1) // 2]
    return float(med) if np.ndim(med) == 0 else med


def mom_batches(delta: float, num_observables: int) -> int:
    return math.ceil(8 * math.log(2 * max(num_observables, 1) / delta))


def shadow_budget(epsilon: float, delta: float, num_observables: int, C: float = DEFAULT_C) -> int:
    """``m = ceil(C ln(M / delta) / epsilon^2)``, never below the batch count."""
    m = math.ceil(C * math.log(max(num_observables, 1) / delta) / epsilon**2)
    return max(m, mom_batches(delta, num_observables))


# ---------------------------------------------------------------------------
# exact moments (used by the gaussian backend and by tests)
# ---------------------------------------------------------------------------

def exact_expectations(state: np.ndarray, observables) -> np.ndarray:
    """``<state|O|state>`` for each observable via Bell overlaps."""
    state = np.asarray(state, dtype=complex)
    basis, si, ti = _overlap_rows(observables)
    c = basis @ state
    return np.array([o.value(c[si[j]], c[ti[j]]) for j, o in enumerate(observables)])


def snapshot_covariance(state: np.ndarray, observables) -> np.ndarray:
    """Exact covariance of single-snapshot estimates for a pure ``state``.

    Uses the third moment of a uniformly random stabilizer vector, which equals
    the Haar value because Cliffords form a 3-design.
    """
    state = np.asarray(state, dtype=complex)
    D = state.size
    M = len(observables)
    mats = [o.matrix() for o in observables]
    tr = np.array([o.trace for o in observables])
    mu = exact_expectations(state, observables)
    ov = np.array([m @ state for m in mats])  # O_i |psi>
    rho_oo = (ov.conj() @ ov.T).real  # Re <psi|O_i O_j|psi>
    flat = np.array([m.reshape(-1) for m in mats])
    tr_oo = (flat @ np.array([m.T.reshape(-1) for m in mats]).T).real  # Tr(O_i O_j)
    # f(rho, Oi, Oj) * D(D+1)(D+2) / D
    f = (
        np.outer(tr, tr)
        + np.add.outer(mu, np.zeros(M)) * tr[None, :]
        + np.add.outer(np.zeros(M), mu) * tr[:, None]
        + tr_oo
        + 2 * rho_oo
    ) / ((D + 1) * (D + 2))
    g = (tr + mu) / (D + 1)
    second = (D + 1) ** 2 * f - (D + 1) * (np.outer(g, tr) + np.outer(tr, g)) + np.outer(tr, tr)
    return second - np.outer(mu, mu)


# ---------------------------------------------------------------------------
# estimation
# ---------------------------------------------------------------------------

@dataclass
class ShadowEstimate:
    values: np.ndarray
    m: int
    batches: int
    backend: str


def estimate_all(
    state: np.ndarray,
    observables,
    m: int,
    delta: float,
    rng: np.random.Generator,
    backend: str = "auto",
    shot_limit: int = SHOT_LIMIT,
) -> ShadowEstimate:
    """Median-of-means estimates of ``Tr(O rho)`` from ``m`` snapshots."""
    observables = list(observables)
    if not observables:
        return ShadowEstimate(np.zeros(0), m, 0, "none")
    K = mom_batches(delta, len(observables))
    if m < K:
        raise ValueError(f"m = {m} is below the {K} median-of-means batches")
    if backend == "auto":
        backend = "shots" if m <= shot_limit else "gaussian"
    if backend == "shots":
        vals = _shots_values(state, observables, m, rng)
        return ShadowEstimate(median_of_means(vals, K), m, K, "shots")
    if backend == "gaussian":
        return ShadowEstimate(_gaussian_mom(state, observables, m, K, rng), m, K, "gaussian")
    raise ValueError(f"unknown backend {backend!r}")


def _shots_values(state, observables, m, rng) -> np.ndarray:
    state = np.ascontiguousarray(state, dtype=complex)
    out = np.empty((len(observables), m))
    for lo in range(0, m, CHUNK):
        hi = min(m, lo + CHUNK)
        _, _, _, vec = collect_arrays(state, hi - lo, rng)
        out[:, lo:hi] = _values_from_vectors(vec, observables, state.size)
    return out


def _gaussian_mom(state, observables, m, K, rng) -> np.ndarray:
    size = m // K
    mu = exact_expectations(state, observables)
    cov = snapshot_covariance(state, observables) / size
    # eigen-factorization tolerates the rank deficiency of the covariance
    w, q = np.linalg.eigh(cov)
    root = q * np.sqrt(np.clip(w, 0, None))
    means = mu[None, :] + rng.standard_normal((K, len(mu))) @ root.T
    return _lower_median(means.T)
