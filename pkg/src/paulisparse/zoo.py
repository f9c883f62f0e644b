"""Example unitary families with known Pauli structure, and their tail bounds.

Families (see :func:`build`):

``pauli``               a single Pauli string, ``label=...``
``mcp``                 multi-controlled phase ``I + (e^{i phi} - 1)|1^k><1^k|``
``grover``              diffusion ``2|+><+|^n - I``
``phase_oracle``        ``I - 2|x><x|``
``selective_phase``     ``I + (e^{i phi} - 1) Pi`` for a stabilizer projector ``Pi``
``rotation_product``    ``prod_j exp(-i theta_j P_j)``
``hamiltonian``         ``exp(-i t H)`` for a Pauli-sparse ``H``
``hadamard``, ``identity``, ``cz``  small named gates
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.linalg import expm

from .clifford import CliffordTableau
from .pauli import (
    PauliCoefficientMap,
    PauliString,
    decompose,
    identity_map,
    multiply,
    nearly_sparse_certificate,
    norms,
    pauli_mul,
    synthesize,
)
from .sim import check_unitary


def _bits(x, n: int) -> int:
    if isinstance(x, str):
        if len(x) != n or set(x) - {"0", "1"}:
            raise ValueError(f"bit string {x!r} does not have {n} bits")
        return int(x, 2)
    x = int(x)
    if not 0 <= x < 1 << n:
        raise ValueError(f"basis index {x} out of range for {n} qubits")
    return x


def multi_controlled_phase(k: int, phi: float) -> np.ndarray:
    if k < 1:
        raise ValueError("k must be >= 1")
    d = np.ones(1 << k, dtype=complex)
    d[-1] = np.exp(1j * phi)
    return np.diag(d)


def mcp_coefficients(k: int, phi: float) -> PauliCoefficientMap:
    """``alpha_{Z_S} = (e^{i phi} - 1)(-1)^{|S|} / 2^k`` plus ``1`` on the identity."""
    c = (np.exp(1j * phi) - 1) / 2**k
    entries = {}
    for mask in range(1 << k):
        lab = "".join("Z" if (mask >> (k - 1 - q)) & 1 else "I" for q in range(k))
        entries[lab] = c * (-1) ** bin(mask).count("1") + (1 if mask == 0 else 0)
    return PauliCoefficientMap(k, entries)


def grover_diffusion(n: int) -> np.ndarray:
    N = 1 << n
    plus = np.full(N, 1 / math.sqrt(N))
    return 2 * np.outer(plus, plus).astype(complex) - np.eye(N)


def grover_coefficients(n: int) -> PauliCoefficientMap:
    entries = {}
    for mask in range(1 << n):
        lab = "".join("X" if (mask >> (n - 1 - q)) & 1 else "I" for q in range(n))
        entries[lab] = 2.0 ** (1 - n) - (1 if mask == 0 else 0)
    return PauliCoefficientMap(n, entries)


def phase_oracle(n: int, x) -> np.ndarray:
    u = np.eye(1 << n, dtype=complex)
    i = _bits(x, n)
    u[i, i] = -1
    return u


def phase_oracle_coefficients(n: int, x) -> PauliCoefficientMap:
    xb = _bits(x, n)
    N = 1 << n
    entries = {}
    for mask in range(N):
        lab = "".join("Z" if (mask >> (n - 1 - q)) & 1 else "I" for q in range(n))
        sign = (-1) ** bin(mask & xb).count("1")
        entries[lab] = -2 / N * sign + (1 if mask == 0 else 0)
    return PauliCoefficientMap(n, entries)


def stabilizer_projector(generators) -> PauliCoefficientMap:
    """``prod_g (I + g) / 2`` for commuting, independent generators."""
    gens = [PauliString.from_label(g) if isinstance(g, str) else g for g in generators]
    if not gens:
        raise ValueError("need at least one generator")
    n = gens[0].n
    for a, b in combinations(gens, 2):
        if not a.commutes_with(b):
            raise ValueError(f"generators {a.label} and {b.label} anticommute")
    out = identity_map(n)
    for g in gens:
        factor = PauliCoefficientMap(n, {"I" * n: 0.5})
        factor = factor + PauliCoefficientMap(n, {g.label: 0.5 * 1j ** g.phase_exp})
        out = multiply(out, factor)
    if len(out) != 1 << len(gens):
        raise ValueError("generators are not independent")
    return out


def selective_phase(generators, phi: float) -> np.ndarray:
    proj = synthesize(stabilizer_projector(generators))
    return np.eye(proj.shape[0]) + (np.exp(1j * phi) - 1) * proj


def _rotation(theta: float, p: PauliString) -> np.ndarray:
    m = p.to_matrix()
    return math.cos(theta) * np.eye(m.shape[0]) - 1j * math.sin(theta) * m


@dataclass(frozen=True)
class RotationProduct:
    """``U = prod_j exp(-i theta_j P_j)`` with the first factor leftmost."""

    factors: tuple[tuple[float, str], ...]

    def __post_init__(self):
        fs = tuple((float(t), p.label if isinstance(p, PauliString) else str(p)) for t, p in self.factors)
        if not fs:
            raise ValueError("need at least one factor")
        if len({len(p) for _, p in fs}) != 1:
            raise ValueError("factors act on different qubit counts")
        if any(abs(t) >= math.pi / 2 for t, _ in fs):
            raise ValueError("angles must satisfy |theta| < pi/2")
        object.__setattr__(self, "factors", fs)

    @property
    def n(self) -> int:
        return len(self.factors[0][1])

    @property
    def m(self) -> int:
        return len(self.factors)

    @property
    def A(self) -> float:
        return float(sum(abs(math.tan(t)) for t, _ in self.factors))

    def matrix(self) -> np.ndarray:
        u = np.eye(1 << self.n, dtype=complex)
        for t, p in self.factors:
            u = u @ _rotation(t, PauliString.from_label(p))
        return u


@dataclass(frozen=True)
class SparseHamiltonian:
    """``H = sum_j h_j sigma^{s_j}`` with real ``h_j`` and distinct strings."""

    terms: tuple[tuple[float, str], ...]

    def __post_init__(self):
        ts = tuple((float(h), p.label if isinstance(p, PauliString) else str(p)) for h, p in self.terms)
        labels = [p for _, p in ts]
        if len(set(labels)) != len(labels):
            raise ValueError("Pauli terms must be distinct")
        if len({len(p) for p in labels}) > 1:
            raise ValueError("terms act on different qubit counts")
        object.__setattr__(self, "terms", ts)

    @property
    def n(self) -> int:
        return len(self.terms[0][1])

    @property
    def L(self) -> float:
        return float(sum(abs(h) for h, _ in self.terms))

    def coeffs(self) -> PauliCoefficientMap:
        return PauliCoefficientMap(self.n, {p: h for h, p in self.terms})

    def matrix(self) -> np.ndarray:
        return synthesize(self.coeffs()) if self.terms else np.zeros((1, 1))

    def evolution(self, t: float) -> np.ndarray:
        return expm(-1j * t * self.matrix())


def default_rotation_product(n: int, theta: float = 0.06) -> RotationProduct:
    """Nearest-neighbour ``ZZ`` rotations plus one ``X`` layer rotation, all at ``theta``."""
    if n == 1:
        return RotationProduct(((theta, "Z"), (theta, "X")))
    labels = ["I" * j + "ZZ" + "I" * (n - j - 2) for j in range(n - 1)]
    labels.append("X" * n)
    return RotationProduct(tuple((theta, lab) for lab in labels))


def subset_support(rp: RotationProduct, k: int) -> set[str]:
    """Strings reachable as products of at most ``k`` factors, phases dropped."""
    paulis = [PauliString.from_label(p) for _, p in rp.factors]
    out = {"I" * rp.n}
    for r in range(1, min(k, rp.m) + 1):
        for sub in combinations(paulis, r):
            acc = sub[0]
            for q in sub[1:]:
                acc = pauli_mul(acc, q)
            out.add(acc.phase_free().label)
    return out


def subset_tail_bound(rp: RotationProduct, k: int) -> tuple[int, float]:
    """``(sum_{r<=k} C(m, r), e^A A^{k+1} / (k+1)!)``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    s_bound = sum(math.comb(rp.m, r) for r in range(min(k, rp.m) + 1))
    A = rp.A
    return s_bound, math.exp(A) * A ** (k + 1) / math.factorial(k + 1)


def subset_residual(rp: RotationProduct, k: int) -> float:
    """Exact Pauli mass outside ``S_k`` by dense decomposition."""
    keep = subset_support(rp, k)
    return float(sum(abs(c) for s, c in decompose(rp.matrix()).items() if s not in keep))


def taylor_tail_bound(h: SparseHamiltonian, t: float, k: int):
    """``(sum_{l<=k} m^l, e^{|t|L} (|t|L)^{k+1} / (k+1)!, U_{<=k})``.

    The truncation is built with sparse Pauli products only.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    m = len(h.terms)
    support_bound = sum(m**ell for ell in range(k + 1))
    x = abs(t) * h.L
    eps = math.exp(x) * x ** (k + 1) / math.factorial(k + 1)
    H = h.coeffs()
    term = identity_map(h.n)
    total = identity_map(h.n)
    for ell in range(1, k + 1):
        term = multiply(term, H).scale(-1j * t / ell)
        total = total + term
    return support_bound, eps, total


def taylor_residual(h: SparseHamiltonian, t: float, k: int) -> float:
    _, _, trunc = taylor_tail_bound(h, t, k)
    return float(norms(decompose(h.evolution(t)) - trunc)[0])


def l1_propagation_check(h: SparseHamiltonian) -> tuple[float, float]:
    """``(||e^{iH}||_{1,P}, e^L)``; raises if the first exceeds the second."""
    u = expm(1j * h.matrix())
    l1 = norms(decompose(u))[0]
    bound = math.exp(h.L)
    if l1 > bound + 1e-9:
        raise AssertionError(f"||e^(iH)||_1,P = {l1} exceeds e^L = {bound}")
    return l1, bound


def clifford_conjugate_family(u: np.ndarray, c: CliffordTableau) -> np.ndarray:
    """``C u C^dag``; Pauli magnitudes are permuted, so sparsity parameters persist."""
    cm = c.to_matrix()
    if cm.shape != np.shape(u):
        raise ValueError("Clifford and unitary sizes differ")
    return cm @ u @ cm.conj().T


def sparsity_profile(u: np.ndarray, s: int) -> tuple[int, float]:
    support, residual = nearly_sparse_certificate(decompose(u), s)
    return len(support), residual


def _parse_factors(spec) -> list[tuple[float, str]]:
    if isinstance(spec, str):
        out = []
        for item in spec.split(","):
            ang, lab = item.split(":")
            out.append((float(ang), lab.strip()))
        return out
    return [(float(a), str(p)) for a, p in spec]


FAMILIES = (
    "identity",
    "pauli",
    "hadamard",
    "cz",
    "mcp",
    "grover",
    "phase_oracle",
    "selective_phase",
    "rotation_product",
    "rotprod",
    "hamiltonian",
)


def build(name: str, **params) -> np.ndarray:
    """Dense unitary for a family; see the module docstring for names."""
    name = name.replace("-", "_").lower()
    if name == "identity":
        u = np.eye(1 << int(params.get("n", 1)), dtype=complex)
    elif name == "pauli":
        u = PauliString.from_label(params["label"]).to_matrix()
    elif name == "hadamard":
        h = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
        u = h
        for _ in range(int(params.get("n", 1)) - 1):
            u = np.kron(u, h)
    elif name == "cz":
        u = multi_controlled_phase(2, math.pi)
    elif name == "mcp":
        u = multi_controlled_phase(int(params.get("k", 2)), float(params.get("phi", math.pi)))
    elif name == "grover":
        u = grover_diffusion(int(params.get("n", 2)))
    elif name == "phase_oracle":
        n = int(params.get("n", 2))
        u = phase_oracle(n, params.get("x", 0))
    elif name == "selective_phase":
        gens = params.get("generators", ["ZZ", "XX"])
        if isinstance(gens, str):
            gens = gens.split(",")
        u = selective_phase(gens, float(params.get("phi", math.pi / 2)))
    elif name in ("rotation_product", "rotprod"):
        if "factors" in params:
            rp = RotationProduct(tuple(_parse_factors(params["factors"])))
        else:
            rp = default_rotation_product(int(params.get("n", 3)), float(params.get("theta", 0.06)))
        u = rp.matrix()
    elif name == "hamiltonian":
        terms = _parse_factors(params["terms"])
        u = SparseHamiltonian(tuple(terms)).evolution(float(params.get("t", 1.0)))
    else:
        raise ValueError(f"unknown family {name!r}; choose from {', '.join(FAMILIES)}")
    check_unitary(u)
    return np.asarray(u, dtype=complex)
