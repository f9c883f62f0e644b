"""Distances between unitaries and their learned approximations.

All functions take dense matrices.  ``u`` is the reference (unitary) and ``v``
may be an arbitrary operator of the same size unless stated otherwise.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .pauli import pauli_coefficient_array
from .sim import check_unitary, is_unitary, num_qubits

GRID = 512
L1_GRID = 256
DENSE_EIG_MAX = 1024


def _same_shape(u, v):
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape or u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"operator shapes {u.shape} and {v.shape} differ")
    num_qubits(u.shape[0])
    return u, v


def _refine(f, grid: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    """Golden-section polish of the best grid point; returns ``(argmin, min)``."""
    j = int(np.argmin(values))
    h = grid[1] - grid[0]
    x0 = grid[j]
    lo, hi = x0 - h, x0 + h
    if not (f(lo) > values[j] < f(hi)):
        return float(x0), float(values[j])
    res = minimize_scalar(f, bracket=(lo, x0, hi), method="golden", tol=1e-10)
    if res.fun <= values[j]:
        return float(res.x), float(res.fun)
    return float(x0), float(values[j])


def d_optphase(u: np.ndarray, v: np.ndarray) -> tuple[float, float]:
    """``min_theta ||u - e^{i theta} v||_op``.

    Returns ``(value, phi_star)`` where ``v ~ e^{i phi_star} u`` at the optimum,
    i.e. ``phi_star = -theta_min`` modulo ``2 pi``.
    """
    u, v = _same_shape(u, v)
    grid = np.linspace(0, 2 * np.pi, GRID, endpoint=False)
    stack = u[None] - np.exp(1j * grid)[:, None, None] * v[None]
    vals = np.linalg.svd(stack, compute_uv=False)[:, 0]

    def f(t):
        return float(np.linalg.norm(u - np.exp(1j * t) * v, 2))

    theta, val = _refine(f, grid, vals)
    return val, float((-theta) % (2 * np.pi))


def _pauli_arrays(u, v):
    return pauli_coefficient_array(u).ravel(), pauli_coefficient_array(v).ravel()


def min_phase_l1(u: np.ndarray, v: np.ndarray) -> tuple[float, float]:
    """``min_phi ||u - e^{i phi} v||_{1,P}`` and its minimizer."""
    u, v = _same_shape(u, v)
    a, b = _pauli_arrays(u, v)
    grid = np.linspace(0, 2 * np.pi, L1_GRID, endpoint=False)
    vals = np.abs(a[None, :] - np.exp(1j * grid)[:, None] * b[None, :]).sum(axis=1)

    def f(t):
        return float(np.abs(a - np.exp(1j * t) * b).sum())

    phi, val = _refine(f, grid, vals)
    return val, phi % (2 * np.pi)


def min_phase_l2(u: np.ndarray, v: np.ndarray) -> float:
    """``min_phi ||u - e^{i phi} v||_{2,P}`` in closed form."""
    u, v = _same_shape(u, v)
    a, b = _pauli_arrays(u, v)
    sq = np.vdot(a, a).real + np.vdot(b, b).real - 2 * abs(np.vdot(b, a))
    return math.sqrt(max(sq, 0.0))


def diamond_upper(u: np.ndarray, v: np.ndarray) -> float:
    """Smaller of ``min_phi (2x + x^2)``, ``x = ||u - e^{i phi} v||_{1,P}``, and
    ``(||u||_op + ||v||_op) d_optphase(u, v)``."""
    u, v = _same_shape(u, v)
    check_unitary(u)
    x, _ = min_phase_l1(u, v)
    via_l1 = 2 * x + x * x
    d, _ = d_optphase(u, v)
    via_op = (np.linalg.norm(u, 2) + np.linalg.norm(v, 2)) * d
    return float(min(via_l1, via_op))


def diamond_exact_unitary(u: np.ndarray, v: np.ndarray) -> float:
    """Diamond distance of two unitary channels.

    With ``r`` the distance from the origin to the convex hull of the
    eigenvalues of ``u^dag v``, the value is ``2 sqrt(1 - r^2)``.  The
    eigenvalues sit on the unit circle, so ``r = cos(span / 2)`` for the
    shortest arc ``span`` covering them, and ``r = 0`` once ``span >= pi``.
    """
    u, v = _same_shape(u, v)
    check_unitary(u)
    check_unitary(v)
    ang = np.sort(np.angle(np.linalg.eigvals(u.conj().T @ v)) % (2 * np.pi))
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
    span = 2 * np.pi - gaps.max()
    r = 0.0 if span >= np.pi else math.cos(span / 2)
    return 2 * math.sqrt(max(0.0, 1 - r * r))


def _choi_vectors(u, v):
    N = u.shape[0]
    return u.reshape(-1) / math.sqrt(N), v.reshape(-1) / math.sqrt(N)


def restricted_diamond_mm(u: np.ndarray, v: np.ndarray, method: str = "auto") -> float:
    """Trace norm of ``|J(u)><J(u)| - |J(v)><J(v)|``.

    ``method="dense"`` diagonalizes the full difference; ``"subspace"`` does the
    same inside the (at most) two-dimensional span of the Choi vectors.
    """
    u, v = _same_shape(u, v)
    check_unitary(u)
    a, b = _choi_vectors(u, v)
    if method == "auto":
        method = "dense" if a.size <= DENSE_EIG_MAX else "subspace"
    if method == "dense":
        diff = np.outer(a, a.conj()) - np.outer(b, b.conj())
        return float(np.abs(np.linalg.eigvalsh(diff)).sum())
    if method == "subspace":
        q, _ = np.linalg.qr(np.stack([a, b], axis=1))
        pa, pb = q.conj().T @ a, q.conj().T @ b
        small = np.outer(pa, pa.conj()) - np.outer(pb, pb.conj())
        return float(np.abs(np.linalg.eigvalsh(small)).sum())
    raise ValueError(f"unknown method {method!r}")


def restricted_closed_form(u: np.ndarray, v: np.ndarray) -> float:
    """``2 sqrt(1 - |Tr(u^dag v)|^2 / N^2)`` for a unitary pair."""
    u, v = _same_shape(u, v)
    N = u.shape[0]
    f = abs(np.trace(u.conj().T @ v)) / N
    return 2 * math.sqrt(max(0.0, 1 - f * f))


def l2_bound_check(u: np.ndarray, v: np.ndarray) -> tuple[float, float, float]:
    """``(nu, 2 nu + nu^2, restricted distance)`` with ``nu = ||u - v||_{2,P}``.

    Raises ``AssertionError`` if the restricted distance exceeds the bound.
    """
    u, v = _same_shape(u, v)
    nu = float(np.linalg.norm(u - v) / math.sqrt(u.shape[0]))
    bound = 2 * nu + nu * nu
    actual = restricted_diamond_mm(u, v)
    if actual > bound + 1e-9:
        raise AssertionError(f"restricted distance {actual} exceeds 2 nu + nu^2 = {bound}")
    return nu, bound, actual


def _haar_columns(rng, dim, r):
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, rr = np.linalg.qr(z)
    q = q * (np.diag(rr) / np.abs(np.diag(rr)))[None, :]
    return q[:, :r]


def tv_contractivity_check(u: np.ndarray, v: np.ndarray, povm_samples: int, rng: np.random.Generator) -> float:
    """Largest TV distance seen under random two-outcome projective measurements.

    Even-numbered samples are Haar-random projectors of random rank on the
    whole Choi space; odd-numbered ones are Haar-random inside the span of the
    two Choi vectors, where the informative measurements live.  Every sample
    must respect ``TV <= restricted / 2``.
    """
    u, v = _same_shape(u, v)
    a, b = _choi_vectors(u, v)
    D = a.size
    span, _ = np.linalg.qr(np.stack([a, b], axis=1))
    if np.linalg.matrix_rank(np.stack([a, b], axis=1), tol=1e-12) < 2:
        span = span[:, :1]
    best = 0.0
    for j in range(povm_samples):
        if j % 2 == 0 or span.shape[1] < 2:
            r = int(rng.integers(1, D))
            q = _haar_columns(rng, D, r)
        else:
            q = span @ _haar_columns(rng, 2, 1)
        pa = np.linalg.norm(q.conj().T @ a) ** 2
        pb = np.linalg.norm(q.conj().T @ b) ** 2
        ta, tb = np.vdot(a, a).real, np.vdot(b, b).real
        tv = 0.5 * (abs(pa - pb) + abs((ta - pa) - (tb - pb)))
        best = max(best, float(tv))
    return best


@dataclass
class DistanceReport:
    d_optphase: float
    phi_star: float
    d_diamond_exact: float | None
    d_diamond_upper: float
    d_restricted_mm: float
    l1P_aligned: float
    l2P_aligned: float

    def to_dict(self) -> dict:
        return asdict(self)


def distance_report(u: np.ndarray, v: np.ndarray) -> DistanceReport:
    u, v = _same_shape(u, v)
    d, phi = d_optphase(u, v)
    exact = diamond_exact_unitary(u, v) if is_unitary(v) else None
    return DistanceReport(
        d_optphase=d,
        phi_star=phi,
        d_diamond_exact=exact,
        d_diamond_upper=diamond_upper(u, v),
        d_restricted_mm=restricted_diamond_mm(u, v),
        l1P_aligned=min_phase_l1(u, v)[0],
        l2P_aligned=min_phase_l2(u, v),
    )
