"""Dense kernels: Householder QR, Cholesky, cyclic Jacobi and Gauss rules.

Everything here works on small-to-moderate dense matrices (N up to a few
hundred). NumPy is used for vectorised row/column updates; none of the
factorizations are delegated to LAPACK.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, NotPositiveDefiniteError, RankDeficiencyError

__all__ = [
    "COND_SENTINEL",
    "SpectralDiagnostics",
    "householder_qr",
    "qr_least_squares",
    "gram",
    "cholesky",
    "cholesky_solve",
    "jacobi_eigh",
    "sym_eigs",
    "diagnostics_from_eigenvalues",
    "golub_welsch",
]

COND_SENTINEL = 1e300
RANK_TOL = 1e-13


def householder_qr(D):
    """Compact Householder QR: returns ``(V, tau, R)``.

    Reflector ``j`` is ``I - tau_j v_j v_j^T`` with ``v_j`` stored in
    ``V[j:, j]`` (unit leading entry).
    """
    A = np.array(D, dtype=float)
    m, n = A.shape
    if m < n:
        raise ValueError(f"need at least as many rows as columns, got {m}x{n}")
    tau = np.zeros(n)
    V = np.zeros((m, n))
    for j in range(n):
        x = A[j:, j]
        # guard against overflow/underflow in the column norm
        scale = np.max(np.abs(x)) if x.size else 0.0
        if scale == 0.0:
            continue
        xs = x / scale
        sigma = scale * np.sqrt(xs @ xs)
        alpha = -sigma if x[0] >= 0 else sigma
        v = x.copy()
        v[0] -= alpha
        v0 = v[0]
        if v0 == 0.0:
            continue
        v /= v0
        t = -v0 / alpha
        A[j:, j:] -= t * np.outer(v, v @ A[j:, j:])
        A[j, j] = alpha
        A[j + 1:, j] = 0.0
        V[j:, j] = v
        tau[j] = t
    return V, tau, np.triu(A[:n, :])


def _apply_qt(V, tau, b):
    y = np.array(b, dtype=float)
    for j in range(V.shape[1]):
        if tau[j] == 0.0:
            continue
        v = V[j:, j]
        y[j:] -= tau[j] * v * (v @ y[j:])
    return y


def _back_substitute(R, y):
    n = R.shape[0]
    z = np.zeros(n)
    for i in range(n - 1, -1, -1):
        z[i] = (y[i] - R[i, i + 1:] @ z[i + 1:]) / R[i, i]
    return z


def qr_least_squares(D, b):
    """``argmin ||D z - b||_2`` via Householder QR.

    Raises :class:`RankDeficiencyError` when a diagonal entry of R falls
    below ``1e-13 * max |R_ii|``.
    """
    D = np.asarray(D, dtype=float)
    b = np.asarray(b, dtype=float)
    if b.shape != (D.shape[0],):
        raise ValueError(f"right-hand side has shape {b.shape}, expected ({D.shape[0]},)")
    V, tau, R = householder_qr(D)
    diag = np.abs(np.diag(R))
    if diag.size and (diag.max() == 0 or np.any(diag < RANK_TOL * diag.max())):
        col = int(np.argmax(diag < RANK_TOL * max(diag.max(), np.finfo(float).tiny)))
        raise RankDeficiencyError(f"design matrix is rank deficient at column {col}", column=col)
    y = _apply_qt(V, tau, b)
    return _back_substitute(R, y[: R.shape[0]])


def gram(D) -> np.ndarray:
    """``D^T D`` with exact symmetry (upper triangle mirrored)."""
    D = np.asarray(D, dtype=float)
    A = np.triu(D.T @ D)
    return A + np.triu(A, 1).T


def cholesky(A) -> np.ndarray:
    """Lower-triangular ``C`` with ``C C^T = A``."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    C = np.zeros_like(A)
    for j in range(n):
        piv = A[j, j] - C[j, :j] @ C[j, :j]
        if not piv > 0:
            raise NotPositiveDefiniteError(f"non-positive pivot {piv!r} at index {j}", pivot=j)
        C[j, j] = np.sqrt(piv)
        C[j + 1:, j] = (A[j + 1:, j] - C[j + 1:, :j] @ C[j, :j]) / C[j, j]
    return C


def cholesky_solve(A, f):
    C = cholesky(A)
    f = np.asarray(f, dtype=float)
    n = C.shape[0]
    w = np.zeros(n)
    for i in range(n):
        w[i] = (f[i] - C[i, :i] @ w[:i]) / C[i, i]
    return _back_substitute(C.T, w)


@lru_cache(maxsize=64)
def _round_robin(n: int):
    """Rounds of disjoint (p, q) pairs covering every pair once (circle method)."""
    players = list(range(n)) + ([None] if n % 2 else [])
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        pairs = [(players[i], players[size - 1 - i]) for i in range(size // 2)]
        pairs = [tuple(sorted(p)) for p in pairs if None not in p]
        if pairs:
            arr = np.array(pairs, dtype=np.intp)
            rounds.append((arr[:, 0], arr[:, 1]))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(A, vectors: bool = False, tol: float = 1e-14, max_sweeps: int = 50):
    """Cyclic Jacobi eigensolver for a symmetric matrix.

    Each sweep visits every off-diagonal pair once, in round-robin order so
    that the rotations of one round act on disjoint index pairs and can be
    applied together.

    Returns ascending eigenvalues, plus eigenvectors (columns) when asked.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError(f"expected a square matrix, got {A.shape}")
    norm = np.sqrt(np.sum(A * A))
    if norm > 0 and np.max(np.abs(A - A.T)) > 1e-12 * norm:
        raise ValueError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    V = np.eye(n) if vectors else None
    rounds = _round_robin(n)
    off = 0.0
    for sweep in range(max_sweeps + 1):
        upper = np.triu(A, 1)
        off = np.sqrt(2.0 * np.sum(upper * upper))
        if off <= tol * norm or n < 2:
            break
        if sweep == max_sweeps:
            raise ConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps (off-norm {off:.3e})", off_norm=off)
        for p, q in rounds:
            apq = A[p, q]
            active = apq != 0.0
            if not active.any():
                continue
            p, q, apq = p[active], q[active], apq[active]
            app, aqq = A[p, p], A[q, q]
            with np.errstate(over="ignore", divide="ignore"):
                theta = (aqq - app) / (2.0 * apq)
                big = np.abs(theta) > 1e150
                th = np.where(big, 1.0, theta)
                t = np.where(big, 0.5 / theta, np.sign(th) / (np.abs(th) + np.sqrt(th * th + 1.0)))
            t[theta == 0.0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            rp, rq = A[p, :], A[q, :]
            A[p, :] = c[:, None] * rp - s[:, None] * rq
            A[q, :] = s[:, None] * rp + c[:, None] * rq
            cp, cq = A[:, p], A[:, q]
            A[:, p] = cp * c - cq * s
            A[:, q] = cp * s + cq * c
            A[p, p] = app - t * apq
            A[q, q] = aqq + t * apq
            A[p, q] = 0.0
            A[q, p] = 0.0
            if vectors:
                vp, vq = V[:, p], V[:, q]
                V[:, p] = vp * c - vq * s
                V[:, q] = vp * s + vq * c
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    if vectors:
        return w[order], V[:, order]
    return w[order]


@dataclass(frozen=True)
class SpectralDiagnostics:
    eigenvalues: np.ndarray
    cond: float
    dist_to_identity: float

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])


def diagnostics_from_eigenvalues(w) -> SpectralDiagnostics:
    w = np.sort(np.asarray(w, dtype=float))
    lmax, lmin = w[-1], w[0]
    floor = max(1e-300, 1e-16 * abs(lmax))
    cond = COND_SENTINEL if lmin <= floor else max(1.0, lmax / lmin)
    return SpectralDiagnostics(w, float(cond), float(np.max(np.abs(w - 1.0))))


def sym_eigs(A) -> SpectralDiagnostics:
    """Eigenvalues of a symmetric matrix with condition number and ``max|lambda - 1|``."""
    return diagnostics_from_eigenvalues(jacobi_eigh(A))


def _jacobi_matrix(n, weight):
    k = np.arange(n, dtype=float)
    if weight == "hermite":
        return np.zeros(n), np.sqrt(k[1:] / 2.0), np.sqrt(np.pi)
    if weight == "laguerre":
        return 2.0 * k + 1.0, k[1:].copy(), 1.0
    raise ValueError(f"unknown weight {weight!r}; expected 'hermite' or 'laguerre'")


def _orthonormal_values(x, diag, off, mass):
    """Orthonormal polynomials ``p_0..p_{n-1}`` at x from the Jacobi recurrence."""
    n = diag.size
    P = np.empty((n + 1,) + x.shape)
    P[0] = 1.0 / np.sqrt(mass)
    prev = np.zeros_like(x)
    for k in range(n):
        b_prev = off[k - 1] if k >= 1 else 0.0
        b_next = off[k] if k < n - 1 else 1.0
        P[k + 1] = ((x - diag[k]) * P[k] - b_prev * prev) / b_next
        prev = P[k]
    return P


def golub_welsch(n: int, weight: str = "hermite"):
    """Gauss rule for ``exp(-y^2)`` on R (``'hermite'``) or ``exp(-y)`` on R+ (``'laguerre'``).

    Nodes are the eigenvalues of the symmetric tridiagonal Jacobi matrix,
    polished by Newton steps on its characteristic recurrence. Each weight
    is the squared first component of the matching normalized eigenvector,
    evaluated as ``1 / sum_k p_k(x)^2`` so tiny tail weights keep relative
    accuracy.
    """
    if not 1 <= n <= 128:
        raise ValueError(f"rule size must be in [1, 128], got {n}")
    diag, off, mass = _jacobi_matrix(n, weight)
    J = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    x = jacobi_eigh(J)
    for _ in range(3):
        P = _orthonormal_values(x, diag, off, mass)
        # p_n up to a constant: derivative via the Christoffel-Darboux identity
        ps = P[:n]
        dpn = np.sum(ps * ps, axis=0) / np.where(P[n - 1] == 0, 1.0, P[n - 1]) if n > 1 else None
        if n == 1:
            x = np.array([diag[0]])
            break
        step = P[n] / dpn
        step = np.where(np.isfinite(step), step, 0.0)
        x = x - step
    P = _orthonormal_values(x, diag, off, mass)
    w = 1.0 / np.sum(P[:n] ** 2, axis=0)
    order = np.argsort(x)
    return x[order], w[order]
