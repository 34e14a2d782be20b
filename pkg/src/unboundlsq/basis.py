"""Hermite and Laguerre polynomials/functions and their tensor products.

Conventions
-----------
* Hermite polynomials are orthonormal with respect to ``exp(-y**2)`` on R.
* Laguerre polynomials are the classical ones, already orthonormal with
  respect to ``exp(-y)`` on [0, inf).
* Hermite/Laguerre *functions* carry the square root of that weight,
  ``exp(-y**2/2) H_k`` and ``exp(-y/2) L_k``, and are orthonormal in the
  Lebesgue sense.

Function variants run the three-term recurrence on values that already
include the exponential factor, so large arguments underflow to zero
instead of overflowing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError
from .multiindex import IndexSet

__all__ = [
    "Family",
    "BasisSpec",
    "TailConstant",
    "hermite_table",
    "laguerre_table",
    "eval_table",
    "eval_hermite_poly",
    "eval_hermite_func",
    "eval_laguerre_poly",
    "eval_laguerre_func",
    "eval_basis",
    "eval_basis_row",
    "estimate_tau",
]

PI_M14 = np.pi ** -0.25


class Family(str, Enum):
    HERMITE_POLY = "hermite-poly"
    HERMITE_FUNC = "hermite-func"
    LAGUERRE_POLY = "laguerre-poly"
    LAGUERRE_FUNC = "laguerre-func"

    @property
    def is_laguerre(self) -> bool:
        return self in (Family.LAGUERRE_POLY, Family.LAGUERRE_FUNC)

    @property
    def is_function(self) -> bool:
        return self in (Family.HERMITE_FUNC, Family.LAGUERRE_FUNC)

    @property
    def domain(self) -> str:
        return "R+" if self.is_laguerre else "R"

    @property
    def weight(self) -> str:
        """Measure under which the family is orthonormal."""
        return {
            Family.HERMITE_POLY: "exp(-y^2)",
            Family.HERMITE_FUNC: "lebesgue(R)",
            Family.LAGUERRE_POLY: "exp(-y)",
            Family.LAGUERRE_FUNC: "lebesgue(R+)",
        }[self]


def hermite_table(q: int, y, functions: bool = False) -> np.ndarray:
    """Values of orders ``0..q`` at ``y``; shape ``y.shape + (q + 1,)``."""
    y = np.asarray(y, dtype=float)
    out = np.empty(y.shape + (q + 1,))
    h0 = np.full(y.shape, PI_M14)
    if functions:
        h0 = h0 * np.exp(-0.5 * y * y)
    out[..., 0] = h0
    if q >= 1:
        out[..., 1] = np.sqrt(2.0) * y * h0
    for k in range(1, q):
        out[..., k + 1] = (np.sqrt(2.0 / (k + 1)) * y * out[..., k]
                           - np.sqrt(k / (k + 1)) * out[..., k - 1])
    return out


def _check_nonnegative(y, what="y"):
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        bad = y[y < 0].flat[0]
        raise DomainError(f"Laguerre family needs {what} >= 0, got {bad!r}")
    return y


def laguerre_table(q: int, y, functions: bool = False) -> np.ndarray:
    """Laguerre values of orders ``0..q``; ``y`` must be non-negative."""
    y = _check_nonnegative(y)
    out = np.empty(y.shape + (q + 1,))
    l0 = np.exp(-0.5 * y) if functions else np.ones(y.shape)
    out[..., 0] = l0
    if q >= 1:
        out[..., 1] = (1.0 - y) * l0
    for k in range(1, q):
        out[..., k + 1] = ((2 * k + 1 - y) * out[..., k] - k * out[..., k - 1]) / (k + 1)
    return out


def eval_table(family, q: int, y) -> np.ndarray:
    family = Family(family)
    if family.is_laguerre:
        return laguerre_table(q, y, functions=family.is_function)
    return hermite_table(q, y, functions=family.is_function)


def _single(family, k, y):
    if k < 0:
        raise ValueError(f"order must be >= 0, got {k}")
    v = eval_table(family, k, y)[..., k]
    return float(v) if np.ndim(v) == 0 else v


def eval_hermite_poly(k: int, y):
    return _single(Family.HERMITE_POLY, k, y)


def eval_hermite_func(k: int, y):
    return _single(Family.HERMITE_FUNC, k, y)


def eval_laguerre_poly(k: int, y):
    return _single(Family.LAGUERRE_POLY, k, y)


def eval_laguerre_func(k: int, y):
    return _single(Family.LAGUERRE_FUNC, k, y)


@dataclass(frozen=True)
class BasisSpec:
    """Tensorized family on an index set, evaluated at ``alpha * y``."""

    family: Family
    index_set: IndexSet
    alpha: np.ndarray = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        d = self.index_set.d
        alpha = np.ones(d) if self.alpha is None else np.broadcast_to(
            np.asarray(self.alpha, dtype=float), (d,)).copy()
        if not np.all(alpha > 0) or not np.all(np.isfinite(alpha)):
            raise ValueError(f"scaling factors must be positive and finite, got {alpha}")
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)

    @property
    def dim(self) -> int:
        return self.index_set.d

    @property
    def size(self) -> int:
        return self.index_set.cardinality

    def with_alpha(self, alpha) -> "BasisSpec":
        return BasisSpec(self.family, self.index_set, alpha)


def eval_basis(spec: BasisSpec, points) -> np.ndarray:
    """Matrix ``(Phi_n(alpha * y_k))`` of shape ``(m, N)``.

    One-dimensional tables of orders ``0..q`` are computed once per
    coordinate and combined by the index set.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None] if spec.dim == 1 else pts[None, :]
    if pts.shape[1] != spec.dim:
        raise ValueError(f"points have dimension {pts.shape[1]}, basis has {spec.dim}")
    scaled = pts * spec.alpha
    if spec.family.is_laguerre and np.any(scaled < 0):
        row, col = np.argwhere(scaled < 0)[0]
        raise DomainError(
            f"Laguerre family needs non-negative arguments; coordinate {col} "
            f"of point {row} is {pts[row, col]!r}")
    idx = spec.index_set.indices
    q = int(idx.max()) if idx.size else 0
    out = np.ones((pts.shape[0], idx.shape[0]))
    for i in range(spec.dim):
        table = eval_table(spec.family, q, scaled[:, i])
        out *= table[:, idx[:, i]]
    return out


def eval_basis_row(spec: BasisSpec, point) -> np.ndarray:
    point = np.asarray(point, dtype=float).reshape(1, -1)
    return eval_basis(spec, point)[0]


@dataclass(frozen=True)
class TailConstant:
    K: int
    tau: float


def _tail_violations(K, grid):
    vals = np.abs(hermite_table(K - 1, grid, functions=True)).max(axis=-1)
    return vals > grid ** -1.5


def estimate_tau(K: int, step: float = 0.01) -> TailConstant:
    """Smallest grid value beyond which ``|H~_k(y)| <= |y|**-1.5`` for all k < K.

    By symmetry only ``y > 0`` is scanned.  The upper end of the grid is
    pushed out until every function has underflowed to zero, and the answer
    is re-checked on a grid ten times finer.
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    y_max = np.sqrt(2.0 * K + 1.0) + 10.0
    while np.any(hermite_table(K - 1, y_max, functions=True) != 0.0):
        y_max += 5.0

    n = int(round(y_max / step))
    coarse = np.arange(1, n + 1) * step
    bad = np.flatnonzero(_tail_violations(K, coarse))
    tau = coarse[bad[-1]] if bad.size else step

    for _ in range(n):
        fine = tau + np.arange(1, 10 * int(round((y_max - tau) / step)) + 1) * (step / 10)
        bad = np.flatnonzero(_tail_violations(K, fine))
        if bad.size == 0:
            return TailConstant(K, float(tau))
        tau = np.ceil(fine[bad[-1]] / step) * step
    raise RuntimeError(f"tail audit for K={K} did not terminate; basis evaluation is suspect")
