"""Discrete least-squares fits on Hermite/Laguerre spaces.

A fit represents ``f(z) ~ sum_n c_n Phi_n(alpha * z)``. With a scaling
factor in play the design points ``y_k`` stay where the sampler put them
and the target is read at ``z_k = y_k / alpha`` (see :func:`fit_scaled`),
so the design matrix ``Phi_n(alpha * z_k) = Phi_n(y_k)`` keeps the
conditioning of the unscaled mapped points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from . import linalg
from .basis import BasisSpec, Family, eval_basis, hermite_table
from .errors import LinAlgError
from .sampling import SampleSet

__all__ = [
    "PlanRule",
    "SamplingPlan",
    "ScalingKind",
    "ScalingRule",
    "Fit",
    "assemble_design",
    "fit",
    "fit_scaled",
    "select_scaling",
    "linf_error",
    "expected_gram",
    "DEFAULT_EVAL_SEED",
]

DEFAULT_EVAL_SEED = 0x5EED_E7A1


class PlanRule(str, Enum):
    LINEAR = "linear"
    QUADRATIC = "quadratic"


@dataclass(frozen=True)
class SamplingPlan:
    rule: PlanRule
    c: float

    def __post_init__(self):
        object.__setattr__(self, "rule", PlanRule(self.rule))
        if not self.c > 0:
            raise ValueError(f"plan multiplier must be positive, got {self.c}")

    def m(self, N: int) -> int:
        """Number of evaluations for a space of dimension N (always > N)."""
        raw = self.c * N if self.rule is PlanRule.LINEAR else self.c * N * N
        m = math.ceil(raw - 1e-9 * raw)
        return m if m > N else N + 1


class ScalingKind(str, Enum):
    NONE = "none"
    MAXIMUM = "maximum"
    QUANTILE = "quantile"


@dataclass(frozen=True)
class ScalingRule:
    kind: ScalingKind = ScalingKind.NONE
    M: float = 1.0
    mu: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ScalingKind(self.kind))
        if self.kind is not ScalingKind.NONE and not self.M > 0:
            raise ValueError(f"effective support M must be positive, got {self.M}")
        if not 0 < self.mu <= 1:
            raise ValueError(f"mu must lie in (0, 1], got {self.mu}")


def select_scaling(samples, rule: ScalingRule) -> np.ndarray:
    """Per-coordinate scaling ``alpha_i = |y|_(k),i / M``.

    ``k = m`` for the maximum rule and ``k = floor(mu m)`` (1-based order
    statistic of the absolute values) for the quantile rule.
    """
    pts = samples.points if isinstance(samples, SampleSet) else np.asarray(samples, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    m, d = pts.shape
    if rule.kind is ScalingKind.NONE:
        return np.ones(d)
    k = m if rule.kind is ScalingKind.MAXIMUM else math.floor(rule.mu * m * (1 + 1e-12))
    if k < 1:
        raise ValueError(f"floor(mu*m) = {k} < 1 for mu={rule.mu}, m={m}")
    ordered = np.sort(np.abs(pts), axis=0)
    return ordered[k - 1] / rule.M


def assemble_design(spec: BasisSpec, samples) -> np.ndarray:
    pts = samples.points if isinstance(samples, SampleSet) else samples
    return eval_basis(spec, pts)


@dataclass
class Fit:
    spec: BasisSpec
    coefficients: np.ndarray
    samples: SampleSet | None
    diagnostics: linalg.SpectralDiagnostics | None
    residual_norm: float
    solver: str

    def __call__(self, points) -> np.ndarray:
        return eval_basis(self.spec, points) @ self.coefficients


def fit(spec: BasisSpec, samples, values, solver: str = "qr", diagnostics: bool = True) -> Fit:
    """Least-squares coefficients for ``values`` sampled at ``samples``.

    ``solver`` is ``"qr"`` (Householder on the design matrix) or
    ``"cholesky"`` (normal equations).
    """
    D = assemble_design(spec, samples)
    b = np.asarray(values, dtype=float)
    m, N = D.shape
    if b.shape != (m,):
        raise ValueError(f"got {b.shape[0] if b.ndim else 0} values for {m} samples")
    if m < N:
        raise ValueError(f"need at least N={N} samples, got {m}")
    A = linalg.gram(D) if (diagnostics or solver == "cholesky") else None
    try:
        if solver == "qr":
            c = linalg.qr_least_squares(D, b)
        elif solver == "cholesky":
            c = linalg.cholesky_solve(A, D.T @ b)
        else:
            raise ValueError(f"unknown solver {solver!r}")
    except LinAlgError as exc:
        seed = getattr(samples, "seed", None)
        exc.args = (f"{exc.args[0]} [family={spec.family.value}, m={m}, N={N}, seed={seed}]",)
        raise
    diag = linalg.sym_eigs(A) if diagnostics else None
    res = float(np.linalg.norm(D @ c - b))
    return Fit(spec, c, samples if isinstance(samples, SampleSet) else None, diag, res, solver)


def fit_scaled(family, index_set, design: SampleSet, target: Callable, rule: ScalingRule,
               solver: str = "qr", diagnostics: bool = True) -> Fit:
    """Choose ``alpha`` from the design points, then fit ``target`` at ``y / alpha``."""
    alpha = select_scaling(design, rule)
    z = design.rescaled(1.0 / alpha)
    spec = BasisSpec(Family(family), index_set, alpha)
    return fit(spec, z, target(z.points), solver=solver, diagnostics=diagnostics)


def linf_error(fitted: Fit, target: Callable, n_eval: int = 4000, eval_seed: int = DEFAULT_EVAL_SEED) -> float:
    """Max abs error on ``n_eval`` fresh points from the fit's own sampling law."""
    if fitted.samples is None:
        raise ValueError("fit carries no SampleSet to draw evaluation points from")
    z = fitted.samples.redraw(n_eval, eval_seed)
    return float(np.max(np.abs(fitted(z.points) - target(z.points))))


def expected_gram(K: int, L: float, step: float = 0.005) -> np.ndarray:
    """``A_ij = int (1 - tanh^2(y/L)) H~_i(y) H~_j(y) dy`` for i, j < K.

    Composite Simpson on ``[-Y, Y]`` with ``Y = min(20 L, y_cut)``;
    ``y_cut`` lies beyond the point where all K functions underflow.
    """
    if not 1 <= K <= 64:
        raise ValueError(f"K must be in [1, 64], got {K}")
    y_cut = math.sqrt(2 * K + 1) + 40.0
    Y = min(20.0 * L, y_cut)
    n = 2 * math.ceil(Y / step)
    y = np.linspace(-Y, Y, n + 1)
    h = 2 * Y / n
    w = np.full(n + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    w *= h / 3.0
    H = hermite_table(K - 1, y, functions=True)
    weight = w / np.cosh(y / L) ** 2
    A = H.T @ (weight[:, None] * H)
    return 0.5 * (A + A.T)
