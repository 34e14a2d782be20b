"""Two parametric UQ applications with independent reference values.

Random ODE
    ``df/dt = -beta*y*f``, ``f(0) = 1``, exponential input ``y``; the QoI is
    the second moment ``int_0^inf exp(-y) f(t, y)^2 dy = 1 / (1 + 2 beta t)``.

Elliptic problem
    ``-(a(x, y) u')' = sin(pi x)`` on (0, 1), ``u(0) = u(1) = 0``; the QoI is
    ``int exp(-|y|^2/2) u(x0, y)^2 dy``.

Both QoIs are computed by fitting the weighted integrand with Laguerre or
Hermite functions and integrating the expansion term by term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from . import lsq
from .basis import BasisSpec, Family, eval_basis, hermite_table
from .errors import DivergentQoIError, ReferenceNotConvergedError, SampleRejectedError
from .linalg import golub_welsch
from .multiindex import build_index_set
from .sampling import MappingSpec, SampleSet, derive_trial_seed, sample

__all__ = [
    "OdeModel",
    "EllipticModel",
    "Coefficient",
    "QoIResult",
    "ode_solution",
    "ode_rk4",
    "ode_qoi_reference",
    "ode_effective_support",
    "ode_qoi_lsq",
    "laguerre_func_integral",
    "hermite_func_integral",
    "elliptic_exact_single",
    "elliptic_qoi_single_reference",
    "FEMSolution",
    "elliptic_solve_fem",
    "solve_fem_batch",
    "elliptic_qoi_single",
    "elliptic_qoi_threeparam",
    "reference_qoi_tensor_quad",
    "A_FLOOR",
]

A_FLOOR = 1e-8


@dataclass(frozen=True)
class QoIResult:
    approx: float
    reference: float
    abs_error: float
    metadata: dict = field(default_factory=dict)
    fit: lsq.Fit | None = field(default=None, repr=False, compare=False)


# -- random ODE -----------------------------------------------------------------

@dataclass(frozen=True)
class OdeModel:
    beta: float = 1.5
    t: float = 1.0
    solver: str = "analytic"  # or "rk4": integrate each sample numerically

    def solve(self, y):
        if self.solver == "rk4":
            return ode_rk4(self.t, y, self.beta)
        return ode_solution(self.t, y, self.beta)

    def integrand(self, y):
        """``exp(-y) f(t, y)^2``, the function actually fitted."""
        y = np.asarray(y, dtype=float)
        return np.exp(-y) * self.solve(y) ** 2


def ode_solution(t, y, beta):
    if np.any(np.asarray(y) < 0) or t < 0:
        raise ValueError("ODE model needs y >= 0 and t >= 0")
    return np.exp(-beta * np.asarray(y, dtype=float) * t)


def ode_rk4(t, y, beta, steps: int = 1000):
    """Classical RK4 on ``f' = -beta*y*f`` with ``steps`` fixed steps, vectorised over y."""
    y = np.asarray(y, dtype=float)
    k = beta * y
    h = t / steps
    f = np.ones_like(y)
    for _ in range(steps):
        k1 = -k * f
        k2 = -k * (f + 0.5 * h * k1)
        k3 = -k * (f + 0.5 * h * k2)
        k4 = -k * (f + h * k3)
        f = f + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return f


def ode_qoi_reference(t: float, beta: float) -> float:
    rate = 1.0 + 2.0 * beta * t
    if rate <= 0:
        raise DivergentQoIError(f"second moment diverges: 1 + 2*beta*t = {rate:g} <= 0")
    return 1.0 / rate


def ode_effective_support(t: float, beta: float) -> float:
    """Radius past which ``exp(-(1 + 2 beta t) y)`` underflows to the smallest normal double."""
    rate = 1.0 + 2.0 * beta * t
    if rate <= 0:
        raise DivergentQoIError("integrand does not decay; no effective support")
    return -math.log(np.finfo(float).tiny) / rate


def laguerre_func_integral(n: int) -> float:
    """``int_0^inf L~_n(y) dy``; the Laplace transform of L_n at 1/2 gives ``2 (-1)^n``."""
    if n < 0:
        raise ValueError(f"order must be >= 0, got {n}")
    return 2.0 if n % 2 == 0 else -2.0


def ode_qoi_lsq(model: OdeModel, q: int, plan: lsq.SamplingPlan, L: float = 64.0,
                rule: lsq.ScalingRule | None = None, seed: int = 0, solver: str = "qr") -> QoIResult:
    """Second-moment QoI from a Laguerre-function fit on r=1 mapped points."""
    reference = ode_qoi_reference(model.t, model.beta)
    rule = rule or lsq.ScalingRule()
    idx = build_index_set("td", q, 1)
    design = sample("mapped-uniform", plan.m(idx.cardinality), 1, seed, mapping=MappingSpec(1, L))
    fitted = lsq.fit_scaled(Family.LAGUERRE_FUNC, idx, design, lambda z: model.integrand(z[:, 0]),
                            rule, solver=solver)
    alpha = float(fitted.spec.alpha[0])
    weights = np.array([laguerre_func_integral(n) for n in range(q + 1)])
    approx = float(fitted.coefficients @ weights) / alpha
    meta = dict(q=q, m=design.m, L=L, alpha=alpha, seed=seed)
    return QoIResult(approx, reference, abs(approx - reference), meta, fitted)


# -- elliptic problem -------------------------------------------------------------

class Coefficient(str, Enum):
    SINGLE = "single"                    # exp(c y)
    THREEPARAM = "threeparam"            # y0 + (y1 cos(pi x) + y2 sin(pi x)) / 2
    THREEPARAM_LOGNORMAL = "threeparam-lognormal"  # exp of the above

    @property
    def dim(self) -> int:
        return 1 if self is Coefficient.SINGLE else 3


@dataclass(frozen=True)
class EllipticModel:
    coefficient: Coefficient = Coefficient.THREEPARAM
    c: float = 0.5
    n_elems: int = 256
    x0: float = 0.25
    a_floor: float = A_FLOOR

    def __post_init__(self):
        object.__setattr__(self, "coefficient", Coefficient(self.coefficient))
        if not 0 < self.x0 < 1:
            raise ValueError(f"x0 must lie in (0, 1), got {self.x0}")

    @property
    def dim(self) -> int:
        return self.coefficient.dim

    @property
    def floor(self) -> float:
        """Rejection threshold; a lognormal field is positive by construction."""
        return 0.0 if self.coefficient is Coefficient.THREEPARAM_LOGNORMAL else self.a_floor

    def coefficient_at(self, x, y) -> np.ndarray:
        """``a(x, y)`` for points ``y`` of shape (S, d); returns (S, len(x))."""
        x = np.asarray(x, dtype=float)
        y = np.atleast_2d(np.asarray(y, dtype=float))
        if self.coefficient is Coefficient.SINGLE:
            return np.repeat(np.exp(self.c * y[:, :1]), x.size, axis=1)
        affine = (y[:, :1] + 0.5 * (y[:, 1:2] * np.cos(np.pi * x) + y[:, 2:3] * np.sin(np.pi * x)))
        if self.coefficient is Coefficient.THREEPARAM:
            return affine
        return np.exp(affine)

    def u_at_x0(self, y, strict: bool = True):
        """``u(x0, y)`` for each row of ``y``; returns ``(values, accepted_mask)``.

        Rows whose coefficient drops to ``floor`` or below on an element
        midpoint are not solved (NaN). With ``strict`` the first such row
        raises :class:`SampleRejectedError` instead.
        """
        y = np.atleast_2d(np.asarray(y, dtype=float))
        h = 1.0 / self.n_elems
        mids = (np.arange(self.n_elems) + 0.5) * h
        out = np.full(y.shape[0], np.nan)
        ok = np.ones(y.shape[0], dtype=bool)
        for start in range(0, y.shape[0], 2048):
            chunk = slice(start, start + 2048)
            a = self.coefficient_at(mids, y[chunk])
            good = np.all((a > self.floor) & np.isfinite(a), axis=1)
            ok[chunk] = good
            if strict and not good.all():
                bad = y[chunk][~good][0]
                raise SampleRejectedError(f"coefficient <= {self.floor:g} for y = {bad}", y=bad)
            if good.any():
                nodal = solve_fem_batch(a[good], self.n_elems)
                out[np.flatnonzero(ok[chunk]) + start] = _interp_nodal(nodal, self.x0, self.n_elems)
        return out, ok


def elliptic_exact_single(c: float, y, x):
    return np.exp(-c * np.asarray(y, dtype=float)) * np.sin(np.pi * np.asarray(x, dtype=float)) / np.pi ** 2


def elliptic_qoi_single_reference(c: float, x0: float) -> float:
    return math.sqrt(2 * math.pi) * math.exp(2 * c * c) * math.sin(math.pi * x0) ** 2 / math.pi ** 4


_GAUSS2 = np.array([-1.0, 1.0]) / math.sqrt(3.0)


def _load_vector(n_elems: int) -> np.ndarray:
    """``int sin(pi x) phi_i dx`` at interior nodes, 2-point Gauss per element."""
    h = 1.0 / n_elems
    left = np.arange(n_elems) * h
    xg = left[:, None] + 0.5 * h * (1.0 + _GAUSS2[None, :])  # (E, 2)
    fg = np.sin(np.pi * xg)
    s = (xg - left[:, None]) / h
    # element contributions to its left and right nodes
    to_left = 0.5 * h * np.sum(fg * (1.0 - s), axis=1)
    to_right = 0.5 * h * np.sum(fg * s, axis=1)
    b = np.zeros(n_elems + 1)
    b[:-1] += to_left
    b[1:] += to_right
    return b[1:-1]


def solve_fem_batch(a_mid: np.ndarray, n_elems: int) -> np.ndarray:
    """P1 finite elements for many coefficient fields at once.

    ``a_mid`` has shape (S, n_elems) with the coefficient at element
    midpoints. Returns nodal values of shape (S, n_elems + 1), boundary
    zeros included. The tridiagonal systems are solved by the Thomas
    algorithm, vectorised over S.
    """
    a_mid = np.atleast_2d(np.asarray(a_mid, dtype=float))
    S, E = a_mid.shape
    if E != n_elems or n_elems < 2:
        raise ValueError(f"need n_elems >= 2 coefficient values per row, got {E}")
    h = 1.0 / n_elems
    diag = (a_mid[:, :-1] + a_mid[:, 1:]) / h     # (S, n-1)
    off = -a_mid[:, 1:-1] / h                      # (S, n-2)
    rhs = np.broadcast_to(_load_vector(n_elems), diag.shape).copy()
    n = diag.shape[1]
    cp = np.empty((S, max(n - 1, 0)))
    dp = np.empty((S, n))
    beta = diag[:, 0].copy()
    dp[:, 0] = rhs[:, 0] / beta
    for i in range(1, n):
        cp[:, i - 1] = off[:, i - 1] / beta
        beta = diag[:, i] - off[:, i - 1] * cp[:, i - 1]
        dp[:, i] = (rhs[:, i] - off[:, i - 1] * dp[:, i - 1]) / beta
    u = np.zeros((S, n_elems + 1))
    u[:, n] = dp[:, n - 1]
    for i in range(n - 2, -1, -1):
        u[:, i + 1] = dp[:, i] - cp[:, i] * u[:, i + 2]
    return u


def _interp_nodal(nodal, x, n_elems):
    x = np.asarray(x, dtype=float)
    pos = np.clip(x * n_elems, 0, n_elems)
    i = np.minimum(np.floor(pos).astype(int), n_elems - 1)
    s = pos - i
    return nodal[..., i] * (1 - s) + nodal[..., i + 1] * s


@dataclass(frozen=True)
class FEMSolution:
    nodes: np.ndarray
    values: np.ndarray

    def __call__(self, x):
        return _interp_nodal(self.values, x, self.nodes.size - 1)


def elliptic_solve_fem(a_of_x, n_elems: int, a_floor: float = A_FLOOR, y=None) -> FEMSolution:
    """Solve ``-(a u')' = sin(pi x)`` with homogeneous Dirichlet data.

    ``a_of_x`` is called on the element midpoints. ``y`` is only used to
    label the error if the coefficient is not uniformly positive.
    """
    mids = (np.arange(n_elems) + 0.5) / n_elems
    a = np.broadcast_to(np.asarray(a_of_x(mids), dtype=float), mids.shape)
    if np.any(a <= a_floor):
        raise SampleRejectedError(f"coefficient min {a.min():.3g} <= floor {a_floor:g}", y=y)
    nodal = solve_fem_batch(a[None, :], n_elems)[0]
    return FEMSolution(np.linspace(0.0, 1.0, n_elems + 1), nodal)


@lru_cache(maxsize=None)
def hermite_func_integral(k: int) -> float:
    """``int_R H~_k(y) dy`` by composite Simpson on [-40, 40]; odd orders are exactly 0."""
    if k % 2:
        return 0.0
    n = 40000
    y = np.linspace(-40.0, 40.0, n + 1)
    w = np.full(n + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    vals = hermite_table(k, y, functions=True)[:, k]
    return float(np.sum(w * vals) * (80.0 / n) / 3.0)


def _hermite_integrals(index_set) -> np.ndarray:
    q = int(index_set.indices.max()) if index_set.indices.size else 0
    J = np.array([hermite_func_integral(k) for k in range(q + 1)])
    return np.prod(J[index_set.indices], axis=1)


def _draw_admissible(model: EllipticModel, m: int, L: float, seed: int, max_rounds: int = 200):
    """m mapped-uniform points whose coefficient is elliptic, redrawing rejected ones.

    Returns the SampleSet of accepted points, their u(x0) values and the
    overall rejection rate.
    """
    pts, vals = [], []
    have = drawn = rejected = 0
    for attempt in range(max_rounds):
        batch = sample("mapped-uniform", m, model.dim, derive_trial_seed(seed, attempt),
                       mapping=MappingSpec(0, L))
        u, ok = model.u_at_x0(batch.points, strict=False)
        take = np.flatnonzero(ok)[: m - have]
        # count only the rows examined before the quota was met
        examined = m if take.size < m - have else int(take[-1]) + 1 if take.size else 0
        drawn += examined
        rejected += examined - take.size
        pts.append(batch.points[take])
        vals.append(u[take])
        have += take.size
        if have == m:
            points = np.vstack(pts)
            points.setflags(write=False)
            samples = SampleSet(points, batch.distribution, seed, batch.mapping)
            return samples, np.concatenate(vals), rejected / drawn
    rate = rejected / drawn
    raise SampleRejectedError(
        f"only {have} of {m} admissible samples after {drawn} draws (rejection rate {rate:.3f})",
        rejection_rate=rate)


def _elliptic_fit(model, q, plan, L, seed, solver):
    idx = build_index_set("td", q, model.dim)
    m = plan.m(idx.cardinality)
    samples, u, rejection = _draw_admissible(model, m, L, seed)
    weight = np.exp(-0.5 * np.sum(samples.points ** 2, axis=1))
    spec = BasisSpec(Family.HERMITE_FUNC, idx)
    fitted = lsq.fit(spec, samples, weight * u ** 2, solver=solver)
    approx = float(fitted.coefficients @ _hermite_integrals(idx))
    return fitted, approx, dict(q=q, m=m, L=L, alpha=1.0, seed=seed, rejection_rate=rejection)


def elliptic_qoi_single(model: EllipticModel, q: int, plan: lsq.SamplingPlan, L: float = 8.0,
                        seed: int = 0, solver: str = "qr") -> QoIResult:
    """FEM + Hermite-function least squares for ``a = exp(c y)``, checked against the closed form."""
    if model.coefficient is not Coefficient.SINGLE:
        raise ValueError("elliptic_qoi_single needs the single-parameter coefficient")
    fitted, approx, meta = _elliptic_fit(model, q, plan, L, seed, solver)
    ref = elliptic_qoi_single_reference(model.c, model.x0)
    return QoIResult(approx, ref, abs(approx - ref), meta, fitted)


def elliptic_qoi_threeparam(model: EllipticModel, q: int, plan: lsq.SamplingPlan, L: float = 8.0,
                            seed: int = 0, reference: float | None = None, ref_nodes: int = 40,
                            solver: str = "qr") -> QoIResult:
    """QoI for a three-parameter coefficient on a TD Hermite-function space (no scaling).

    ``reference`` may be supplied to avoid recomputing the tensor rule for
    every order in a sweep.
    """
    if model.dim != 3:
        raise ValueError("elliptic_qoi_threeparam needs a three-parameter coefficient")
    if reference is None:
        reference = reference_qoi_tensor_quad(model, ref_nodes)
    fitted, approx, meta = _elliptic_fit(model, q, plan, L, seed, solver)
    return QoIResult(approx, reference, abs(approx - reference), meta, fitted)


def _tensor_rule(n: int, d: int):
    x, w = golub_welsch(n, "hermite")
    # exp(-y^2/2) weight: y = sqrt(2) s
    x, w = math.sqrt(2.0) * x, math.sqrt(2.0) * w
    grids = np.meshgrid(*([x] * d), indexing="ij")
    wgrids = np.meshgrid(*([w] * d), indexing="ij")
    pts = np.column_stack([g.ravel() for g in grids])
    wts = np.prod(np.column_stack([g.ravel() for g in wgrids]), axis=1)
    return pts, wts


def _tensor_value(model: EllipticModel, n: int):
    pts, wts = _tensor_rule(n, model.dim)
    u, ok = model.u_at_x0(pts, strict=False)
    return float(np.sum(wts[ok] * u[ok] ** 2)), 1.0 - ok.mean()


def reference_qoi_tensor_quad(model: EllipticModel, nodes_per_dim: int = 40, coarse_nodes: int | None = None,
                              rtol: float = 1e-8) -> float:
    """Tensor Gauss rule for ``int exp(-|y|^2/2) u(x0, y)^2 dy``.

    The value is accepted only if a coarser rule (default five fewer nodes
    per dimension) agrees to ``rtol``. Nodes where the coefficient is not
    elliptic contribute nothing; if any exist the two levels are reported
    as not converged.
    """
    if nodes_per_dim > 40 and model.dim == 3:
        raise ValueError("nodes_per_dim is capped at 40 for three parameters")
    coarse_nodes = coarse_nodes or nodes_per_dim - 5
    fine, rej_f = _tensor_value(model, nodes_per_dim)
    coarse, rej_c = _tensor_value(model, coarse_nodes)
    if rej_f > 0 or rej_c > 0 or not abs(fine - coarse) <= rtol * abs(fine):
        raise ReferenceNotConvergedError(
            f"tensor rules with {coarse_nodes} and {nodes_per_dim} nodes/dim give {coarse!r} vs {fine!r} "
            f"(non-elliptic node fraction {rej_c:.3f} / {rej_f:.3f})", values=(coarse, fine))
    return fine
