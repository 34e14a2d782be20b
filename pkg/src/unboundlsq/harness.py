"""Experiment runners and CSV output.

Each runner takes an :class:`ExperimentConfig` and returns a list of row
dicts whose keys follow ``COLUMNS[kind]``. Trials are seeded with
``derive_trial_seed`` and gathered in order, so the rows do not depend on
how many worker threads were used.
"""

from __future__ import annotations

import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Callable

import numpy as np

from . import __version__, linalg, lsq
from .basis import BasisSpec, Family, eval_basis, estimate_tau, hermite_table
from .errors import (DivergentQoIError, LinAlgError, ReferenceNotConvergedError,
                     SampleRejectedError)
from .multiindex import SpaceKind, build_index_set
from .sampling import RNG_ALGORITHM, Distribution, MappingSpec, derive_trial_seed, sample
from . import uqmodels

__all__ = [
    "ExperimentConfig",
    "TargetFunction",
    "TARGETS",
    "register_target",
    "resolve_target",
    "StabilityCheckReport",
    "COLUMNS",
    "columns_for",
    "run_condition_experiment",
    "run_convergence_experiment",
    "run_stability_check",
    "run_uq_experiment",
    "find_m_min",
    "stability_constants",
    "write_csv",
    "format_value",
]

COLUMNS = {
    "condnum": ["q", "N", "m", "mean_cond", "geo_mean_cond", "std_log10_cond",
                "overflow_count", "failures", "reps"],
    "converge": ["q", "N", "m", "alpha", "cond", "linf_error", "failures"],
    "stability": ["K", "r", "c_half", "kappa", "tau", "L_used", "m_min", "trials",
                  "violation_count", "violation_fraction", "bound", "normalization",
                  "expected_lambda_min", "expected_lambda_max"],
    "uq-ode": ["q", "N", "m", "approx_qoi", "reference_qoi", "abs_error", "cond", "alpha",
               "fit_error", "status"],
    "uq-elliptic": ["q", "N", "m", "approx_qoi", "reference_qoi", "abs_error", "cond", "alpha",
                    "fit_error", "status"],
}


def columns_for(kind: str, d: int = 1) -> list:
    """Column names for an experiment kind; ``alpha`` expands to one column per coordinate."""
    cols = COLUMNS[kind]
    if kind == "converge":
        i = cols.index("alpha")
        return cols[:i] + [f"alpha_{k + 1}" for k in range(d)] + cols[i + 1:]
    return list(cols)


# -- target functions -----------------------------------------------------------

@dataclass(frozen=True)
class TargetFunction:
    identifier: str
    d: int
    params: dict
    evaluator: Callable = field(repr=False, compare=False)

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.shape[1] != self.d:
            raise ValueError(f"{self.identifier} takes {self.d}-dimensional points, got {pts.shape[1]}")
        return self.evaluator(pts)


TARGETS: dict = {}


def register_target(name: str, d: int | None, defaults: dict, make: Callable):
    """``make(params, d) -> evaluator``; ``d=None`` means any dimension."""
    TARGETS[name] = (d, dict(defaults), make)


def resolve_target(identifier: str, d: int | None = None, **params) -> TargetFunction:
    if identifier not in TARGETS:
        raise KeyError(f"unknown target {identifier!r}; known: {sorted(TARGETS)}")
    fixed_d, defaults, make = TARGETS[identifier]
    unknown = set(params) - set(defaults)
    if unknown:
        raise KeyError(f"target {identifier!r} has no parameter(s) {sorted(unknown)}")
    merged = {**defaults, **params}
    if fixed_d is not None and d is not None and d != fixed_d:
        raise ValueError(f"target {identifier!r} is {fixed_d}-dimensional, asked for d={d}")
    dim = fixed_d if fixed_d is not None else (d or 1)
    return TargetFunction(identifier, dim, merged, make(merged, dim))


register_target("gauss_decay", None, {"p": 6.0},
                lambda p, d: lambda y: 2.0 ** (-p["p"] * np.sum(y * y, axis=1)))
register_target("gauss_sin_2d", 2, {},
                lambda p, d: lambda y: np.exp(-4.0 * (y[:, 0] ** 2 + y[:, 1] ** 2)) * np.sin(y[:, 0] + y[:, 1]))
register_target("hermite_function", 1, {"k": 3},
                lambda p, d: lambda y: hermite_table(int(p["k"]), y[:, 0], functions=True)[:, int(p["k"])])
register_target("ode_tilde", 1, {"beta": 1.5, "t": 1.0},
                lambda p, d: lambda y: np.exp(-y[:, 0]) * np.exp(-2.0 * p["beta"] * p["t"] * y[:, 0]))


# -- configuration --------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """Everything a runner needs; the CLI flag names are these field names."""

    kind: str = "condnum"
    basis: str = "hermite-func"
    space: str = "td"
    dim: int = 1
    qmin: int = 0
    qmax: int = 10
    rule: str = "linear"
    c: float = 6.0
    dist: str | None = None          # None: default sampler for the basis
    L: float = 8.0
    r: int | None = None             # mapping family; None: 0 on R, 1 on R+
    scaling: str = "none"
    M: float | None = None
    mu: float = 1.0
    reps: int = 100
    seed: int = 0
    target: str = "gauss_decay"
    p: float | None = None
    n_eval: int = 4000
    K: int = 5
    trials: int = 1000
    normalization: str = "2L"
    beta: float = 1.5
    t: float = 1.0
    model: str = "threeparam"
    x0: float = 0.25
    coef_c: float = 0.5
    n_elems: int = 256
    ref_nodes: int = 40
    solver: str = "qr"
    ode_solver: str = "analytic"
    threads: int = 1
    out: str | None = None

    def validate(self) -> "ExperimentConfig":
        if self.kind not in COLUMNS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        Family(self.basis)
        SpaceKind(self.space)
        lsq.PlanRule(self.rule)
        lsq.ScalingKind(self.scaling)
        if self.dist is not None:
            Distribution(self.dist)
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if self.qmin < 0 or self.qmax < self.qmin:
            raise ValueError(f"empty q range [{self.qmin}, {self.qmax}]")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.kind == "converge":
            resolve_target(self.target, self.dim, **self.target_params())
        if self.kind == "stability" and self.trials < 1:
            raise ValueError("stability check needs trials >= 1")
        if self.solver not in ("qr", "cholesky"):
            raise ValueError(f"unknown solver {self.solver!r}")
        return self

    def target_params(self) -> dict:
        if self.target == "gauss_decay" and self.p is not None:
            return {"p": self.p}
        if self.target == "ode_tilde":
            return {"beta": self.beta, "t": self.t}
        return {}

    @property
    def family(self) -> Family:
        return Family(self.basis)

    def plan(self) -> lsq.SamplingPlan:
        return lsq.SamplingPlan(self.rule, self.c)

    def scaling_rule(self, default_M: float = 1.0) -> lsq.ScalingRule:
        M = self.M if self.M is not None else default_M
        return lsq.ScalingRule(self.scaling, M, self.mu)

    def sampler(self):
        """``(distribution, mapping)`` used to draw design points."""
        fam = self.family
        if self.dist is None:
            dist = Distribution.MAPPED_UNIFORM if fam.is_function else (
                Distribution.EXPONENTIAL if fam.is_laguerre else Distribution.GAUSSIAN)
        else:
            dist = Distribution(self.dist)
        mapping = None
        if dist is Distribution.MAPPED_UNIFORM:
            r = self.r if self.r is not None else (1 if fam.is_laguerre else 0)
            mapping = MappingSpec(r, self.L)
        return dist, mapping

    def as_metadata(self) -> dict:
        return {k: v for k, v in asdict(self).items() if k not in ("out", "threads")}

    @classmethod
    def field_names(cls) -> list:
        return [f.name for f in fields(cls)]


def _pool_map(fn, items, threads: int):
    items = list(items)
    n = (os.cpu_count() or 1) if threads == 0 else threads
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _q_seed(seed: int, q: int) -> int:
    return derive_trial_seed(seed, q)


# -- condition numbers -------------------------------------------------------------

def run_condition_experiment(config: ExperimentConfig) -> list:
    """Mean condition number of ``D^T D`` over ``reps`` random designs per order q."""
    config.validate()
    dist, mapping = config.sampler()
    rows = []
    for q in range(config.qmin, config.qmax + 1):
        idx = build_index_set(config.space, q, config.dim)
        spec = BasisSpec(config.family, idx)
        N = idx.cardinality
        m = config.plan().m(N)
        qseed = _q_seed(config.seed, q)

        def trial(i, spec=spec, m=m, qseed=qseed):
            try:
                pts = sample(dist, m, config.dim, derive_trial_seed(qseed, i), mapping=mapping)
                D = eval_basis(spec, pts.points)
                if not np.all(np.isfinite(D)):
                    return linalg.COND_SENTINEL
                return linalg.sym_eigs(linalg.gram(D)).cond
            except (LinAlgError, FloatingPointError):
                return None

        conds = _pool_map(trial, range(config.reps), config.threads)
        failures = sum(c is None for c in conds)
        vals = np.array([c for c in conds if c is not None], dtype=float)
        finite = vals[vals < linalg.COND_SENTINEL]
        logs = np.log10(finite) if finite.size else np.array([])
        rows.append(dict(
            q=q, N=N, m=m,
            mean_cond=float(np.mean(vals)) if vals.size else math.nan,
            geo_mean_cond=float(10.0 ** np.mean(logs)) if logs.size else math.nan,
            std_log10_cond=float(np.std(logs)) if logs.size else math.nan,
            overflow_count=int(vals.size - finite.size),
            failures=failures, reps=config.reps))
    return rows


# -- convergence --------------------------------------------------------------------

def run_convergence_experiment(config: ExperimentConfig) -> list:
    """One fit per order q and its max error on ``n_eval`` fresh points."""
    config.validate()
    target = resolve_target(config.target, config.dim, **config.target_params())
    dist, mapping = config.sampler()
    rule = config.scaling_rule()
    rows = []

    def one(q):
        idx = build_index_set(config.space, q, config.dim)
        N = idx.cardinality
        m = config.plan().m(N)
        row = dict(q=q, N=N, m=m)
        try:
            design = sample(dist, m, config.dim, _q_seed(config.seed, q), mapping=mapping)
            fitted = lsq.fit_scaled(config.family, idx, design, target, rule, solver=config.solver)
            alpha = fitted.spec.alpha
            err = lsq.linf_error(fitted, target, n_eval=config.n_eval)
            row.update(cond=fitted.diagnostics.cond, linf_error=err, failures=0)
        except (LinAlgError, FloatingPointError):
            alpha = np.full(config.dim, math.nan)
            row.update(cond=math.nan, linf_error=math.nan, failures=1)
        for k, a in enumerate(alpha):
            row[f"alpha_{k + 1}"] = float(a)
        return row

    rows = _pool_map(one, range(config.qmin, config.qmax + 1), config.threads)
    return rows


# -- stability theorem ---------------------------------------------------------------

C_HALF = (1.0 + math.log(0.5)) / 2.0


def stability_constants(r: float) -> tuple:
    """``(c_half, kappa)`` with ``kappa = 4 c_half / (3 (1 + r))``."""
    return C_HALF, 4.0 * C_HALF / (3.0 * (1.0 + r))


def find_m_min(K: int, kappa: float) -> int:
    """Smallest integer ``m >= 3`` with ``m / log m >= K / kappa``.

    ``m / log m`` increases for ``m >= 3``, so doubling brackets the answer
    and bisection finds it.
    """
    goal = K / kappa

    def ok(m):
        return m / math.log(m) >= goal

    lo, hi = 3, 3
    if ok(lo):
        return lo
    while not ok(hi):
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class StabilityCheckReport:
    K: int
    r: float
    kappa: float
    c_half: float
    m_min: int
    tau: float
    L_used: float
    trials: int
    violation_count: int
    bound: float
    normalization: str
    expected_lambda_min: float
    expected_lambda_max: float

    @property
    def violation_fraction(self) -> float:
        return self.violation_count / self.trials

    @property
    def holds(self) -> bool:
        return self.violation_fraction <= self.bound

    def row(self) -> dict:
        d = asdict(self)
        d["violation_fraction"] = self.violation_fraction
        return d


def run_stability_check(K: int, r: float = 1.0, trials: int = 1000, seed: int = 0,
                        normalization: str = "2L", threads: int = 1) -> StabilityCheckReport:
    """Empirical check of ``Pr{||A_hat - I|| >= 5/8} <= 2 m^-r`` for K Hermite functions.

    ``normalization="2L"`` forms ``A_hat = (2 L / m) D^T D``, whose mean is the
    expected Gram matrix for uniform points on (-1, 1) mapped with r=0.
    ``"L"`` uses ``L / m``, whose mean is half of it.
    """
    if K < 1 or r <= 0 or trials < 1:
        raise ValueError(f"need K >= 1, r > 0, trials >= 1; got K={K}, r={r}, trials={trials}")
    if normalization not in ("2L", "L"):
        raise ValueError(f"normalization must be '2L' or 'L', got {normalization!r}")
    c_half, kappa = stability_constants(r)
    tau = estimate_tau(K).tau
    L_used = 1.01 * max(3.0 * tau, 5.0 * math.sqrt(K))
    m = find_m_min(K, kappa)
    factor = (2.0 if normalization == "2L" else 1.0) * L_used / m
    mapping = MappingSpec(0, L_used)

    def trial(i):
        pts = sample("mapped-uniform", m, 1, derive_trial_seed(seed, i), mapping=mapping)
        D = hermite_table(K - 1, pts.points[:, 0], functions=True)
        dist = linalg.sym_eigs(factor * linalg.gram(D)).dist_to_identity
        return dist >= 0.625

    hits = _pool_map(trial, range(trials), threads)
    ev = linalg.jacobi_eigh(lsq.expected_gram(K, L_used))
    return StabilityCheckReport(K, r, kappa, c_half, m, tau, L_used, trials, int(sum(hits)),
                                2.0 * m ** (-r), normalization, float(ev[0]), float(ev[-1]))


# -- UQ sweeps -----------------------------------------------------------------------

def _nan_row(q, N, m, reference, status):
    return dict(q=q, N=N, m=m, approx_qoi=math.nan, reference_qoi=reference, abs_error=math.nan,
                cond=math.nan, alpha=math.nan, fit_error=math.nan, status=status)


def _ode_rows(config: ExperimentConfig) -> list:
    model = uqmodels.OdeModel(config.beta, config.t, config.ode_solver)
    plan = config.plan()
    try:
        reference = uqmodels.ode_qoi_reference(config.t, config.beta)
        default_M = uqmodels.ode_effective_support(config.t, config.beta)
        divergent = False
    except DivergentQoIError:
        reference, default_M, divergent = math.nan, config.L, True
    rule = config.scaling_rule(default_M)
    target = lambda z: model.integrand(z[:, 0])  # noqa: E731

    def one(q):
        N = q + 1
        m = plan.m(N)
        seed = _q_seed(config.seed, q)
        try:
            if divergent:
                design = sample("mapped-uniform", m, 1, seed, mapping=MappingSpec(1, config.L))
                fitted = lsq.fit_scaled(Family.LAGUERRE_FUNC, build_index_set("td", q, 1), design,
                                        target, rule, solver=config.solver)
                approx, status = math.nan, "divergent-qoi"
            else:
                res = uqmodels.ode_qoi_lsq(model, q, plan, config.L, rule, seed, config.solver)
                fitted, approx, status = res.fit, res.approx, "ok"
        except LinAlgError:
            return _nan_row(q, N, m, reference, "linalg-failure")
        fit_err = _relative_fit_error(fitted, target, config.n_eval)
        return dict(q=q, N=N, m=m, approx_qoi=approx, reference_qoi=reference,
                    abs_error=abs(approx - reference), cond=fitted.diagnostics.cond,
                    alpha=float(fitted.spec.alpha[0]), fit_error=fit_err, status=status)

    return _pool_map(one, range(config.qmin, config.qmax + 1), config.threads)


def _relative_fit_error(fitted, target, n_eval) -> float:
    """Max error over fresh points relative to the largest finite target value there."""
    z = fitted.samples.redraw(n_eval, lsq.DEFAULT_EVAL_SEED)
    with np.errstate(over="ignore", invalid="ignore"):
        f = target(z.points)
        keep = np.isfinite(f)
        if not keep.any():
            return math.nan
        scale = max(float(np.max(np.abs(f[keep]))), np.finfo(float).tiny)
        return float(np.max(np.abs(fitted(z.points[keep]) - f[keep]))) / scale


def _elliptic_rows(config: ExperimentConfig) -> list:
    coef = uqmodels.Coefficient(config.model)
    model = uqmodels.EllipticModel(coef, c=config.coef_c, n_elems=config.n_elems, x0=config.x0)
    plan = config.plan()
    ref_status = "ok"
    if coef is uqmodels.Coefficient.SINGLE:
        reference = uqmodels.elliptic_qoi_single_reference(model.c, model.x0)
    else:
        try:
            reference = uqmodels.reference_qoi_tensor_quad(model, config.ref_nodes)
        except ReferenceNotConvergedError:
            reference, ref_status = math.nan, "reference-not-converged"

    def one(q):
        N = build_index_set("td", q, model.dim).cardinality
        m = plan.m(N)
        seed = _q_seed(config.seed, q)
        try:
            if coef is uqmodels.Coefficient.SINGLE:
                res = uqmodels.elliptic_qoi_single(model, q, plan, config.L, seed, config.solver)
            else:
                res = uqmodels.elliptic_qoi_threeparam(model, q, plan, config.L, seed,
                                                       reference=reference, solver=config.solver)
        except SampleRejectedError:
            return _nan_row(q, N, m, reference, "sample-rejected")
        except LinAlgError:
            return _nan_row(q, N, m, reference, "linalg-failure")
        fitted = res.fit
        # fit error on the accepted design itself: fresh draws may be non-elliptic
        fit_err = fitted.residual_norm / math.sqrt(fitted.samples.m)
        return dict(q=q, N=N, m=m, approx_qoi=res.approx, reference_qoi=reference,
                    abs_error=res.abs_error, cond=fitted.diagnostics.cond, alpha=1.0,
                    fit_error=fit_err, status=ref_status)

    return _pool_map(one, range(config.qmin, config.qmax + 1), config.threads)


def run_uq_experiment(config: ExperimentConfig) -> list:
    """QoI sweep over q for the ODE (``kind='uq-ode'``) or elliptic (``'uq-elliptic'``) model.

    Divergent or unreferenced cases come back as rows with a ``status``
    label instead of raising.
    """
    config.validate()
    if config.kind == "uq-ode":
        return _ode_rows(config)
    if config.kind == "uq-elliptic":
        return _elliptic_rows(config)
    raise ValueError(f"run_uq_experiment handles uq-ode / uq-elliptic, not {config.kind!r}")


# -- CSV ---------------------------------------------------------------------------

def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return "" if v is None else str(v)


def write_csv(stream, columns, rows, metadata: dict | None = None, timestamp: str | None = None):
    """``#`` metadata lines, one header row, then data rows (floats at 17 significant digits)."""
    meta = {"version": __version__, "rng": RNG_ALGORITHM}
    meta.update(metadata or {})
    lines = [f"# {k}={format_value(v)}" for k, v in meta.items()]
    if timestamp is not None:
        lines.append(f"# timestamp={timestamp}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_value(row[c]) for c in columns))
    text = "\n".join(lines) + "\n"
    if isinstance(stream, (str, os.PathLike)):
        with open(stream, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stream.write(text)
    return text


def csv_text(columns, rows, metadata=None) -> str:
    buf = io.StringIO()
    write_csv(buf, columns, rows, metadata)
    return buf.getvalue()
