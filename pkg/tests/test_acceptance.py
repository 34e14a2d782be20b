"""Acceptance criteria, one test each, at the stated tolerances.

Every test prints a ``PASS``/``FAIL`` line (also repeated in the terminal
summary) before asserting. Criteria 4, 5 and 8 are known to fail; see the
decisions ledger for the analysis.
"""

import io
import math
from functools import lru_cache

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from unboundlsq import cli, lsq
from unboundlsq.basis import Family, hermite_table, laguerre_table
from unboundlsq.errors import ReferenceNotConvergedError
from unboundlsq.harness import (ExperimentConfig, resolve_target, run_condition_experiment,
                                run_convergence_experiment, run_stability_check, run_uq_experiment)
from unboundlsq.linalg import golub_welsch
from unboundlsq.multiindex import build_index_set
from unboundlsq.sampling import MappingSpec, derive_trial_seed, sample
from unboundlsq.uqmodels import (EllipticModel, OdeModel, elliptic_qoi_single, elliptic_qoi_single_reference,
                                 elliptic_qoi_threeparam, ode_effective_support, ode_qoi_lsq, ode_qoi_reference,
                                 reference_qoi_tensor_quad)

# tolerances, pinned
ORTHO_POLY_TOL = 1e-10
ORTHO_FUNC_TOL = 1e-8
COND_GROWTH = 1e3
COND_CEILING = 1e3
COND_GAP = 1e6
SHRINK_THRESHOLD = 5 / 8
LAMBDA_MAX_TOL = 1e-8
LAMBDA_MIN = 3 / 4
SCALING_GAIN = 1e-2
ODE_REF_TOL = 1e-12
ODE_ERR = 1e-4
ELLIPTIC_ABS = 1e-4
ELLIPTIC_GAIN = 10.0
SOLVER_REL = 1e-7
SOLVER_COND = 1e6


def verdict(ac, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} AC{ac}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def simpson(y0, y1, h):
    n = 2 * math.ceil((y1 - y0) / (2 * h))
    y = np.linspace(y0, y1, n + 1)
    w = np.full(n + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return y, w * (y1 - y0) / (3 * n)


# -- shared fits (reused by criterion 10) ------------------------------------------

AC5_CASES = {"p=6": (6.0, 3.0), "p=0.2": (0.2, 16.0)}


def ac5_fit(case, scaled, solver="qr", q=30):
    p, M = AC5_CASES[case]
    target = resolve_target("gauss_decay", 1, p=p)
    idx = build_index_set("td", q, 1)
    m = lsq.SamplingPlan("quadratic", 6).m(idx.cardinality)
    design = sample("mapped-uniform", m, 1, derive_trial_seed(0, q), mapping=MappingSpec(0, 8.0))
    rule = lsq.ScalingRule("quantile", M, 0.98) if scaled else lsq.ScalingRule()
    return lsq.fit_scaled(Family.HERMITE_FUNC, idx, design, target, rule, solver=solver), target


def ac6_result(q=20, solver="qr", ode_solver="analytic"):
    rule = lsq.ScalingRule("quantile", ode_effective_support(1.0, 1.5), 0.995)
    return ode_qoi_lsq(OdeModel(1.5, 1.0, ode_solver), q, lsq.SamplingPlan("quadratic", 5), 64.0, rule,
                       seed=derive_trial_seed(0, q), solver=solver)


AC7_Q = 10


def ac7_result(n_elems, solver="qr"):
    model = EllipticModel("single", 0.5, n_elems, 0.5)
    return elliptic_qoi_single(model, AC7_Q, lsq.SamplingPlan("linear", 10), 8.0, seed=0, solver=solver)


@lru_cache(maxsize=None)
def ac8_reference(coefficient, x0):
    try:
        return reference_qoi_tensor_quad(EllipticModel(coefficient, 0.5, 256, x0), 40), ""
    except ReferenceNotConvergedError as exc:
        return math.nan, str(exc)


def ac8_result(coefficient, x0, q, solver="qr"):
    ref, _ = ac8_reference(coefficient, x0)
    model = EllipticModel(coefficient, 0.5, 256, x0)
    return elliptic_qoi_threeparam(model, q, lsq.SamplingPlan("linear", 10), 8.0, seed=derive_trial_seed(0, q),
                                   reference=ref, solver=solver)


# -- criteria -------------------------------------------------------------------------

def test_ac1_orthonormality():
    worst = {}
    x, w = golub_welsch(64, "hermite")
    H = hermite_table(20, x)
    worst["hermite-poly"] = np.max(np.abs(H.T @ (w[:, None] * H) - np.eye(21)))
    x, w = golub_welsch(64, "laguerre")
    L = laguerre_table(20, x)
    worst["laguerre-poly"] = np.max(np.abs(L.T @ (w[:, None] * L) - np.eye(21)))
    y, w = simpson(-40.0, 40.0, 0.005)
    H = hermite_table(20, y, functions=True)
    worst["hermite-func"] = np.max(np.abs(H.T @ (w[:, None] * H) - np.eye(21)))
    # L~_20 is steep near 0; Simpson needs a finer step there to reach 1e-10
    y, w = simpson(0.0, 200.0, 0.001)
    L = laguerre_table(20, y, functions=True)
    worst["laguerre-func"] = np.max(np.abs(L.T @ (w[:, None] * L) - np.eye(21)))
    ok = (max(worst["hermite-poly"], worst["laguerre-poly"]) <= ORTHO_POLY_TOL
          and max(worst["hermite-func"], worst["laguerre-func"]) <= ORTHO_FUNC_TOL)
    assert verdict(1, ok, ", ".join(f"{k} {v:.2e}" for k, v in worst.items()))


def test_ac2_polynomial_instability():
    rows = run_condition_experiment(ExperimentConfig(kind="condnum", basis="hermite-poly", qmin=2, qmax=15,
                                                     rule="quadratic", c=3, reps=100, seed=0))
    cond = [r["mean_cond"] for r in rows]
    monotone = all(b > a for a, b in zip(cond, cond[1:]))
    ratio = cond[13] / cond[3]
    assert verdict(2, monotone and ratio > COND_GROWTH,
                   f"monotone={monotone}, cond(15)/cond(5)={ratio:.3e} (> {COND_GROWTH:g})")


def test_ac3_function_stabilisation():
    common = dict(kind="condnum", qmin=25, qmax=25, rule="linear", c=6, reps=100, seed=0)
    func = run_condition_experiment(ExperimentConfig(basis="hermite-func", L=8, r=0, **common))[0]
    poly = run_condition_experiment(ExperimentConfig(basis="hermite-poly", **common))[0]
    gap = poly["mean_cond"] / func["mean_cond"]
    ok = func["mean_cond"] < COND_CEILING and gap >= COND_GAP
    assert verdict(3, ok, f"func mean cond {func['mean_cond']:.3g}, poly mean cond {poly['mean_cond']:.3g} "
                          f"({poly['overflow_count']}/100 at the singular sentinel), gap {gap:.2e}")


@pytest.mark.slow
def test_ac4_stability_theorem():
    parts, ok = [], True
    for K in (3, 5, 8):
        rep = run_stability_check(K, 1.0, trials=1000, seed=0, normalization="2L", threads=0)
        good = (rep.violation_fraction <= rep.bound
                and rep.expected_lambda_max <= 1 + LAMBDA_MAX_TOL
                and rep.expected_lambda_min >= LAMBDA_MIN - LAMBDA_MAX_TOL)
        ok &= good
        parts.append(f"K={K} m_min={rep.m_min} L={rep.L_used:.3f} freq={rep.violation_fraction:.4f} "
                     f"bound={rep.bound:.4f} lam=[{rep.expected_lambda_min:.4f},{rep.expected_lambda_max:.6f}]")
    assert verdict(4, ok, "; ".join(parts))


def test_ac5_scaling_acceleration():
    errs = {}
    for case in AC5_CASES:
        for scaled in (False, True):
            fitted, target = ac5_fit(case, scaled)
            errs[case, scaled] = lsq.linf_error(fitted, target)
    ok6 = errs["p=6", True] <= SCALING_GAIN * errs["p=6", False]
    ok02 = errs["p=0.2", True] <= SCALING_GAIN * errs["p=0.2", False]
    detail = "; ".join(f"{c}: unscaled {errs[c, False]:.3e}, quantile {errs[c, True]:.3e}" for c in AC5_CASES)
    assert verdict(5, ok6 and ok02, detail + f" (need quantile <= {SCALING_GAIN:g} x unscaled)")


def test_ac6_ode_qoi():
    ref = ode_qoi_reference(1.0, 1.5)
    x, w = golub_welsch(64, "laguerre")
    gl = float(np.sum(w * ode_qoi_integrand_over_weight(x)))
    analytic = ac6_result()
    rk4 = ac6_result(ode_solver="rk4")
    ok = (ref == 0.25 and abs(gl - ref) <= ODE_REF_TOL
          and analytic.abs_error < ODE_ERR and rk4.abs_error < ODE_ERR)
    assert verdict(6, ok, f"reference {ref!r}, Gauss-Laguerre diff {abs(gl - ref):.1e}, "
                          f"q=20 abs_error {analytic.abs_error:.2e} (analytic) / {rk4.abs_error:.2e} (rk4)")


def ode_qoi_integrand_over_weight(y):
    # integrand e^{-y} f^2 divided by the Laguerre weight e^{-y}
    return OdeModel(1.5, 1.0).solve(y) ** 2


def test_ac7_elliptic_single():
    exact = elliptic_qoi_single_reference(0.5, 0.5)
    oracle = math.sqrt(2 * math.pi) * math.exp(2 * 0.25) * math.sin(math.pi * 0.5) ** 2 / math.pi ** 4
    fine, coarse = ac7_result(512), ac7_result(256)
    fem_bound = abs(fine.approx - coarse.approx)
    tol = max(ELLIPTIC_ABS, fem_bound)
    ok = abs(exact - oracle) <= 1e-15 * oracle and fine.abs_error <= tol
    assert verdict(7, ok, f"q={AC7_Q} abs_error {fine.abs_error:.2e} <= {tol:.1e} "
                          f"(mesh-doubling change {fem_bound:.1e})")


@pytest.mark.slow
def test_ac8_elliptic_threeparam():
    parts, ok = [], True
    for x0 in (0.25, 0.85):
        ref, why = ac8_reference("threeparam", x0)
        if math.isnan(ref):
            ok = False
            parts.append(f"x0={x0}: tensor reference not self-converged ({why})")
            continue
        e2 = ac8_result("threeparam", x0, 2).abs_error
        e6 = ac8_result("threeparam", x0, 6).abs_error
        ok &= e6 * ELLIPTIC_GAIN <= e2
        parts.append(f"x0={x0}: err(q=2) {e2:.3e}, err(q=6) {e6:.3e}")
    # supplementary: the lognormal variant has a well-posed reference
    for x0 in (0.25, 0.85):
        e2 = ac8_result("threeparam-lognormal", x0, 2).abs_error
        e6 = ac8_result("threeparam-lognormal", x0, 6).abs_error
        line = f"INFO AC8 lognormal x0={x0}: err(q=2) {e2:.3e}, err(q=6) {e6:.3e}, ratio {e2 / e6:.1f}"
        print(line)
        ACCEPTANCE_LINES.append(line)
    assert verdict(8, ok, "; ".join(parts))


@pytest.mark.parametrize("argv", [
    ["condnum", "--qmax", "12", "--reps", "20", "--seed", "5"],
    ["converge", "--qmax", "12", "--scaling", "quantile", "--M", "3", "--mu", "0.98", "--seed", "5"],
    ["stability", "--K", "3", "--trials", "200", "--seed", "5"],
    ["uq-ode", "--qmax", "12", "--seed", "5"],
    ["uq-elliptic", "--model", "single", "--x0", "0.5", "--qmax", "4", "--seed", "5"],
])
def test_ac9_determinism(argv, tmp_path):
    outputs = []
    for threads in (1, 3, 0):
        path = tmp_path / f"t{threads}.csv"
        code = cli.run(argv + ["--threads", str(threads), "--deterministic", "--out", str(path)],
                       io.StringIO(), io.StringIO())
        assert code == 0
        outputs.append(path.read_bytes())
    ok = outputs[0] == outputs[1] == outputs[2]
    assert verdict(9, ok, f"{argv[0]} byte-identical across threads 1/3/auto")


@pytest.mark.slow
def test_ac10_cross_solver():
    compared, skipped, worst = 0, 0, 0.0

    def check(qr_fit, ch_fit):
        nonlocal compared, skipped, worst
        if qr_fit.diagnostics.cond >= SOLVER_COND:
            skipped += 1
            return
        a, b = qr_fit.coefficients, ch_fit.coefficients
        worst = max(worst, float(np.linalg.norm(a - b) / np.linalg.norm(a)))
        compared += 1

    for case in AC5_CASES:
        for scaled in (False, True):
            check(ac5_fit(case, scaled)[0], ac5_fit(case, scaled, "cholesky")[0])
    for q in (4, 12, 20):
        check(ac6_result(q).fit, ac6_result(q, "cholesky").fit)
    for n in (256, 512):
        check(ac7_result(n).fit, ac7_result(n, "cholesky").fit)
    for coefficient in ("threeparam", "threeparam-lognormal"):
        for x0 in (0.25, 0.85):
            for q in (2, 6):
                qr_fit = ac8_result(coefficient, x0, q).fit
                if qr_fit.diagnostics.cond < SOLVER_COND:
                    check(qr_fit, ac8_result(coefficient, x0, q, "cholesky").fit)
                else:
                    skipped += 1
    ok = compared > 0 and worst <= SOLVER_REL
    assert verdict(10, ok, f"{compared} fits compared, {skipped} skipped (cond >= {SOLVER_COND:g}), "
                           f"worst relative gap {worst:.2e}")
