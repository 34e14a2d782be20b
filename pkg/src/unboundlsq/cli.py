"""Command line front end: ``unboundlsq <subcommand> [flags]``.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import sys

import numpy as np

from . import __version__, harness
from .errors import UnboundLSQError

SUBCOMMANDS = ("condnum", "converge", "stability", "uq-ode", "uq-elliptic", "selftest")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_common(p):
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--reps", type=int)
    p.add_argument("--solver", choices=["qr", "cholesky"])


def _add_sweep(p):
    p.add_argument("--basis", choices=["hermite-poly", "hermite-func", "laguerre-poly", "laguerre-func"])
    p.add_argument("--dim", type=int)
    p.add_argument("--space", choices=["tp", "td"])
    p.add_argument("--qmin", type=int)
    p.add_argument("--qmax", type=int)
    p.add_argument("--rule", choices=["linear", "quadratic"])
    p.add_argument("--c", type=float)
    p.add_argument("--L", type=float)
    p.add_argument("--r", type=int, choices=[0, 1])
    p.add_argument("--dist", choices=["gaussian", "exponential", "uniform-sym", "uniform-pos",
                                      "mapped-uniform"])


def _add_scaling(p):
    p.add_argument("--scaling", choices=["none", "maximum", "quantile"])
    p.add_argument("--M", type=float)
    p.add_argument("--mu", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="unboundlsq", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"unboundlsq {__version__}")
    parent = _Parser(add_help=False)
    parent.add_argument("--config", help="flat 'key = value' file supplying defaults")
    parent.add_argument("--deterministic", action="store_true",
                        help="never write a timestamp line")
    parent.add_argument("--timestamp", action="store_true",
                        help="add a timestamp line to the CSV header")
    parent.add_argument("--threads", type=int, help="worker threads, 0 = auto")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("condnum", parents=[parent], help="mean condition numbers over a q sweep")
    _add_common(p)
    _add_sweep(p)

    p = sub.add_parser("converge", parents=[parent], help="L-infinity error of fits over a q sweep")
    _add_common(p)
    _add_sweep(p)
    _add_scaling(p)
    p.add_argument("--target", choices=sorted(harness.TARGETS))
    p.add_argument("--p", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--n-eval", dest="n_eval", type=int)

    p = sub.add_parser("stability", parents=[parent], help="empirical check of the stability bound")
    p.add_argument("--K", type=int)
    p.add_argument("--r", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--normalization", choices=["2L", "L"])
    p.add_argument("--out")

    p = sub.add_parser("uq-ode", parents=[parent], help="second moment of the random ODE")
    _add_common(p)
    p.add_argument("--qmin", type=int)
    p.add_argument("--qmax", type=int)
    p.add_argument("--rule", choices=["linear", "quadratic"])
    p.add_argument("--c", type=float)
    p.add_argument("--L", type=float)
    _add_scaling(p)
    p.add_argument("--beta", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--ode-solver", dest="ode_solver", choices=["analytic", "rk4"])
    p.add_argument("--n-eval", dest="n_eval", type=int)

    p = sub.add_parser("uq-elliptic", parents=[parent], help="QoI of the elliptic model")
    _add_common(p)
    p.add_argument("--qmin", type=int)
    p.add_argument("--qmax", type=int)
    p.add_argument("--rule", choices=["linear", "quadratic"])
    p.add_argument("--c", type=float)
    p.add_argument("--L", type=float)
    p.add_argument("--model", choices=["single", "threeparam", "threeparam-lognormal"])
    p.add_argument("--x0", type=float)
    p.add_argument("--coef-c", dest="coef_c", type=float)
    p.add_argument("--n-elems", dest="n_elems", type=int)
    p.add_argument("--ref-nodes", dest="ref_nodes", type=int)

    sub.add_parser("selftest", parents=[parent], help="quick internal consistency checks")
    return parser


# per-subcommand defaults that differ from ExperimentConfig's
_DEFAULTS = {
    "condnum": {},
    "converge": {},
    "stability": {"seed": 0},
    "uq-ode": {"basis": "laguerre-func", "L": 64.0, "rule": "quadratic", "c": 5.0,
               "scaling": "quantile", "mu": 0.995, "qmax": 20},
    "uq-elliptic": {"basis": "hermite-func", "rule": "linear", "c": 10.0, "qmax": 6},
}


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment. Keys are flag names without dashes."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected 'key = value', got {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key] = value
    return out


def _config_argv(values: dict) -> list:
    """Turn config-file entries into flags so argparse does the type checking."""
    argv = []
    for key, value in values.items():
        flag = "--" + key
        if key in ("deterministic", "timestamp"):
            if value.lower() in ("1", "true", "yes"):
                argv.append(flag)
            continue
        argv += [flag, value]
    return argv


def _resolve(parser, argv):
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError("unboundlsq: a subcommand is required (" + ", ".join(SUBCOMMANDS) + ")")
    if getattr(args, "config", None):
        try:
            file_values = read_config_file(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config file: {exc}") from exc
        file_values.pop("config", None)
        base = parser.parse_args([args.command] + _config_argv(file_values))
        for k, v in vars(args).items():
            if v is not None and v is not False:
                setattr(base, k, v)
        args = base
    return args


def _experiment_config(args) -> harness.ExperimentConfig:
    values = dict(_DEFAULTS.get(args.command, {}))
    values.update({k: v for k, v in vars(args).items()
                   if v is not None and k in harness.ExperimentConfig.field_names()})
    values["kind"] = args.command
    return harness.ExperimentConfig(**values)


def _selftest(out) -> bool:
    from .basis import hermite_table, laguerre_table
    from .linalg import golub_welsch, jacobi_eigh
    from .uqmodels import laguerre_func_integral, ode_qoi_reference

    checks = []
    x, w = golub_welsch(64, "hermite")
    H = hermite_table(20, x)
    checks.append(("hermite-orthonormality", np.max(np.abs(H.T @ (w[:, None] * H) - np.eye(21))) < 1e-10))
    x, w = golub_welsch(64, "laguerre")
    Lt = laguerre_table(20, x)
    checks.append(("laguerre-orthonormality", np.max(np.abs(Lt.T @ (w[:, None] * Lt) - np.eye(21))) < 1e-10))
    A = np.array([[2.0, 1.0], [1.0, 2.0]])
    checks.append(("jacobi-2x2", np.allclose(jacobi_eigh(A), [1.0, 3.0], atol=1e-14)))
    checks.append(("ode-reference", abs(ode_qoi_reference(1.0, 1.5) - 0.25) < 1e-15))
    checks.append(("laguerre-integral", abs(float(np.sum(w * np.exp(x / 2) * laguerre_table(7, x)[:, 7]))
                   - laguerre_func_integral(7)) < 1e-9))
    cfg = harness.ExperimentConfig(kind="condnum", qmin=2, qmax=3, reps=2, seed=1)
    rows = harness.run_condition_experiment(cfg)
    checks.append(("condnum-schema", all(list(r) == harness.columns_for("condnum") or
                                         set(r) == set(harness.columns_for("condnum")) for r in rows)))
    cfg = harness.ExperimentConfig(kind="converge", qmin=2, qmax=2, seed=1)
    rows = harness.run_convergence_experiment(cfg)
    checks.append(("converge-schema", all(set(r) == set(harness.columns_for("converge", 1)) for r in rows)))
    for name, ok in checks:
        out.write(f"{'PASS' if ok else 'FAIL'} {name}\n")
    return all(ok for _, ok in checks)


def run(argv, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = _resolve(parser, argv)
        if args.command == "selftest":
            return 0 if _selftest(stdout) else 2
        cfg = _experiment_config(args).validate()
    except UsageError as exc:
        stderr.write(f"{exc}\n")
        parser.print_usage(stderr)
        return 1
    except (ValueError, KeyError) as exc:
        stderr.write(f"unboundlsq: invalid configuration: {exc}\n")
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)

    try:
        if cfg.kind == "stability":
            rep = harness.run_stability_check(cfg.K, cfg.r if cfg.r is not None else 1.0, cfg.trials,
                                              cfg.seed, cfg.normalization, cfg.threads)
            rows = [rep.row()]
            for k, v in rep.row().items():
                stdout.write(f"{k} = {harness.format_value(v)}\n")
            columns = harness.columns_for("stability")
            meta = {"seed": cfg.seed, "K": cfg.K, "r": rep.r, "trials": cfg.trials,
                    "normalization": cfg.normalization}
        else:
            runner = {"condnum": harness.run_condition_experiment,
                      "converge": harness.run_convergence_experiment,
                      "uq-ode": harness.run_uq_experiment,
                      "uq-elliptic": harness.run_uq_experiment}[cfg.kind]
            rows = runner(cfg)
            columns = harness.columns_for(cfg.kind, cfg.dim)
            meta = {"seed": cfg.seed, **cfg.as_metadata()}
    except (UnboundLSQError, ArithmeticError, ValueError, OSError) as exc:
        stderr.write(f"unboundlsq: {type(exc).__name__}: {exc}\n")
        return 2

    if cfg.kind == "stability" and not cfg.out:
        return 0
    stamp = None
    if args.timestamp and not args.deterministic:
        stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    try:
        harness.write_csv(cfg.out if cfg.out else stdout, columns, rows, meta, stamp)
    except OSError as exc:
        stderr.write(f"unboundlsq: cannot write output: {exc}\n")
        return 2
    return 0


def main(argv=None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
