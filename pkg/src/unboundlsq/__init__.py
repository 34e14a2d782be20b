"""Least-squares projections on Hermite and Laguerre function spaces.

Random evaluation points on unbounded domains (mapped uniform, Gaussian,
exponential), tensor index sets, hand-written dense linear algebra,
scaling of the basis argument, two UQ model problems and an experiment
harness with a command line front end.
"""

__version__ = "0.1.0"

from .basis import (BasisSpec, Family, TailConstant, estimate_tau, eval_basis,  # noqa: E402
                    eval_hermite_func, eval_hermite_poly, eval_laguerre_func,
                    eval_laguerre_poly)
from .errors import (CapacityError, ConvergenceError, DivergentQoIError, DomainError,  # noqa: E402
                     LinAlgError, NotPositiveDefiniteError, RankDeficiencyError,
                     ReferenceNotConvergedError, SampleRejectedError, UnboundLSQError)
from .linalg import (cholesky, golub_welsch, gram, jacobi_eigh, qr_least_squares,  # noqa: E402
                     sym_eigs)
from .lsq import (Fit, SamplingPlan, ScalingRule, expected_gram, fit, fit_scaled,  # noqa: E402
                  linf_error, select_scaling)
from .multiindex import IndexSet, SpaceKind, build_index_set  # noqa: E402
from .sampling import (Distribution, MappingSpec, SampleSet, derive_trial_seed,  # noqa: E402
                       inverse_map, map_point, sample)
from .uqmodels import (Coefficient, EllipticModel, OdeModel, QoIResult,  # noqa: E402
                       elliptic_qoi_single, elliptic_qoi_threeparam, ode_qoi_lsq,
                       reference_qoi_tensor_quad)
from .harness import (ExperimentConfig, StabilityCheckReport, resolve_target,  # noqa: E402
                      run_condition_experiment, run_convergence_experiment,
                      run_stability_check, run_uq_experiment)

__all__ = [name for name in dir() if not name.startswith("_")]
