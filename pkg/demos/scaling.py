# %% [markdown]
# Fitting a narrow Gaussian with Hermite functions, with and without a
# scaling factor picked from the sample quantiles.

# %%
from unboundlsq import ExperimentConfig, run_convergence_experiment

base = dict(kind="converge", target="gauss_decay", p=6, qmin=4, qmax=30, rule="quadratic", c=6,
            M=3, mu=0.98, seed=0)
plain = run_convergence_experiment(ExperimentConfig(**base))
scaled = run_convergence_experiment(ExperimentConfig(scaling="quantile", **base))

# %%
for a, b in zip(plain, scaled):
    if a["q"] % 4 == 2:
        print(f"q={a['q']:2d}  unscaled {a['linf_error']:.2e}  quantile {b['linf_error']:.2e}"
              f"  alpha {b['alpha_1']:.2f}")
