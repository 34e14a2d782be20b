# %% [markdown]
# Condition numbers of random least-squares designs: Hermite polynomials
# with Gaussian draws against Hermite functions with mapped uniform draws.

# %%
from unboundlsq import ExperimentConfig, run_condition_experiment

poly = run_condition_experiment(ExperimentConfig(kind="condnum", basis="hermite-poly", qmin=2, qmax=12,
                                                 rule="quadratic", c=3, reps=30, seed=1))
func = run_condition_experiment(ExperimentConfig(kind="condnum", basis="hermite-func", qmin=2, qmax=12,
                                                 rule="linear", c=6, L=8, reps=30, seed=1))

# %%
print(" q   poly mean cond   func mean cond")
for a, b in zip(poly, func):
    print(f"{a['q']:2d}   {a['mean_cond']:14.4g}   {b['mean_cond']:14.4g}")
# the polynomial column grows exponentially with q, the function column stays small
