# %% [markdown]
# Second moment of u' = -beta y u, u(0) = 1, with y ~ Exp(1). The exact
# value at t=1, beta=1.5 is 1/4.

# %%
from unboundlsq import OdeModel, SamplingPlan, ScalingRule, ode_qoi_lsq
from unboundlsq.uqmodels import ode_effective_support

model = OdeModel(beta=1.5, t=1.0)
rule = ScalingRule("quantile", ode_effective_support(1.0, 1.5), 0.995)
for q in (4, 8, 12, 16, 20):
    res = ode_qoi_lsq(model, q, SamplingPlan("quadratic", 5), L=64, rule=rule, seed=q)
    print(f"q={q:2d}  qoi {res.approx:.15f}  error {res.abs_error:.2e}")

# %% [markdown]
# The same run through the black-box RK4 solver.

# %%
res = ode_qoi_lsq(OdeModel(1.5, 1.0, "rk4"), 20, SamplingPlan("quadratic", 5), L=64, rule=rule)
print(f"rk4, q=20: error {res.abs_error:.2e}")
