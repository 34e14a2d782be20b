# %% [markdown]
# QoI of -(a u')' = 1 on (0, 1) with a random log-normal coefficient,
# from FEM solves at random points and a Hermite-function fit.

# %%
from unboundlsq import EllipticModel, SamplingPlan, elliptic_qoi_single

model = EllipticModel("single", c=0.5, n_elems=256, x0=0.5)
for q in (2, 4, 6, 8, 10):
    res = elliptic_qoi_single(model, q, SamplingPlan("linear", 10), seed=q)
    print(f"q={q:2d}  qoi {res.approx:.12f}  exact {res.reference:.12f}  error {res.abs_error:.2e}")

# %% [markdown]
# Three parameters with a log-normal field; the reference comes from a
# tensor Gauss-Hermite rule that is checked against a coarser one.

# %%
from unboundlsq import elliptic_qoi_threeparam, reference_qoi_tensor_quad

model = EllipticModel("threeparam-lognormal", c=0.5, n_elems=128, x0=0.25)
ref = reference_qoi_tensor_quad(model, nodes_per_dim=30)
for q in (2, 4):
    res = elliptic_qoi_threeparam(model, q, SamplingPlan("linear", 10), reference=ref)
    print(f"q={q}  error {res.abs_error:.3e}  rejection {res.metadata['rejection_rate']:.3f}")
