# %% [markdown]
# Empirical check of the sample-count bound for Hermite functions on
# algebraically mapped points.

# %%
from unboundlsq.harness import find_m_min, run_stability_check, stability_constants

c_half, kappa = stability_constants(1)
print(f"c_1/2 = {c_half:.5f}, kappa = {kappa:.5f}")
for K in (3, 5, 8):
    print(f"K={K}: m_min = {find_m_min(K, kappa)}")

# %%
rep = run_stability_check(3, 1.0, trials=200, seed=0)
print(f"L = {rep.L_used:.3f}, violations {rep.violation_count}/{rep.trials}, bound {rep.bound:.4f}")
print(f"expected Gram eigenvalues in [{rep.expected_lambda_min:.4f}, {rep.expected_lambda_max:.6f}]")
