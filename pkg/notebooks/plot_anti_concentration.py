"""
How often a rollout beats the mean
==================================

The anti-concentration coefficient is the probability that a reward lands at
least ``sqrt(eps)`` standard deviations above its mean.  We compare it with a
Monte-Carlo estimate and look at its large-budget limit.  We also look at how
much a success-only view of the token counts shrinks their spread.
"""

# %%
import numpy as np
import matplotlib.pyplot as plt

from relbudget import anti_concentration, c_sft
from relbudget.oracle import RngSpec, mc_anti_concentration
from relbudget.specfun import reg_lower_gamma

xi = np.linspace(0.1, 6, 120)
fig, ax = plt.subplots()
for eps in (0.0, 0.5, 1.0):
    ax.plot(xi, [anti_concentration(2, x, eps) for x in xi], label=f"eps = {eps}")
ax.set_xlabel("relative budget xi")
ax.set_ylabel("P[R >= mean + sqrt(eps) std]")
ax.legend()

# %%
# Check against sampling
# ----------------------
# The sampled threshold uses the closed-form mean and std, so only the tail
# probability is being tested.
K, p, eps = 2, 0.05, 0.5
for x in (0.5, 1.5, 4.0):
    H = K * x / p
    est = mc_anti_concentration(K, p, H, eps, RngSpec(0), 200_000)
    print(f"xi={x}: closed {anti_concentration(K, x, eps):.4f}  "
          f"sampled {est.value:.4f} +- {est.std_error:.4f}")

# %%
# Large budgets
# -------------
# The coefficient does not vanish as ``xi`` grows.  It settles at a gamma CDF
# evaluated at ``K - sqrt(eps K)``.
for K in (2, 5, 10):
    print(K, anti_concentration(K, 100, 1.0), reg_lower_gamma(K, K - np.sqrt(K)))

# %%
# Success-conditioned spread
# --------------------------
# ``c_sft`` is the std of ``T`` given ``T <= H`` over the unconditional std.
# Keeping only successes throws away most of the spread when the budget is
# tight.
fig, ax = plt.subplots()
grid = np.logspace(-1.3, 1.7, 200)
for K in (1, 2, 5):
    ax.plot(grid, [c_sft(K, x) for x in grid], label=f"K = {K}")
ax.set_xscale("log")
ax.set_xlabel("relative budget xi")
ax.set_ylabel("C_SFT")
ax.legend()

plt.show()
