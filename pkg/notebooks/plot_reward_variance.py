"""
Reward variance against the relative budget
===========================================

A rollout that needs ``T`` tokens to reach a correct answer earns
``max(0, H - T)`` under a token budget ``H``.  With ``T ~ Gamma(K, p)`` the
spread of that reward depends on ``H`` only through ``xi = p H / K``.  Here we
look at that spread and at where it peaks.
"""

# %%
# The standard deviation in units of H
# ------------------------------------
import numpy as np
import matplotlib.pyplot as plt

from relbudget import classify, optimal_xi, sigma_rl

xi = np.logspace(-1.3, 1.3, 300)
fig, ax = plt.subplots()
for K in (1, 2, 5, 10):
    ax.plot(xi, [sigma_rl(K, x).std for x in xi], label=f"K = {K}")
    star = optimal_xi(K)
    ax.plot(star.xi_star, star.sigma_at_star, "k.")
ax.set_xscale("log")
ax.set_xlabel("relative budget xi")
ax.set_ylabel("std(R) / H")
ax.legend()

# %%
# Every curve peaks a little above ``xi = 1``: a budget close to the mean
# solution length gives the most varied rewards, whatever ``K`` is.
for K in (1, 2, 3, 5, 10):
    s = optimal_xi(K)
    print(f"K={K:2d}  xi*={s.xi_star:.4f}  std/H={s.sigma_at_star:.4f}")

# %%
# Regimes
# -------
# ``classify`` puts a coarse label on a budget.
for x in (0.3, 1.2, 5.0):
    print(x, classify(x).value)

# %%
# Far above the peak the spread decays like ``1 / (sqrt(K) xi)``.
K = 2
for x in (10, 50, 200):
    print(x, sigma_rl(K, x).std * np.sqrt(K) * x)

plt.show()
