"""
Checking the closed forms by sampling
=====================================

Every closed-form statistic can be estimated from sampled times-to-solution.
``closed_form_report`` lines the two up and gives a z-score for each.
"""

# %%
import numpy as np
import matplotlib.pyplot as plt

from relbudget.oracle import (RngSpec, closed_form_report, gamma_cdf, ks_distance,
                              sample_gamma, sample_negbin)

K, p, H = 2, 0.01, 150.0
T = sample_gamma(K, p, RngSpec(seed=1), 10**6)
for name, row in closed_form_report(T, K, p, H, eps=0.5).items():
    print(f"{name:20s} {row['analytic']:12.6g} {row['estimate']:12.6g}  z={row['z_score']:+.2f}")

# %%
# Streams
# -------
# A ``RngSpec`` is a seed plus a stream id.  Different stream ids give
# independent draws, and the same pair always gives the same draws.
a = sample_gamma(K, p, RngSpec(1, 0), 5)
b = sample_gamma(K, p, RngSpec(1, 1), 5)
print(a, b, sep="\n")

# %%
# From discrete trials to the gamma model
# ---------------------------------------
# Counting trials until the third success is negative binomial.  Once each
# step rarely succeeds, its CDF is close to the gamma CDF.
ps = [0.3, 0.1, 0.03, 0.01, 0.003]
ks = [ks_distance(sample_negbin(3, q, RngSpec(2), 100_000), gamma_cdf(3, q)) for q in ps]
fig, ax = plt.subplots()
ax.loglog(ps, ks, "o-")
ax.set_xlabel("per-step success probability")
ax.set_ylabel("KS distance to Gamma(3, p)")

plt.show()
