"""
The power policy: a Gaussian truncated to [0, P_S]
==================================================

Every draw is a feasible power. The score (gradient of the log density)
has zero mean, which is what makes the policy gradient unbiased.
"""

import numpy as np

from rofso_alloc import policy
from rofso_alloc.policy import PolicyHead, TruncatedGaussian

p_s = 0.3
head = PolicyHead.for_peak(p_s)
dist = policy.from_network_outputs(np.array([0.5, -1.0]), p_s, head)
print(f"mu = {dist.mu:.4f}, sigma = {dist.sigma:.4f}, mean = {dist.mean():.4f}")

rng = np.random.default_rng(0)
n = 200_000
d = TruncatedGaussian(np.full(n, 0.05), np.full(n, 0.1), 0.0, p_s)
x = policy.sample(d, rng)
print("sample range:", x.min(), x.max())
print("sample mean vs exact mean:", x.mean(), float(d.mean()[0]))

d_mu, d_sigma = policy.grad_log_pdf(d, x)
print("score means (should be near 0):", d_mu.mean(), d_sigma.mean())
print("their standard errors         :", d_mu.std() / np.sqrt(n), d_sigma.std() / np.sqrt(n))

# Far outside the window the sampler still returns in-range values.
far = TruncatedGaussian(np.array([-5.0, 5.0]), np.array([0.01, 0.01]), 0.0, p_s)
print("far-off means:", policy.sample(far, rng))
