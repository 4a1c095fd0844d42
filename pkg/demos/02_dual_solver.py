"""
Model-based allocation by stochastic dual descent
=================================================

With the capacity model known, each channel's power solves a 1-D problem
for a given multiplier, and the multiplier follows the average budget
violation.
"""

import numpy as np

from rofso_alloc import ChannelParams, SdgConfig, SystemParams, sdg
from rofso_alloc.channel import default_wavelengths, sample_csi
from rofso_alloc.experiment import EqualPowerPolicy, evaluate

m, p_t, p_s = 8, 1.2, 0.3
chan = ChannelParams(wavelengths=default_wavelengths(m), alpha=0.012)
sys = SystemParams()
w = np.random.default_rng(1).uniform(0, 1, m)

# The per-channel solution shrinks as the multiplier grows. Weak channels
# are switched off first.
h = np.geomspace(1e-10, 1e-8, 5)
print("h =", h)
for lam in (0.0, 2.0, 5.0, 10.0, 20.0):
    print(f"lambda = {lam:5.1f} -> P =", np.round(sdg.primal_step(lam, h, 0.8, sys, p_s), 4))

cfg = SdgConfig(iterations=1500, batch_size=32)
traj = sdg.run(cfg, chan, sys, w, p_t, p_s, np.random.default_rng(2))
print("final lambda:", round(traj.final_lambda, 4))
print("mean |slack| over the last window:", np.mean(np.abs(traj.tail_slack(cfg.window))))

# Compare with splitting the budget evenly, on the same held-out CSI.
H = sample_csi(chan, np.random.default_rng(3), 1000)
print("dual policy :", evaluate(traj.policy, H, w, sys, p_t))
print("equal power :", evaluate(EqualPowerPolicy(m, p_t, p_s), H, w, sys, p_t))
