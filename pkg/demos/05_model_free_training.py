"""
Model-free primal-dual training
===============================

The learner never sees the capacity formula. It only queries an oracle
for the capacity of the powers it tried. Here we wrap the model in zero
mean noise to make that explicit. This run is short, so the budget is
not yet met tightly; the bundled configs train for 20000 iterations.
"""

import numpy as np

from rofso_alloc import ChannelParams, PddlConfig, SystemParams, pddl
from rofso_alloc.capacity import ModelOracle, NoisyOracle
from rofso_alloc.channel import default_wavelengths, sample_csi
from rofso_alloc.experiment import EqualPowerPolicy, evaluate

m, p_t, p_s = 8, 1.2, 0.3
chan = ChannelParams(wavelengths=default_wavelengths(m), alpha=0.012)
sys = SystemParams()
w = np.random.default_rng(1).uniform(0, 1, m)

csi_rng = np.random.default_rng(4)
oracle = NoisyOracle(ModelOracle(sys), noise_std=0.2, rng=np.random.default_rng(5))
cfg = PddlConfig(iterations=3000, batch_size=128, delta=0.01, delta_schedule="sqrt",
                 delta_tau=2000, eta=0.012, variance_reduction=True, sigma_min_frac=0.05)
params, traj = pddl.run(cfg, lambda n: sample_csi(chan, csi_rng, n), oracle, w, p_t, p_s,
                        np.random.default_rng(6))

print("oracle values requested:", oracle.calls, "=", cfg.iterations, "x", cfg.batch_size, "x", m)
print("final lambda:", round(traj.final_lambda, 4))
print("mean |slack| over the last window:", np.mean(np.abs(traj.tail_slack(cfg.window))))

H = sample_csi(chan, np.random.default_rng(3), 1000)
print("learned policy:", evaluate(params.mean_power, H, w, sys, p_t))
print("equal power   :", evaluate(EqualPowerPolicy(m, p_t, p_s), H, w, sys, p_t))
