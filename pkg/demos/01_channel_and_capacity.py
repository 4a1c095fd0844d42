"""
Channel gains and link capacity
===============================

Draw CSI for an eight-wavelength link and look at how capacity responds
to transmit power.
"""

import numpy as np

from rofso_alloc import ChannelParams, SystemParams, capacity, cnr
from rofso_alloc.channel import attenuation_gains, default_wavelengths, mean_csi, sample_csi

# A 1 km link in moderate fog. alpha is the extinction coefficient per metre.
chan = ChannelParams(wavelengths=default_wavelengths(8), alpha=0.012)
sys = SystemParams()
print("wavelengths (nm):", np.round(np.asarray(chan.wavelengths) * 1e9))
print("attenuation gains:", attenuation_gains(chan))

# The turbulence factor has unit mean, but CSI is its square, so the CSI
# mean carries an extra factor exp(sigma_x2).
rng = np.random.default_rng(0)
H = sample_csi(chan, rng, 20000)
print("CSI sample mean / exact mean:", np.round(H.mean(axis=0) / mean_csi(chan), 3))

# Capacity in nats for one typical channel, over the allowed power range.
h = np.median(H[:, 0])
for p in (0.0, 0.01, 0.05, 0.1, 0.2, 0.3):
    print(f"P = {p:4.2f} W   CNR = {float(cnr(p, h, sys)):9.3f}   C = {float(capacity(p, h, sys)):.4f}")

# With a strong signal the RIN term dominates and CNR saturates.
print("CNR at huge received power:", float(cnr(1e3, 1.0, sys)), "ceiling:", sys.cnr_ceiling)
