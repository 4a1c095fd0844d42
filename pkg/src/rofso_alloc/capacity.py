"""APD receiver CNR, per-wavelength capacity (nats) and the capacity oracle."""
from dataclasses import dataclass

import numpy as np

E_CHARGE = 1.602e-19
K_BOLTZ = 1.381e-23


def rin_from_db(rin_db_hz, noise_bandwidth_hz=1e9):
    """Integrate a RIN spectral density (dB/Hz) over the noise bandwidth."""
    return 10.0 ** (rin_db_hz / 10.0) * noise_bandwidth_hz


@dataclass(frozen=True)
class SystemParams:
    omi: float = 0.15
    m_p: float = 5.0
    r: float = 0.8
    rin: float = rin_from_db(-140.0)
    e_charge: float = E_CHARGE
    f_excess: float = 0.7
    k_boltz: float = K_BOLTZ
    temperature: float = 300.0
    r_f: float = 50.0

    def __post_init__(self):
        for name in ("m_p", "r", "rin", "e_charge", "k_boltz", "temperature", "r_f"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name}: must be > 0, got {getattr(self, name)}")
        if not 0 < self.omi <= 1:
            raise ValueError(f"omi: must be in (0, 1], got {self.omi}")
        if not self.f_excess >= 0:
            raise ValueError(f"f_excess: must be >= 0, got {self.f_excess}")

    @property
    def thermal_noise(self):
        return 4 * self.k_boltz * self.temperature / self.r_f

    @property
    def cnr_ceiling(self):
        """RIN-limited plateau reached as received power grows."""
        return 0.5 * (self.omi * self.m_p) ** 2 / self.rin


def cnr(p, h, sys):
    """Carrier-to-noise ratio with received power P_r = p*h. Broadcasts."""
    pr = np.asarray(p, dtype=float) * np.asarray(h, dtype=float)
    num = 0.5 * (sys.omi * sys.m_p * sys.r * pr) ** 2
    den = (sys.rin * (sys.r * pr) ** 2
           + 2 * sys.e_charge * sys.m_p ** (2 + sys.f_excess) * sys.r * pr
           + sys.thermal_noise)
    return num / den


def capacity(p, h, sys):
    return np.log1p(cnr(p, h, sys))


def weighted_sum_capacity(p, h, w, sys):
    """sum_i w_i C(p_i, h_i) over the last axis."""
    p, h, w = np.asarray(p, float), np.asarray(h, float), np.asarray(w, float)
    if p.shape[-1] != h.shape[-1] or p.shape[-1] != w.shape[-1]:
        raise ValueError(f"length mismatch: p {p.shape}, h {h.shape}, w {w.shape}")
    return np.sum(w * capacity(p, h, sys), axis=-1)


def check_allocation(p, p_s, atol=0.0):
    p = np.asarray(p, float)
    if np.any(p < -atol) or np.any(p > p_s + atol):
        raise ValueError(f"allocation outside [0, {p_s}]")
    return p


class CapacityOracle:
    """Returns observed per-channel capacities for powers ``p`` under CSI ``h``.

    Both arguments have shape ``(..., m)``; the result has the same shape.
    ``calls`` counts individual channel observations (``p.size`` per call).
    Subclasses override :meth:`observe`; a hardware back-end would go there.
    """

    def __init__(self):
        self.calls = 0

    def __call__(self, p, h):
        p = np.asarray(p, float)
        h = np.asarray(h, float)
        if p.shape != h.shape:
            raise ValueError(f"shape mismatch: p {p.shape}, h {h.shape}")
        self.calls += p.size
        return self.observe(p, h)

    def observe(self, p, h):
        raise NotImplementedError


class ModelOracle(CapacityOracle):
    """Simulated observations from the analytic receiver model."""

    def __init__(self, sys):
        super().__init__()
        self.sys = sys

    def observe(self, p, h):
        return capacity(p, h, self.sys)


class NoisyOracle(CapacityOracle):
    """Wraps another oracle and adds zero-mean Gaussian measurement noise."""

    def __init__(self, base, noise_std, rng):
        super().__init__()
        self.base = base
        self.noise_std = noise_std
        self.rng = rng

    def observe(self, p, h):
        c = self.base.observe(p, h)
        return c + self.rng.normal(0.0, self.noise_std, size=c.shape)
