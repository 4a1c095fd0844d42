"""FSO channel model: geometric/absorption attenuation times log-normal turbulence.

CSI samples are returned as a ``(count, m)`` array; row ``j`` is one CSI vector
``h = |h_a h_t|^2 / n0``.
"""
from dataclasses import dataclass, field

import numpy as np

GUARD_BAND = 5e-9


def default_wavelengths(m, start=1520e-9, step=5e-9):
    return tuple(start + step * i for i in range(m))


@dataclass(frozen=True)
class ChannelParams:
    """Physical constants of the free-space link.

    ``wavelengths`` are in metres, ``alpha`` in 1/m. ``sigma_x2`` is the
    variance of the log-irradiance of the turbulence factor.
    """

    wavelengths: tuple = field(default_factory=lambda: default_wavelengths(8))
    alpha: float = 1e-4
    d: float = 1000.0
    d_tx: float = 0.05
    d_rx: float = 0.1
    sigma_x2: float = 0.1
    n0: float = 1.0
    clamp_gain_to_unity: bool = False
    guard_band: float = GUARD_BAND

    def __post_init__(self):
        object.__setattr__(self, "wavelengths", tuple(float(w) for w in self.wavelengths))
        if len(self.wavelengths) < 1:
            raise ValueError("wavelengths: need at least one channel")
        for name in ("d", "d_tx", "d_rx", "n0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name}: must be > 0, got {getattr(self, name)}")
        if not self.alpha >= 0:
            raise ValueError(f"alpha: must be >= 0, got {self.alpha}")
        if not self.sigma_x2 >= 0:
            raise ValueError(f"sigma_x2: must be >= 0, got {self.sigma_x2}")
        lam = np.asarray(self.wavelengths)
        if np.any(lam <= 0):
            raise ValueError("wavelengths: must be > 0")
        # small slack so a 5 nm grid built from floats passes a 5 nm guard band
        if np.any(np.diff(lam) < self.guard_band * (1 - 1e-9)):
            raise ValueError("wavelengths: must be increasing with spacing >= guard band")

    @property
    def m(self):
        return len(self.wavelengths)


def attenuation_gain(params, wavelength_index):
    """h_a = A_TX A_RX / (d lambda)^2 * exp(-alpha d) for one wavelength."""
    if not 0 <= wavelength_index < params.m:
        raise IndexError(f"wavelength index {wavelength_index} out of range for m={params.m}")
    lam = params.wavelengths[wavelength_index]
    a_tx = np.pi * (params.d_tx / 2) ** 2
    a_rx = np.pi * (params.d_rx / 2) ** 2
    h_a = a_tx * a_rx / (params.d * lam) ** 2 * np.exp(-params.alpha * params.d)
    if params.clamp_gain_to_unity:
        h_a = min(h_a, 1.0)
    return float(h_a)


def attenuation_gains(params):
    return np.array([attenuation_gain(params, i) for i in range(params.m)])


def sample_turbulence(rng, sigma_x2, size=None):
    """Unit-mean log-normal fading: exp(z), z ~ N(-sigma_x2/2, sigma_x2)."""
    if sigma_x2 < 0:
        raise ValueError("sigma_x2 must be >= 0")
    if sigma_x2 == 0:
        return 1.0 if size is None else np.ones(size)
    z = rng.normal(-sigma_x2 / 2, np.sqrt(sigma_x2), size=size)
    return np.exp(z)


def mean_csi(params):
    """Analytic E[h_i] = h_a^2 exp(sigma_x2) / n0."""
    return attenuation_gains(params) ** 2 * np.exp(params.sigma_x2) / params.n0


def sample_csi(params, rng, count):
    """Draw ``count`` i.i.d. CSI vectors, independent turbulence per wavelength."""
    if count < 1:
        raise ValueError("count must be >= 1")
    h_a = attenuation_gains(params)
    h_t = sample_turbulence(rng, params.sigma_x2, size=(count, params.m))
    return np.abs(h_a * h_t) ** 2 / params.n0
