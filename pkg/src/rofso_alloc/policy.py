"""Truncated-Gaussian power policy on [0, p_s].

All functions broadcast over array-valued ``mu``/``sigma``. Normalizers are
computed in the log domain so densities stay finite for tiny truncation mass.
"""
from dataclasses import dataclass

import numpy as np
from scipy import special

LOG_SQRT_2PI = 0.5 * np.log(2 * np.pi)


@dataclass(frozen=True)
class PolicyHead:
    sigma_min: float
    sigma_max: float

    def __post_init__(self):
        if not 0 < self.sigma_min < self.sigma_max:
            raise ValueError("need 0 < sigma_min < sigma_max")

    @classmethod
    def for_peak(cls, p_s, lo_frac=1e-3, hi_frac=0.5):
        return cls(lo_frac * p_s, hi_frac * p_s)


@dataclass
class TruncatedGaussian:
    mu: np.ndarray
    sigma: np.ndarray
    lower: float
    upper: float

    def __post_init__(self):
        self.mu = np.asarray(self.mu, float)
        self.sigma = np.asarray(self.sigma, float)
        if not self.lower < self.upper:
            raise ValueError("need lower < upper")
        if np.any(~(self.sigma > 0)):
            raise ValueError("sigma must be > 0")

    @property
    def alpha(self):
        return (self.lower - self.mu) / self.sigma

    @property
    def beta(self):
        return (self.upper - self.mu) / self.sigma

    def log_z(self):
        return log_mass(self.alpha, self.beta)

    def mean(self):
        a, b = self.alpha, self.beta
        lz = self.log_z()
        shift = np.exp(log_phi(a) - lz) - np.exp(log_phi(b) - lz)
        return np.clip(self.mu + self.sigma * shift, self.lower, self.upper)

    def cdf(self, x):
        x = np.clip(np.asarray(x, float), self.lower, self.upper)
        z = (x - self.mu) / self.sigma
        return np.exp(log_mass(self.alpha, z) - self.log_z())


def logistic(x):
    return special.expit(x)


def log_phi(z):
    return -0.5 * np.square(z) - LOG_SQRT_2PI


def log_mass(a, b):
    """log(Phi(b) - Phi(a)) for a <= b, stable in both tails."""
    a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    # mirror the right tail so both endpoints sit where Phi is small and accurate
    flip = a > 0
    lo = np.where(flip, -b, a)
    hi = np.where(flip, -a, b)
    lhi = special.log_ndtr(hi)
    llo = special.log_ndtr(lo)
    with np.errstate(divide="ignore"):
        return lhi + np.log1p(-np.exp(llo - lhi))


def from_network_outputs(raw, p_s, head):
    """Squash raw (..., 2) outputs into (mu, sigma) of a policy on [0, p_s]."""
    raw = np.asarray(raw, float)
    if not np.all(np.isfinite(raw)):
        raise FloatingPointError("non-finite network output")
    mu = p_s * logistic(raw[..., 0])
    sigma = head.sigma_min + (head.sigma_max - head.sigma_min) * logistic(raw[..., 1])
    return TruncatedGaussian(mu, sigma, 0.0, p_s)


def head_jacobian(raw, p_s, head):
    """Diagonal Jacobian (dmu/draw0, dsigma/draw1); the map is separable."""
    raw = np.asarray(raw, float)
    s0 = logistic(raw[..., 0])
    s1 = logistic(raw[..., 1])
    return p_s * s0 * (1 - s0), (head.sigma_max - head.sigma_min) * s1 * (1 - s1)


def sample(dist, rng, diagnostics=None):
    """Inverse-CDF draw, one sample per (mu, sigma) entry."""
    a, b = np.broadcast_arrays(dist.alpha, dist.beta)
    u = rng.uniform(size=a.shape)
    # sample the mirrored problem where the truncation window sits right of zero
    flip = a > 0
    lo = np.where(flip, -b, a)
    hi = np.where(flip, -a, b)
    p_lo = special.ndtr(lo)
    p_hi = special.ndtr(hi)
    z = special.ndtri(p_lo + u * (p_hi - p_lo))
    z = np.where(flip, -z, z)
    x = dist.mu + dist.sigma * z
    degenerate = ~(p_hi > p_lo) | ~np.isfinite(x)
    if np.any(degenerate):
        nearer = np.where(np.abs(a) < np.abs(b), dist.lower, dist.upper)
        x = np.where(degenerate, nearer, x)
        if diagnostics is not None:
            diagnostics["degenerate_samples"] = (
                diagnostics.get("degenerate_samples", 0) + int(np.sum(degenerate)))
    return np.clip(x, dist.lower, dist.upper)


def _check_support(dist, x):
    x = np.asarray(x, float)
    if np.any(x < dist.lower) or np.any(x > dist.upper):
        raise ValueError("x outside the policy support")
    return x


def log_pdf(dist, x):
    x = _check_support(dist, x)
    z = (x - dist.mu) / dist.sigma
    return -0.5 * z * z - LOG_SQRT_2PI - np.log(dist.sigma) - dist.log_z()


def grad_log_pdf(dist, x):
    """(d/dmu, d/dsigma) of log_pdf at x."""
    x = _check_support(dist, x)
    s = dist.sigma
    z = (x - dist.mu) / s
    a, b = dist.alpha, dist.beta
    lz = dist.log_z()
    ra = np.exp(log_phi(a) - lz)
    rb = np.exp(log_phi(b) - lz)
    d_mu = z / s + (rb - ra) / s
    d_sigma = (z * z - 1) / s + (b * rb - a * ra) / s
    return d_mu, d_sigma
