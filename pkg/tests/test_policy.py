import math

import numpy as np
import pytest
from scipy import integrate

from rofso_alloc import policy
from rofso_alloc.policy import PolicyHead, TruncatedGaussian


def std_cdf(z):
    return 0.5 * math.erfc(-z / math.sqrt(2))


def cdf_oracle(x, mu, sigma, lo, hi):
    a, b = std_cdf((lo - mu) / sigma), std_cdf((hi - mu) / sigma)
    return (std_cdf((x - mu) / sigma) - a) / (b - a)


def truncnorm_mean_oracle(mu, sigma, lo, hi):
    pdf = lambda x: math.exp(-0.5 * ((x - mu) / sigma) ** 2)
    z = integrate.quad(pdf, lo, hi, points=[mu] if lo < mu < hi else None, epsabs=0, epsrel=1e-12)[0]
    m1 = integrate.quad(lambda x: x * pdf(x), lo, hi, points=[mu] if lo < mu < hi else None,
                        epsabs=0, epsrel=1e-12)[0]
    return m1 / z


HEAD = PolicyHead.for_peak(0.3)


def test_head_center_and_saturation():
    d = policy.from_network_outputs(np.array([0.0, 0.0]), 0.3, HEAD)
    assert d.mu == pytest.approx(0.15)
    assert d.sigma == pytest.approx((HEAD.sigma_min + HEAD.sigma_max) / 2)
    d = policy.from_network_outputs(np.array([50.0, -50.0]), 0.3, HEAD)
    assert d.mu <= 0.3 and d.mu == pytest.approx(0.3)
    assert d.sigma >= HEAD.sigma_min
    with pytest.raises(FloatingPointError):
        policy.from_network_outputs(np.array([np.nan, 0.0]), 0.3, HEAD)
    with pytest.raises(ValueError):
        PolicyHead(0.2, 0.1)


def test_head_jacobian_finite_differences(rng):
    raw = rng.normal(0, 2, (20, 2))
    j_mu, j_sigma = policy.head_jacobian(raw, 0.3, HEAD)
    h = 1e-3
    for k, jac in ((0, j_mu), (1, j_sigma)):
        e = np.zeros(2)
        e[k] = h

        def f(r):
            d = policy.from_network_outputs(r, 0.3, HEAD)
            return d.mu if k == 0 else d.sigma

        # five-point stencil, O(h^4)
        fd = (-f(raw + 2 * e) + 8 * f(raw + e) - 8 * f(raw - e) + f(raw - 2 * e)) / (12 * h)
        assert np.max(np.abs(jac - fd) / np.abs(fd)) < 1e-8


def test_samples_in_support(rng):
    d = TruncatedGaussian(rng.uniform(-0.2, 0.5, 10**6), rng.uniform(1e-4, 0.3, 10**6), 0.0, 0.3)
    x = policy.sample(d, rng)
    assert x.min() >= 0.0 and x.max() <= 0.3


def test_far_tail_sampling_stays_finite(rng):
    d = TruncatedGaussian(np.array([-5.0, 5.3]), np.array([0.01, 0.01]), 0.0, 0.3)
    diag = {}
    x = policy.sample(d, rng, diag)
    assert np.all((x >= 0) & (x <= 0.3))
    assert x[0] < 0.01 and x[1] > 0.29


def test_small_sigma_mean(rng):
    d = TruncatedGaussian(np.full(10**5, 0.15), np.full(10**5, 3e-4), 0.0, 0.3)
    x = policy.sample(d, rng)
    assert abs(x.mean() - 0.15) < 3 * x.std() / np.sqrt(x.size)


def test_mean_formula_against_quadrature():
    for mu, sigma in [(0.15, 0.05), (0.01, 0.1), (0.29, 0.15), (-0.05, 0.03), (0.4, 0.1)]:
        d = TruncatedGaussian(mu, sigma, 0.0, 0.3)
        assert d.mean() == pytest.approx(truncnorm_mean_oracle(mu, sigma, 0.0, 0.3), rel=1e-9)


def test_degenerate_mass_falls_back_to_nearer_bound(rng):
    d = TruncatedGaussian(np.array([-100.0]), np.array([1e-3]), 0.0, 0.3)
    diag = {}
    x = policy.sample(d, rng, diag)
    assert x[0] == 0.0
    assert diag["degenerate_samples"] == 1


def test_log_pdf_tiny_mass_is_finite():
    # Z about 1e-12: window starts ~7 sigma right of the mean
    d = TruncatedGaussian(-0.07, 0.01, 0.0, 0.3)
    assert -29 < float(d.log_z()) < -26
    lp = policy.log_pdf(d, np.array([0.0, 0.001, 0.3]))
    assert np.all(np.isfinite(lp))
    gm, gs = policy.grad_log_pdf(d, np.array([0.001]))
    assert np.isfinite(gm) and np.isfinite(gs)


def test_untruncated_limit_matches_gaussian():
    mu, sigma = 0.15, 0.15 / 8
    d = TruncatedGaussian(mu, sigma, 0.0, 0.3)
    x = np.linspace(0.01, 0.29, 9)
    plain = -0.5 * ((x - mu) / sigma) ** 2 - 0.5 * np.log(2 * np.pi) - np.log(sigma)
    assert np.allclose(policy.log_pdf(d, x), plain, rtol=0, atol=1e-9)


def test_log_pdf_outside_support():
    d = TruncatedGaussian(0.1, 0.05, 0.0, 0.3)
    with pytest.raises(ValueError):
        policy.log_pdf(d, 0.31)
    with pytest.raises(ValueError):
        policy.grad_log_pdf(d, -0.01)


def test_cdf_matches_erf_oracle():
    d = TruncatedGaussian(0.05, 0.08, 0.0, 0.3)
    for x in (0.0, 0.02, 0.1, 0.25, 0.3):
        assert float(d.cdf(x)) == pytest.approx(cdf_oracle(x, 0.05, 0.08, 0.0, 0.3), abs=1e-12)


def test_density_integrates_to_one():
    for mu, sigma in [(0.15, 0.05), (0.0, 0.3), (0.3, 0.01), (-0.1, 0.05)]:
        d = TruncatedGaussian(mu, sigma, 0.0, 0.3)
        mass = integrate.quad(lambda x: math.exp(policy.log_pdf(d, x)), 0.0, 0.3,
                              points=[min(max(mu, 0.0), 0.3)], epsabs=1e-12, epsrel=1e-10)[0]
        assert mass == pytest.approx(1.0, abs=1e-6)


def test_score_finite_differences(rng):
    h = 1e-5
    for _ in range(20):
        mu, sigma = rng.uniform(0.0, 0.3), rng.uniform(0.01, 0.15)
        x = rng.uniform(0.01, 0.29)
        gm, gs = policy.grad_log_pdf(TruncatedGaussian(mu, sigma, 0.0, 0.3), x)
        lp = lambda m, s: float(policy.log_pdf(TruncatedGaussian(m, s, 0.0, 0.3), x))
        fm = (lp(mu + h, sigma) - lp(mu - h, sigma)) / (2 * h)
        fs = (lp(mu, sigma + h) - lp(mu, sigma - h)) / (2 * h)
        assert float(gm) == pytest.approx(fm, rel=1e-6, abs=1e-6)
        assert float(gs) == pytest.approx(fs, rel=1e-6, abs=1e-6)
