"""Model-free primal-dual learning of per-wavelength policy networks.

Each wavelength has its own network mapping the standardized log10 CSI of
that wavelength to the (mu, sigma) of a truncated-Gaussian power policy.
Network parameters climb a score-function estimate of the Lagrangian
gradient; the multiplier follows projected stochastic dual descent. The
learner only sees capacities through a :class:`~.capacity.CapacityOracle`.
"""
from dataclasses import dataclass, field

import numpy as np

from . import mlp, policy
from .schedules import stepsize
from .sdg import SolveTrajectory, dual_step

MAX_HALVINGS = 10


@dataclass
class PddlConfig:
    iterations: int = 20000
    batch_size: int = 32
    delta: float = 5e-4
    delta_schedule: str = "constant"
    delta_tau: float = 1.0
    eta: float = 0.02
    eta_schedule: str = "constant"
    eta_tau: float = 1.0
    lambda0: float = 0.0
    warmup_batches: int = 10
    variance_reduction: bool = False
    baseline_decay: float = 0.99
    layer_sizes: tuple = (1, 20, 10, 5, 2)
    sigma_min_frac: float = 1e-3
    sigma_max_frac: float = 0.5
    window: int = 100
    eval_every: int = 100

    def __post_init__(self):
        self.layer_sizes = tuple(int(n) for n in self.layer_sizes)
        if self.batch_size < 1:
            raise ValueError("batch_size: must be >= 1")
        if not (self.delta > 0 and self.eta > 0):
            raise ValueError("delta and eta must be > 0")
        if self.lambda0 < 0:
            raise ValueError("lambda0: must be >= 0")
        if self.layer_sizes[0] != 1 or self.layer_sizes[-1] != 2:
            raise ValueError("per-channel networks need input width 1 and output width 2")
        if self.iterations < 1 or self.window < 1 or self.warmup_batches < 1:
            raise ValueError("iterations, window and warmup_batches must be >= 1")


@dataclass
class InputNormalizer:
    """Per-channel standardization of log10(h)."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, H):
        logs = np.log10(np.maximum(H, 1e-300))
        std = logs.std(axis=0)
        return cls(logs.mean(axis=0), np.where(std > 0, std, 1.0))

    def __call__(self, H):
        return (np.log10(np.maximum(H, 1e-300)) - self.mean) / self.std


@dataclass
class PolicyParams:
    """``theta[i]`` is the flat parameter vector of the network for wavelength i."""

    theta: np.ndarray
    spec: mlp.MlpSpec
    normalizer: InputNormalizer
    head: policy.PolicyHead
    p_s: float

    @property
    def m(self):
        return self.theta.shape[0]

    def network_inputs(self, H):
        # (S, m) -> (m, S, 1)
        return self.normalizer(np.asarray(H, float)).T[:, :, None]

    def distribution(self, H):
        raw, cache = mlp.forward(self.theta, self.spec, self.network_inputs(H))
        raw = np.swapaxes(raw, 0, 1)
        return policy.from_network_outputs(raw, self.p_s, self.head), raw, cache

    def mean_power(self, H):
        """Deterministic allocation: the mean of each channel's policy."""
        dist, _, _ = self.distribution(H)
        return dist.mean()

    __call__ = mean_power


@dataclass
class Batch:
    H: np.ndarray
    P: np.ndarray
    dist: policy.TruncatedGaussian
    raw: np.ndarray
    cache: tuple


def sample_batch(params, H, rng, diagnostics=None):
    """Draw one power vector per CSI row from the current policy."""
    H = np.asarray(H, float)
    if H.ndim != 2 or H.shape[1] != params.m:
        raise ValueError(f"CSI batch must be (S, {params.m}), got {H.shape}")
    dist, raw, cache = params.distribution(H)
    P = policy.sample(dist, rng, diagnostics)
    if diagnostics is not None:
        outside = int(np.sum((P < 0) | (P > params.p_s)))
        diagnostics["samples"] = diagnostics.get("samples", 0) + P.size
        diagnostics["out_of_support"] = diagnostics.get("out_of_support", 0) + outside
    return Batch(H, P, dist, raw, cache)


def lagrangian_samples(capacities, P, lam, p_t, w):
    return np.sum(w * capacities, axis=1) + lam * (p_t - np.sum(P, axis=1))


def policy_gradient(params, batch, capacities, lam, p_t, w, baseline=0.0):
    """Score-function estimate of the Lagrangian gradient w.r.t. every theta.

    ``(1/S) sum_j (L_j - baseline) grad log pi(P_j | h_j)``; the log-density
    of a power vector is a sum over channels, and channel i's term depends
    only on network i, so each network receives its own score times L_j.
    """
    capacities = np.asarray(capacities, float)
    if capacities.shape != batch.P.shape:
        raise ValueError(f"capacities {capacities.shape} do not match batch {batch.P.shape}")
    S = batch.P.shape[0]
    L = lagrangian_samples(capacities, batch.P, lam, p_t, np.asarray(w, float)) - baseline
    d_mu, d_sigma = policy.grad_log_pdf(batch.dist, batch.P)
    j_mu, j_sigma = policy.head_jacobian(batch.raw, params.p_s, params.head)
    weight = L[:, None] / S
    d_raw = np.stack([weight * d_mu * j_mu, weight * d_sigma * j_sigma], axis=-1)
    return mlp.backward(params.theta, params.spec, batch.cache, np.swapaxes(d_raw, 0, 1))


def primal_update(theta, grad, delta_k):
    """Gradient ascent step, halving the step until the result is finite."""
    step = delta_k
    for _ in range(MAX_HALVINGS + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            new = theta + step * grad
        if np.all(np.isfinite(new)):
            return new, step
        step *= 0.5
    raise FloatingPointError("non-finite policy gradient after repeated step halving")


dual_update = dual_step


def init_params(cfg, csi_source, m, p_s, rng):
    spec = mlp.MlpSpec(cfg.layer_sizes)
    warm = csi_source(cfg.warmup_batches * cfg.batch_size)
    normalizer = InputNormalizer.fit(warm)
    head = policy.PolicyHead.for_peak(p_s, cfg.sigma_min_frac, cfg.sigma_max_frac)
    theta = mlp.init(spec, rng, count=m)
    return PolicyParams(theta, spec, normalizer, head, p_s)


def run(cfg, csi_source, oracle, w, p_t, p_s, rng, evaluator=None, params=None):
    """Train for ``cfg.iterations`` steps; returns (PolicyParams, trajectory).

    ``csi_source(n)`` returns an ``(n, m)`` array of i.i.d. CSI. ``evaluator``
    is called as ``evaluator(k, policy_params)`` every ``cfg.eval_every``
    iterations. As in the SDG solver, ``cfg.eta`` scales the slack relative
    to ``p_t``.
    """
    if not (p_t > 0 and p_s > 0):
        raise ValueError("p_t and p_s must be > 0")
    w = np.asarray(w, float)
    m = len(w)
    if params is None:
        params = init_params(cfg, csi_source, m, p_s, rng)
    n = cfg.iterations
    hist = {key: np.empty(n) for key in
            ("lam", "objective", "slack", "mean_sigma", "grad_norm", "step")}
    lam = cfg.lambda0
    baseline = 0.0
    diagnostics = {"degenerate_samples": 0, "samples": 0, "out_of_support": 0}
    evals = []
    for k in range(n):
        H = np.asarray(csi_source(cfg.batch_size), float)
        batch = sample_batch(params, H, rng, diagnostics)
        caps = oracle(batch.P, H)
        L = lagrangian_samples(caps, batch.P, lam, p_t, w)
        b = baseline if cfg.variance_reduction and k > 0 else 0.0
        grad = policy_gradient(params, batch, caps, lam, p_t, w, baseline=b)
        if cfg.variance_reduction:
            mean_L = float(np.mean(L))
            baseline = mean_L if k == 0 else cfg.baseline_decay * baseline + (1 - cfg.baseline_decay) * mean_L
        theta, step = primal_update(params.theta, grad, stepsize(cfg.delta, cfg.delta_schedule, k, cfg.delta_tau))
        params.theta = theta

        hist["lam"][k] = lam
        hist["objective"][k] = float(np.mean(np.sum(w * caps, axis=1)))
        hist["slack"][k] = p_t - float(np.mean(np.sum(batch.P, axis=1)))
        hist["mean_sigma"][k] = float(np.mean(batch.dist.sigma))
        hist["grad_norm"][k] = float(np.linalg.norm(grad))
        hist["step"][k] = step

        # dual step uses the powers of the updated policy on the same CSI
        P_new = sample_batch(params, H, rng, diagnostics).P
        lam = dual_update(lam, P_new, stepsize(cfg.eta, cfg.eta_schedule, k, cfg.eta_tau) / p_t, p_t)
        if evaluator is not None and cfg.eval_every and (k + 1) % cfg.eval_every == 0:
            evals.append(evaluator(k + 1, params))

    traj = SolveTrajectory(
        iteration=np.arange(n),
        lam=hist["lam"],
        objective=hist["objective"],
        slack=hist["slack"],
        extras={key: hist[key] for key in ("mean_sigma", "grad_norm", "step")},
        evals=evals,
        final_lambda=float(np.mean(hist["lam"][-cfg.window:])),
        policy=params,
    )
    traj.diagnostics = diagnostics
    return params, traj
