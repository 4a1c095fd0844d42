"""Model-based stochastic dual gradient (SDG) solver.

For a fixed multiplier the Lagrangian separates over wavelengths and CSI
samples, so the primal step is a batch of independent 1-D maximizations of
``w log(1 + CNR(P, h)) - lam P`` over ``[0, p_s]``. The objective is not
concave in ``P`` (convex near zero where thermal noise dominates), hence a
global grid scan followed by golden-section refinement in the best bracket.
"""
from dataclasses import dataclass, field

import numpy as np

from .capacity import capacity, weighted_sum_capacity
from .channel import sample_csi
from .schedules import stepsize

INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass
class SdgConfig:
    iterations: int = 3000
    batch_size: int = 32
    eta: float = 0.05
    eta_schedule: str = "constant"
    eta_tau: float = 1.0
    grid_points: int = 256
    refine_tol: float = 1e-9
    lambda0: float = 0.0
    window: int = 100
    eval_every: int = 100

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size: must be >= 1")
        if self.grid_points < 2:
            raise ValueError("grid_points: must be >= 2")
        if not self.eta > 0:
            raise ValueError("eta: must be > 0")
        if self.lambda0 < 0:
            raise ValueError("lambda0: must be >= 0")
        if self.iterations < 1 or self.window < 1:
            raise ValueError("iterations and window must be >= 1")


@dataclass
class SolveTrajectory:
    """Per-iteration training records plus periodic held-out evaluations."""

    iteration: np.ndarray
    lam: np.ndarray
    objective: np.ndarray
    slack: np.ndarray
    extras: dict = field(default_factory=dict)
    evals: list = field(default_factory=list)
    final_lambda: float = 0.0
    policy: object = None

    def __len__(self):
        return len(self.iteration)

    def tail_slack(self, window):
        return self.slack[-window:]


def lagrangian_1d(p, lam, h, w, sys):
    return w * capacity(p, h, sys) - lam * p


def primal_step(lam, h, w, sys, p_s, grid_points=256, refine_tol=1e-9):
    """argmax over [0, p_s] of w log(1+CNR(P,h)) - lam P, elementwise.

    ``lam``, ``h`` and ``w`` broadcast against each other. Ties go to the
    smaller power.
    """
    if not p_s > 0:
        raise ValueError("p_s must be > 0")
    lam, h, w = np.broadcast_arrays(np.asarray(lam, float), np.asarray(h, float),
                                    np.asarray(w, float))
    shape = lam.shape
    lam, h, w = lam.ravel(), h.ravel(), w.ravel()

    grid = np.linspace(0.0, p_s, grid_points)
    vals = lagrangian_1d(grid[None, :], lam[:, None], h[:, None], w[:, None], sys)
    k = np.argmax(vals, axis=1)
    rows = np.arange(len(k))
    best_p = grid[k]
    best_f = vals[rows, k]

    lo = grid[np.maximum(k - 1, 0)]
    hi = grid[np.minimum(k + 1, grid_points - 1)]
    x = golden_section_max(lambda p: lagrangian_1d(p, lam, h, w, sys), lo, hi, refine_tol)
    fx = lagrangian_1d(x, lam, h, w, sys)
    take = (fx > best_f) | ((fx == best_f) & (x < best_p))
    out = np.where(take, x, best_p)
    return out.reshape(shape)


def golden_section_max(f, lo, hi, tol):
    """Vectorized golden-section maximization of ``f`` on brackets [lo, hi]."""
    lo = np.array(lo, float)
    hi = np.array(hi, float)
    width = float(np.max(hi - lo)) if lo.size else 0.0
    if width <= tol:
        return 0.5 * (lo + hi)
    n = int(np.ceil(np.log(tol / width) / np.log(INV_PHI)))
    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(n):
        right = f2 > f1
        # keep [x1, hi] where f2 wins, else [lo, x2]
        lo = np.where(right, x1, lo)
        hi = np.where(right, hi, x2)
        new_x1 = np.where(right, x2, hi - INV_PHI * (hi - lo))
        new_x2 = np.where(right, lo + INV_PHI * (hi - lo), x1)
        x1, x2 = new_x1, new_x2
        fn = f(np.where(right, x2, x1))
        f1, f2 = np.where(right, f2, fn), np.where(right, fn, f1)
    return 0.5 * (lo + hi)


def dual_step(lam, powers, eta_k, p_t):
    """Projected stochastic dual descent on the total-power multiplier.

    ``powers`` has shape ``(S, m)``; the batch mean of the per-sample total
    power stands in for the expectation over CSI.
    """
    powers = np.asarray(powers, float)
    if powers.ndim != 2:
        raise ValueError(f"powers must be (S, m), got shape {powers.shape}")
    grad = p_t - np.mean(np.sum(powers, axis=1))
    return max(0.0, lam - eta_k * grad)


class SdgPolicy:
    """Power allocation induced by a fixed multiplier."""

    def __init__(self, lam, w, sys, p_s, grid_points=256, refine_tol=1e-9):
        self.lam = lam
        self.w = np.asarray(w, float)
        self.sys = sys
        self.p_s = p_s
        self.grid_points = grid_points
        self.refine_tol = refine_tol

    def __call__(self, h):
        return primal_step(self.lam, h, self.w, self.sys, self.p_s,
                           self.grid_points, self.refine_tol)


def run(cfg, chan, sys, w, p_t, p_s, rng, evaluator=None):
    """Alternate per-channel Lagrangian maximization and dual descent.

    ``cfg.eta`` is applied to the slack relative to ``p_t`` (the raw dual step
    is ``eta_k / p_t``), so one setting serves different power budgets.

    ``evaluator(k, policy)`` is called every ``cfg.eval_every`` iterations and
    its return value appended to ``trajectory.evals``. The final multiplier is
    the mean of the last ``cfg.window`` iterates.
    """
    if not (p_t > 0 and p_s > 0):
        raise ValueError("p_t and p_s must be > 0")
    w = np.asarray(w, float)
    if w.shape != (chan.m,):
        raise ValueError(f"weights must have length m={chan.m}")
    n = cfg.iterations
    lam_hist = np.empty(n)
    obj_hist = np.empty(n)
    slack_hist = np.empty(n)
    lam = cfg.lambda0
    evals = []
    for k in range(n):
        H = sample_csi(chan, rng, cfg.batch_size)
        P = primal_step(lam, H, w, sys, p_s, cfg.grid_points, cfg.refine_tol)
        obj = float(np.mean(weighted_sum_capacity(P, H, w, sys)))
        if not np.isfinite(obj):
            raise FloatingPointError(f"non-finite objective at iteration {k}; check SystemParams")
        lam_hist[k] = lam
        obj_hist[k] = obj
        slack_hist[k] = p_t - float(np.mean(np.sum(P, axis=1)))
        lam = dual_step(lam, P, stepsize(cfg.eta, cfg.eta_schedule, k, cfg.eta_tau) / p_t, p_t)
        if evaluator is not None and cfg.eval_every and (k + 1) % cfg.eval_every == 0:
            pol = SdgPolicy(lam, w, sys, p_s, cfg.grid_points, cfg.refine_tol)
            evals.append(evaluator(k + 1, pol))
    final_lam = float(np.mean(lam_hist[-cfg.window:]))
    return SolveTrajectory(
        iteration=np.arange(n),
        lam=lam_hist,
        objective=obj_hist,
        slack=slack_hist,
        evals=evals,
        final_lambda=final_lam,
        policy=SdgPolicy(final_lam, w, sys, p_s, cfg.grid_points, cfg.refine_tol),
    )
