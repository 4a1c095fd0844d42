"""Experiment orchestration: SDG, PDDL and the equal-power baseline.

Every policy is scored by :func:`evaluate` on one shared held-out CSI set.
Random streams are derived from the master seed by fixed offsets, so each
solver's results do not depend on which other solvers ran.
"""
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import config as config_mod
from . import mlp, pddl, sdg
from .capacity import ModelOracle, weighted_sum_capacity
from .channel import sample_csi

log = logging.getLogger(__name__)

STREAM_EVAL = 1
STREAM_SDG = 2
STREAM_PDDL_CSI = 3
STREAM_PDDL_POLICY = 4
STREAM_PDDL_EVAL = 5

POLICIES = ("sdg", "pddl", "baseline")
FEASIBILITY_TOL = 0.05


def stream(seed, offset):
    return np.random.default_rng(np.random.SeedSequence([offset, seed]))


class EqualPowerPolicy:
    """Constant allocation min(p_t/m, p_s) on every wavelength."""

    def __init__(self, m, p_t, p_s):
        if m < 1:
            raise ValueError("m must be >= 1")
        self.m = m
        self.power = min(p_t / m, p_s)

    def __call__(self, H):
        H = np.asarray(H, float)
        return np.full(H.shape, self.power)


def equal_power_baseline(m, p_t, p_s):
    return np.full(m, min(p_t / m, p_s))


def evaluate(policy_fn, H, w, sys, p_t):
    """Mean weighted capacity and power slack of a policy over a CSI set."""
    P = np.asarray(policy_fn(H), float)
    total = float(np.mean(np.sum(P, axis=1)))
    return {
        "objective": float(np.mean(weighted_sum_capacity(P, H, w, sys))),
        "slack": p_t - total,
        "total_power": total,
    }


def eval_csi(cfg):
    return sample_csi(cfg.channel, stream(cfg.seed, STREAM_EVAL), cfg.eval_samples)


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_csv(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return {name: data[:, i] for i, name in enumerate(header)}


def write_trajectory(path, traj):
    extras = list(traj.extras)
    cols = ["iteration", "lambda", "objective", "slack"] + extras
    rows = zip(traj.iteration, traj.lam, traj.objective, traj.slack,
               *(traj.extras[e] for e in extras))
    write_csv(path, cols, rows)


def write_evals(path, evals):
    cols = list(evals[0]) if evals else ["iteration", "lambda", "objective", "slack"]
    write_csv(path, cols, [[e[c] for c in cols] for e in evals])


def run_sdg(cfg, w, H_eval):
    def evaluator(k, pol):
        return {"iteration": k, "lambda": pol.lam, **evaluate(pol, H_eval, w, cfg.system, cfg.p_t)}

    traj = sdg.run(cfg.sdg, cfg.channel, cfg.system, w, cfg.p_t, cfg.p_s,
                   stream(cfg.seed, STREAM_SDG), evaluator=evaluator)
    final = evaluate(traj.policy, H_eval, w, cfg.system, cfg.p_t)
    return traj, final


def run_pddl(cfg, w, H_eval, oracle=None):
    """Train PDDL. Training sees capacities only through ``oracle``; held-out
    scoring is done here, outside the learner."""
    if oracle is None:
        oracle = ModelOracle(cfg.system)
    csi_rng = stream(cfg.seed, STREAM_PDDL_CSI)
    eval_seed = cfg.seed

    def csi_source(n):
        return sample_csi(cfg.channel, csi_rng, n)

    def stochastic(params, k):
        rng = np.random.default_rng(np.random.SeedSequence([STREAM_PDDL_EVAL, eval_seed, k]))
        return lambda H: pddl.sample_batch(params, H, rng).P

    def evaluator(k, params):
        det = evaluate(params.mean_power, H_eval, w, cfg.system, cfg.p_t)
        sto = evaluate(stochastic(params, k), H_eval, w, cfg.system, cfg.p_t)
        return {"iteration": k, "lambda": np.nan, **det,
                "stochastic_objective": sto["objective"], "stochastic_slack": sto["slack"]}

    params, traj = pddl.run(cfg.pddl, csi_source, oracle, w, cfg.p_t, cfg.p_s,
                            stream(cfg.seed, STREAM_PDDL_POLICY), evaluator=evaluator)
    # lambda at each evaluation point is the iterate of the following iteration
    for e in traj.evals:
        k = e["iteration"]
        e["lambda"] = float(traj.lam[k]) if k < len(traj.lam) else traj.final_lambda
    final = evaluate(params.mean_power, H_eval, w, cfg.system, cfg.p_t)
    return params, traj, final


def run_baseline(cfg, w, H_eval):
    pol = EqualPowerPolicy(cfg.m, cfg.p_t, cfg.p_s)
    final = evaluate(pol, H_eval, w, cfg.system, cfg.p_t)
    return pol, final


def iterations_to_tolerance(evals, final_objective, p_t, tol=FEASIBILITY_TOL, rel=0.01):
    """First evaluation iteration after which every evaluation is feasible
    within ``tol * p_t`` and within ``rel`` of the final objective."""
    ok = [abs(e["slack"]) <= tol * p_t and
          abs(e["objective"] - final_objective) <= rel * abs(final_objective)
          for e in evals]
    first = None
    for e, good in zip(evals, ok):
        if good and first is None:
            first = e["iteration"]
        elif not good:
            first = None
    return first


def tail_abs_slack(traj, window):
    return float(np.mean(np.abs(traj.slack[-window:])))


def comparison_report(cfg, results):
    """Summarize final held-out results; ratios are relative objective gaps."""
    report = {"name": cfg.name, "m": cfg.m, "p_t": cfg.p_t, "p_s": cfg.p_s,
              "seed": cfg.seed, "eval_samples": cfg.eval_samples, "policies": {}}
    for name, res in results.items():
        entry = {"objective": res["final"]["objective"],
                 "slack": res["final"]["slack"],
                 "total_power": res["final"]["total_power"]}
        traj = res.get("trajectory")
        if traj is not None:
            window = getattr(cfg, name).window
            entry["final_lambda"] = traj.final_lambda
            entry["tail_abs_slack"] = tail_abs_slack(traj, window)
            entry["iterations_to_tolerance"] = iterations_to_tolerance(
                traj.evals, entry["objective"], cfg.p_t)
        report["policies"][name] = entry
    objs = {k: v["objective"] for k, v in report["policies"].items()}
    gaps = {}
    for a, b in (("sdg", "baseline"), ("pddl", "baseline"), ("pddl", "sdg")):
        if a in objs and b in objs and objs[b] != 0:
            gaps[f"{a}/{b}"] = objs[a] / objs[b]
    report["ratios"] = gaps
    return report


def format_report(report):
    lines = [f"experiment {report['name']}: m={report['m']} P_T={report['p_t']} W "
             f"P_S={report['p_s']} W seed={report['seed']}"]
    for name, e in report["policies"].items():
        extra = ""
        if "tail_abs_slack" in e:
            extra = (f"  lambda*={e['final_lambda']:.4f}  tail|slack|={e['tail_abs_slack']:.4f}"
                     f"  iters-to-tol={e['iterations_to_tolerance']}")
        lines.append(f"  {name:9s} objective={e['objective']:.4f}  slack={e['slack']:+.4f}{extra}")
    for key, val in report["ratios"].items():
        lines.append(f"  {key:14s} {val:.4f}")
    return "\n".join(lines) + "\n"


def run_experiment(cfg, which="all", out_dir=None, parallel=False):
    """Run the selected policies and write CSVs, checkpoint and report.

    Returns the report dict. ``which`` is one of sdg, pddl, baseline, all.
    """
    if which not in POLICIES + ("all",):
        raise ValueError(f"unknown policy selection {which!r}")
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    config_mod.save(cfg, out / "config.ini")

    selected = POLICIES if which == "all" else (which,)
    w = cfg.resolve_weights()
    H_eval = eval_csi(cfg)

    def job(name):
        t0 = time.perf_counter()
        if name == "sdg":
            traj, final = run_sdg(cfg, w, H_eval)
            res = {"trajectory": traj, "final": final}
        elif name == "pddl":
            params, traj, final = run_pddl(cfg, w, H_eval)
            res = {"trajectory": traj, "final": final, "params": params}
        else:
            _, final = run_baseline(cfg, w, H_eval)
            res = {"final": final}
        log.info("%s finished in %.1f s", name, time.perf_counter() - t0)
        return name, res

    if parallel and len(selected) > 1:
        with ThreadPoolExecutor(max_workers=len(selected)) as pool:
            results = dict(pool.map(job, selected))
    else:
        results = dict(job(name) for name in selected)

    for name in ("sdg", "pddl"):
        if name in results:
            traj = results[name]["trajectory"]
            write_trajectory(out / f"{name}_trajectory.csv", traj)
            write_evals(out / f"{name}_eval.csv", traj.evals)
    if "pddl" in results:
        params = results["pddl"]["params"]
        mlp.save_checkpoint(out / "pddl_policy.bin", params.theta, params.spec)
    if "baseline" in results:
        f = results["baseline"]["final"]
        write_csv(out / "baseline_eval.csv", ["iteration", "lambda", "objective", "slack"],
                  [[0, 0.0, f["objective"], f["slack"]]])

    report = comparison_report(cfg, {k: results[k] for k in POLICIES if k in results})
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    (out / "report.txt").write_text(format_report(report))
    report["results"] = results
    return report


PLOT_TEMPLATE = '''"""Plot objective and slack curves of a finished experiment.

Run from anywhere: paths are resolved relative to this file.
"""
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

HERE = Path(__file__).resolve().parent
SERIES = {series!r}
P_T = {p_t!r}


def load(name):
    with open(HERE / name) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return dict(zip(header, data.T))


fig, (ax_obj, ax_slack) = plt.subplots(1, 2, figsize=(10, 4))
last = 1
for label, fname in SERIES.items():
    d = load(fname)
    last = max(last, d["iteration"].max())
for label, fname in SERIES.items():
    d = load(fname)
    if len(d["iteration"]) == 1:
        ax_obj.hlines(d["objective"][0], 0, last, linestyles="--", label=label)
        ax_slack.hlines(d["slack"][0], 0, last, linestyles="--", label=label)
    else:
        ax_obj.plot(d["iteration"], d["objective"], label=label)
        ax_slack.plot(d["iteration"], d["slack"], label=label)
ax_obj.set_xlabel("iteration")
ax_obj.set_ylabel("weighted capacity (nats)")
ax_slack.set_xlabel("iteration")
ax_slack.set_ylabel("P_T - E[sum P] (W)")
ax_slack.axhline(0.0, color="k", lw=0.5)
ax_obj.legend()
fig.tight_layout()
fig.savefig(HERE / "curves.png", dpi=120)
'''


def emit_plot_script(out_dir, report=None):
    """Write ``plot_results.py`` next to the evaluation CSVs in ``out_dir``."""
    out = Path(out_dir)
    names = {"SDG": "sdg_eval.csv", "PDDL": "pddl_eval.csv", "equal power": "baseline_eval.csv"}
    if report is None:
        report = json.loads((out / "report.json").read_text())
    present = {label: f for label, f in names.items()
               if label == "SDG" and "sdg" in report["policies"]
               or label == "PDDL" and "pddl" in report["policies"]
               or label == "equal power" and "baseline" in report["policies"]}
    missing = [f for f in present.values() if not (out / f).exists()]
    if missing or not present:
        raise FileNotFoundError(f"missing CSVs in {out}: {missing or list(names.values())}")
    path = out / "plot_results.py"
    path.write_text(PLOT_TEMPLATE.format(series=present, p_t=report["p_t"]))
    return path
