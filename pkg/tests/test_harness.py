import dataclasses
from importlib import resources
import json

import numpy as np
import pytest

from rofso_alloc import cli, config
from rofso_alloc.config import ConfigError, ExperimentConfig
from rofso_alloc.experiment import (EqualPowerPolicy, emit_plot_script, equal_power_baseline,
                                    evaluate, iterations_to_tolerance, read_csv, run_experiment)


def small_config(tmp_path, **over):
    cfg = config.load("fig1_m8")
    cfg.sdg = dataclasses.replace(cfg.sdg, iterations=60, window=20, eval_every=20)
    cfg.pddl = dataclasses.replace(cfg.pddl, iterations=60, window=20, eval_every=20,
                                   batch_size=16)
    cfg.eval_samples = 50
    cfg.output_dir = str(tmp_path / "out")
    for k, v in over.items():
        setattr(cfg, k, v)
    return cfg


def test_equal_power_examples():
    assert np.allclose(equal_power_baseline(8, 1.2, 0.3), 0.15)
    p = equal_power_baseline(2, 1.0, 0.3)
    assert np.allclose(p, 0.3) and p.sum() < 1.0
    assert equal_power_baseline(1, 0.2, 0.3)[0] == pytest.approx(0.2)
    pol = EqualPowerPolicy(4, 1.0, 0.3)
    assert np.all(pol(np.ones((3, 4))) == 0.25)


@pytest.mark.parametrize("name", config.BUNDLED)
def test_bundled_configs_load_and_roundtrip(name):
    cfg = config.load(name)
    again = config.loads(config.dumps(cfg))
    assert again == cfg
    assert config.dumps(again) == config.dumps(cfg)
    assert cfg.channel.wavelengths[0] == pytest.approx(1520e-9)


def test_bundled_parameter_values():
    cfg = config.load("fig1_m8")
    assert (cfg.m, cfg.p_t, cfg.p_s) == (8, 1.2, 0.3)
    s = cfg.system
    assert (s.m_p, s.omi, s.r, s.temperature) == (5.0, 0.15, 0.8, 300.0)
    assert s.rin == pytest.approx(1e-14 * 1e9)
    c = cfg.channel
    assert (c.d, c.d_tx, c.d_rx) == (1000.0, 0.05, 0.1)
    big = config.load("fig2_m16_large")
    assert (big.m, big.p_t, big.p_s) == (16, 4.0, 0.5)
    assert big.channel.wavelengths[-1] == pytest.approx(1595e-9)
    small = config.load("fig2_m16_small")
    assert (small.m, small.p_t, small.p_s) == (16, 2.4, 0.3)


def test_weights_resolution():
    cfg = config.load("fig1_m8")
    w = cfg.resolve_weights()
    assert np.array_equal(w, cfg.resolve_weights())
    assert np.all((w >= 0) & (w <= 1))
    text = config.dumps(cfg).replace("weights = random_uniform_0_1",
                                     "weights = 1, 2, 3, 4, 5, 6, 7, 8")
    assert np.array_equal(config.loads(text).resolve_weights(), np.arange(1.0, 9.0))


@pytest.mark.parametrize("edit,key", [
    (("m = 8", "m = 0"), "experiment.m"),
    (("p_t = 1.2", "p_t = -1"), "experiment.p_t"),
    (("batch_size = 128", "batch_size = many"), "pddl.batch_size"),
    (("[sdg]", "[sdg]\nbogus = 1"), "sdg.bogus"),
    (("weights = random_uniform_0_1", "weights = 1, 2"), "experiment.weights"),
])
def test_config_errors_name_the_key(edit, key):
    text = resources.files("rofso_alloc").joinpath("configs", "fig1_m8.ini").read_text()
    assert edit[0] in text
    text = text.replace(*edit, 1)
    with pytest.raises(ConfigError) as err:
        config.loads(text)
    assert err.value.key == key


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        config.load(tmp_path / "nope.ini")


def test_evaluate_shared_routine(sys_params, rng):
    H = 10 ** rng.uniform(-9.5, -8.5, (20, 4))
    w = np.ones(4)
    res = evaluate(EqualPowerPolicy(4, 1.0, 0.3), H, w, sys_params, 1.0)
    assert res["slack"] == pytest.approx(0.0)
    assert res["total_power"] == pytest.approx(1.0)


def test_iterations_to_tolerance():
    evals = [{"iteration": k, "objective": o, "slack": s}
             for k, o, s in [(1, 5.0, 0.5), (2, 9.95, 0.0), (3, 10.5, 0.3), (4, 10.0, 0.01),
                             (5, 10.02, -0.02)]]
    assert iterations_to_tolerance(evals, 10.0, 1.0) == 4


def test_run_experiment_outputs(tmp_path):
    cfg = small_config(tmp_path)
    report = run_experiment(cfg, "all")
    out = tmp_path / "out"
    for f in ("config.ini", "sdg_trajectory.csv", "sdg_eval.csv", "pddl_trajectory.csv",
              "pddl_eval.csv", "baseline_eval.csv", "pddl_policy.bin", "report.json", "report.txt"):
        assert (out / f).exists(), f
    header = (out / "pddl_trajectory.csv").read_text().splitlines()[0].split(",")
    assert header[:4] == ["iteration", "lambda", "objective", "slack"]
    assert header[4:] == ["mean_sigma", "grad_norm", "step"]
    traj = read_csv(out / "sdg_trajectory.csv")
    assert len(traj["iteration"]) == 60
    ev = read_csv(out / "pddl_eval.csv")
    assert list(ev["iteration"]) == [20, 40, 60]
    assert "stochastic_objective" in ev
    saved = json.loads((out / "report.json").read_text())
    assert set(saved["policies"]) == {"sdg", "pddl", "baseline"}
    assert saved["policies"]["baseline"]["objective"] == report["policies"]["baseline"]["objective"]
    assert config.load(out / "config.ini") == cfg

    script = emit_plot_script(out)
    text = script.read_text()
    assert "sdg_eval.csv" in text and str(tmp_path) not in text
    compile(text, str(script), "exec")


def test_single_solver_runs_and_plot_script_requirements(tmp_path):
    cfg = small_config(tmp_path)
    run_experiment(cfg, "baseline")
    out = tmp_path / "out"
    assert not (out / "sdg_trajectory.csv").exists()
    emit_plot_script(out)
    (out / "baseline_eval.csv").unlink()
    with pytest.raises(FileNotFoundError):
        emit_plot_script(out)
    with pytest.raises(ValueError):
        run_experiment(cfg, "everything")


def test_parallel_matches_sequential(tmp_path):
    a = small_config(tmp_path / "a")
    b = small_config(tmp_path / "b")
    run_experiment(a, "all", parallel=False)
    run_experiment(b, "all", parallel=True)
    for f in ("sdg_trajectory.csv", "pddl_trajectory.csv", "pddl_eval.csv", "report.json"):
        assert (tmp_path / "a" / "out" / f).read_bytes() == (tmp_path / "b" / "out" / f).read_bytes()


def test_cli_commands_and_exit_codes(tmp_path, capsys):
    cfg_path = tmp_path / "tiny.ini"
    config.save(small_config(tmp_path), cfg_path)
    out = tmp_path / "cli"
    assert cli.main(["run-baseline", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert "baseline" in capsys.readouterr().out
    assert cli.main(["run-sdg", "--config", str(cfg_path), "--out", str(out), "--iters", "10",
                     "--seed", "3"]) == 0
    assert len(read_csv(out / "sdg_trajectory.csv")["iteration"]) == 10
    assert config.load(out / "config.ini").seed == 3
    assert cli.main(["run-pddl", "--config", str(cfg_path), "--out", str(out), "--iters", "5"]) == 0
    assert cli.main(["plot-script", "--out", str(out)]) == 0
    assert (out / "plot_results.py").exists()

    assert cli.main(["compare", "--config", str(tmp_path / "missing.ini")]) == cli.EXIT_CONFIG
    bad = tmp_path / "bad.ini"
    bad.write_text(cfg_path.read_text().replace("p_s = 0.3", "p_s = 0"))
    assert cli.main(["compare", "--config", str(bad)]) == cli.EXIT_CONFIG
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.main(["run-baseline", "--config", str(cfg_path), "--out",
                     str(blocker / "sub")]) == cli.EXIT_IO
    assert cli.main(["plot-script", "--out", str(tmp_path / "empty")]) == cli.EXIT_IO
    assert cli.main(["run-sdg", "--config", str(cfg_path), "--iters", "0"]) == cli.EXIT_CONFIG
