"""
Running a bundled experiment
============================

Load a bundled config, shorten it, run all three policies and write the
CSV outputs plus a plotting script. The same thing is available from the
shell as ``rofso-alloc compare --config fig1_m8 --out runs/fig1``.
"""

import dataclasses
import tempfile
from pathlib import Path

from rofso_alloc import config
from rofso_alloc.experiment import emit_plot_script, format_report, run_experiment

cfg = config.load("fig1_m8")
cfg.sdg = dataclasses.replace(cfg.sdg, iterations=500)
cfg.pddl = dataclasses.replace(cfg.pddl, iterations=2000)

out = Path(tempfile.mkdtemp(prefix="rofso_demo_"))
report = run_experiment(cfg, "all", out_dir=out)
print(format_report(report))

emit_plot_script(out)
print("outputs in", out)
for f in sorted(out.iterdir()):
    print("  ", f.name)
