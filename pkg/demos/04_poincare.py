"""A Poincaré section (x = 0, p_x > 0) of the Toda-type potential.

At low energy every orbit traces a closed curve on the section; near
E = 0.215 the same plot is where any scatter would show up. The SVG is
written next to the CSV it was drawn from.
Run: python demos/04_poincare.py [out_dir]
"""

import sys
from pathlib import Path

from localchaos import ModelSpec, poincare_section
from localchaos.experiments import ExperimentConfig, run_experiment, section_start
from localchaos.report import emit_report

points = poincare_section(ModelSpec.toda(), section_start(0.1, 0.2), h=1e-2, t_final=500.0)
ys = [p.y for p in points]
print(f"E=0.1: {len(points)} crossings, y in [{min(ys):.4f}, {max(ys):.4f}]")

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo-out") / "poincare"
record = run_experiment(ExperimentConfig(kind="toda-poincare", energy=0.215, ensemble=6, t_final=300.0))
emit_report(record, out)
print("E=0.215:", record.summary)
