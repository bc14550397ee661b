"""How long an instability lasts matters as much as how strong it is.

The toy matrix has one eigenvalue 1 - t/delta_t that starts positive and
decays linearly. With delta_t = 5 the deviation grows by an order of
magnitude before the system turns stable; with delta_t = 0.1 it never
leaves the unit ball. Run: python demos/01_toy_growth.py [out_dir]
"""

import sys
from pathlib import Path

import numpy as np

from localchaos import DeviationState, ToyParams, detect_unstable_intervals, propagate_deviation

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo-out") / "toy"
out.mkdir(parents=True, exist_ok=True)

for delta_t in (5.0, 0.1):
    rec = propagate_deviation(ToyParams(delta_t), DeviationState((1, 0), (0, 0)), h=1e-3, t_final=12.0)
    lam_plus = 1 - rec.t / delta_t
    [interval] = detect_unstable_intervals(rec.t, lam_plus)
    peak = np.abs(rec.xi[:, 0]).max()
    print(f"delta_t={delta_t:>4}: unstable on [{interval.t_start:.3f}, {interval.t_end:.3f}], "
          f"product={interval.product:.3f}, max|xi1|={peak:.3f} at t={rec.t[np.abs(rec.xi[:, 0]).argmax()]:.3f}")
    np.savetxt(out / f"toy_dt{delta_t:g}.csv", np.column_stack([rec.t, rec.xi, rec.envelope]),
               delimiter=",", header="t,xi1,xi2,envelope", comments="")

# The same numbers, packaged as an experiment with CSV, SVG and a manifest.
from localchaos.experiments import ExperimentConfig, run_experiment  # noqa: E402
from localchaos.report import emit_report  # noqa: E402

files = emit_report(run_experiment(ExperimentConfig(kind="toy", delta_t=5.0)), out / "experiment")
print("wrote", ", ".join(p.name for p in files))
