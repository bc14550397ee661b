"""Lyapunov versus GEM along Kepler orbits.

The Lyapunov eigenvalue 8 pi^2 / r^3 is positive everywhere on any Kepler
orbit, which would wrongly flag this integrable system as unstable. The
GEM eigenvalue is negative on low-eccentricity orbits and turns positive
only for a short stretch around perihelion when the orbit is eccentric.
Run: python demos/05_kepler_indicators.py [out_dir]
"""

import sys
from pathlib import Path

from localchaos.experiments import ExperimentConfig, run_experiment
from localchaos.report import emit_report

root = Path(sys.argv[1] if len(sys.argv) > 1 else "demo-out")
for ecc in (0.1, 0.5, 0.9):
    record = run_experiment(ExperimentConfig(kind="celestial", model="kepler", a=1.0, ecc=ecc))
    s = record.summary
    gem = s["verdicts"]["gem"]
    print(f"e={ecc}: lyapunov positive on {100 * s['lyapunov_positive_fraction']:.0f}% of samples; "
          f"GEM intervals={gem['n_intervals']}, max product={gem['max_product']:.4g}, "
          f"max delta_t*sqrt(lambda)={gem['max_mu_product']:.4g}, energy drift={s['energy_drift']:.1e}")
    for iv in record.verdicts["gem"].intervals:
        print(f"    unstable {iv.t_start:.4f} .. {iv.t_end:.4f} yr, lambda_max={iv.lambda_max:.1f}")
    emit_report(record, root / f"kepler_e{ecc}")

# A light perturbation by a circling Jupiter changes little at one AU.
record = run_experiment(ExperimentConfig(kind="celestial", model="threebody", a=1.0, ecc=0.9))
print("three-body e=0.9:", record.summary["verdicts"]["gem"])
