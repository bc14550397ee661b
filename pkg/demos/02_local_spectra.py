"""Lyapunov and GEM matrices at a few points, and what their spectra say.

At a critical point the two matrices coincide. Away from one, the GEM
matrix subtracts a gradient outer product weighted by 3/(2(E - V)),
which pushes eigenvalues down. In the Toda-type potential the only
unstable pocket sits below y = -0.5 on the x = 0 line, where V_xx < 0;
it becomes reachable once E exceeds V(0, -0.5) ~ 0.198.
Run: python demos/02_local_spectra.py
"""

import math

from localchaos import ModelSpec, local_spectrum, stability_matrix

toda = ModelSpec.toda()
for q in [(0.0, 0.0), (0.0, 0.5), (0.3, -0.2), (0.0, -0.51)]:
    lyap = local_spectrum(stability_matrix(toda, q, kind="lyapunov"))
    gem = stability_matrix(toda, q, energy=0.215, kind="gem")
    gem_txt = "invalid (outside E > V)" if not gem.valid else f"{local_spectrum(gem).lambda_plus:+.4f}"
    print(f"Toda q={q}: lyapunov lambda+={lyap.lambda_plus:+.4f} ({lyap.classification}), gem lambda+={gem_txt}")

# On a circular Kepler orbit the Lyapunov matrix has a positive radial eigenvalue 8 pi^2,
# while the GEM matrix is -4 pi^2 times the identity: stable, as it should be.
kepler = ModelSpec.kepler()
e_circ = -2 * math.pi**2
print("Kepler r=1 lyapunov:", local_spectrum(stability_matrix(kepler, (1, 0), kind="lyapunov")))
print("Kepler r=1 gem:     ", local_spectrum(stability_matrix(kepler, (1, 0), energy=e_circ, kind="gem")))
