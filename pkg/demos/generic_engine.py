"""
Structured roots against the generic complex engine
===================================================

The radial engine only knows circles. Here the same polynomial is fed to the
generic Aberth engine, first exactly, then with every argument jiggled, and
the moduli of the two root sets are compared after each derivative.
"""
import numpy as np

from rootflow import levy_distance, roots_as_complex
from rootflow.complex_dynamics import derivative_roots_complex, perturb_arguments
from rootflow.radial_dynamics import differentiate_once, from_radii

rng = np.random.default_rng(1)
radii = np.sort(rng.uniform(0.5, 2.0, 6))
m = 8
state = from_radii(radii, m)

exact = roots_as_complex(state)
jiggled = perturb_arguments(exact, 1.0 / m, seed=7)

print(" k  structured-vs-exact  Levy(structured, jiggled)")
for k in range(1, 25):
    exact = derivative_roots_complex(exact)
    jiggled = derivative_roots_complex(jiggled)
    state = differentiate_once(state)
    ref = np.sort(np.abs(roots_as_complex(state)))
    gap = np.max(np.abs(np.sort(np.abs(exact)) - ref))
    if k % 4 == 0:
        print(f"{k:2d}  {gap:19.2e}  {levy_distance(np.abs(jiggled), ref):24.4f}")
