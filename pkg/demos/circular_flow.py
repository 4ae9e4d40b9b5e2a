"""
The circular derivative keeps the product of moduli
===================================================

``z P' - (N/2) P`` has the same degree as ``P`` and the same ``|P(0)|`` up to
the leading factor, so the geometric mean of the moduli cannot move while the
circles draw together. Twelve circles of radius ``1..12`` with fifteen
points each.
"""
import math

import numpy as np

from rootflow import roots_as_complex
from rootflow.complex_dynamics import circular_derivative, log_abs_product
from rootflow.radial_dynamics import from_radii

z = roots_as_complex(from_radii(np.arange(1.0, 13.0), 15))
target = math.factorial(12) ** (1 / 12)
print(f"target geometric mean {target:.12f}")
print("step  geometric mean    spread of moduli")
for step in range(201):
    if step % 40 == 0:
        gm = math.exp(log_abs_product(z) / z.size)
        print(f"{step:4d}  {gm:.12f}  {np.ptp(np.abs(z)):.3e}")
    z = circular_derivative(z)
