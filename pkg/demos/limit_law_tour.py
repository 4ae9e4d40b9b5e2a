"""
Surviving circles under repeated differentiation
================================================

Start from ``prod_j (z^m - r_j^m)`` with radii drawn from a base law, take
half of the derivatives, and compare the surviving circles with the
predicted limit quantile. Run with ``python3 demos/limit_law_tour.py``.
"""
import numpy as np

from rootflow import Dirac, PiecewiseLinearCDF, PowerLaw, evolve, from_radii, radii_view, sample_radii
from rootflow.prediction import LimitLaw, limit_quantile

n, m, t = 32, 1024, 0.5
k = int(n * m * t)

# %%
# Three base laws: uniform on [0, 1], a point mass at 1 and a power law
bases = {
    "uniform": PiecewiseLinearCDF([[0.0, 0.0], [1.0, 1.0]]),
    "dirac(1)": Dirac(1.0),
    "power(2)": PowerLaw(2.0),
}

for name, base in bases.items():
    state, stats = evolve(from_radii(sample_radii(base, n), m), k)
    s = np.sort(radii_view(state).radii)
    x = (np.arange(1, s.size + 1) - 0.5) / n
    q = limit_quantile(LimitLaw(base, t), np.minimum(x, 1 - t))
    print(f"{name:>9}: {s.size} circles survive, {state.q} roots sit at 0, "
          f"worst quantile gap {np.max(np.abs(s - q)):.4f}, at most {stats.max_iterations} solver iterations")

# %%
# The uniform law is a fixed point: the surviving radii stay on x itself
state, _ = evolve(from_radii(sample_radii(bases["uniform"], n), m), k)
s = np.sort(radii_view(state).radii)
x = (np.arange(1, s.size + 1) - 0.5) / n
print("\n   x      radius")
for xi, si in list(zip(x, s))[::4]:
    print(f"{xi:6.3f}  {si:8.5f}")
