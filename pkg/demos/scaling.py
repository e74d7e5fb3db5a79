"""Scaling of deep nodal counts with the eigenvalue cutoff and with depth.

Run: python demos/scaling.py   (about a minute)
"""
import numpy as np

from coarse_nodal import courant_sweep, wiggly_example

rep = courant_sweep(1, [100, 316.2, 1000, 3162.3, 10000], delta=0.5, trials=20, seed=0)
print(rep.ensemble)
for lam, med in zip(*rep.medians()):
    print(f"  lambda={lam:8.1f}  median m_0={med:5.1f}")
print(f"fitted exponent vs lambda+1: {rep.exponent:.3f}  95% CI ({rep.ci[0]:.3f}, {rep.ci[1]:.3f})")

rep = courant_sweep(2, [25, 50, 100, 200, 400], delta=0.3, trials=5, seed=0)
print(f"T^2, delta 0.3: medians {rep.medians()[1]}, exponent {rep.exponent:.3f}")

# x^4 sin(1/x): infinitely many nodal domains, but only polynomially many deep ones
rep = wiggly_example(4.0, 1.0, np.logspace(-10, -8, 5))
for d, row in zip(sorted(np.logspace(-10, -8, 5)), rep.rows):
    print(f"  delta={d:.1e}  m_0={row[2]}")
print(f"slope of log m_0 vs log 1/delta: {rep.exponent:.3f}")
