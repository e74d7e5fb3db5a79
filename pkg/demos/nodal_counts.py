"""Deep nodal domains and common zeros on small tori.

Run: python demos/nodal_counts.py
"""
import numpy as np

from coarse_nodal import (TrigPoly, VectorTrigField, coarse_m, coarse_z, n_delta, norm_field, sample,
                          sublevel_barcode)

# sin(jx): every one of its 2j nodal intervals reaches |s| = 1, so m_0 = 2j for any delta < 1
for j in (1, 3, 8):
    g = sample(TrigPoly.sin(j), (256 * j,)).abs()
    print(f"sin({j}x):  m_0 at delta 0.5 = {coarse_m(g, 0.5).value}")

# the same count read off a barcode: bars of -|sin 3x| longer than 0.5
g = sample(TrigPoly.sin(3), (4096,))
b = sublevel_barcode(g.replace(samples=-np.abs(g.samples), sign=None))
print("N_0.5 of -|sin 3x| in degree 0:", n_delta(b, 0.5, degree=0))

# shallow domains drop out: 0.3 sin x + sin 4x has domains of very different depth
f = TrigPoly.sin(1) * 0.3 + TrigPoly.sin(4)
g = sample(f, (2048,)).abs()
for d in (0.2, 0.8, 1.1, 1.25):
    print(f"0.3 sin x + sin 4x: m_0 at delta {d} = {coarse_m(g, d).value}")

# common zeros of (sin jx, sin ky) on T^2: 4jk
v = VectorTrigField((TrigPoly.sin(3, 0, 2), TrigPoly.sin(2, 1, 2)))
g = norm_field(v, (512, 512))
print("z_0 of (sin 3x, sin 2y) at delta 0.3:", coarse_z(g, 0.3).value, "(4jk = 24)")
