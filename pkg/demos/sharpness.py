"""Building eigenfunction combinations with many deep nodal domains.

Bumps of radius eps = sqrt(A / lambda) are placed on a packing of the torus,
summed, and projected onto frequencies |xi|^2 <= lambda. The count of deep
domains then grows like lambda^{n/2}.

Run: python demos/sharpness.py
"""
from coarse_nodal import SharpnessConfig, coarse_m, sample, sharpness_construct
from coarse_nodal.spectral import nyquist_samples

for lam in (316.2, 1000.0, 3162.3):
    res = sharpness_construct(SharpnessConfig(2, lam, delta=1.0, A=64.0), seed=0)
    N = nyquist_samples(lam)
    m0 = coarse_m(sample(res.f, (N, N)).abs(), 0.99 * res.depth).value
    print(f"lambda={lam:7.1f}  bumps={res.config.N:4d}  passing={res.passing:4d}  m_0={m0:4d}  "
          f"||F-P||={res.remainder:.3e} <= ||Lap F||/lambda={res.laplacian_bound:.3e}")
