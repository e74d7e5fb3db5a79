"""Multiscale dyadic partitions and averaged Taylor fits on the unit cube.

Run: python demos/dyadic_partition.py
"""
from coarse_nodal import (DyadicCube, SobolevParams, TrigPoly, averaged_taylor, build_mdp, mdp_count_check,
                          random_combination)

params = SobolevParams(k=2, p=2, n=1)
print(" j   |K|  levels   bars N_{4 delta}   bound C_nk |K|")
for j in (4, 16, 64):
    part = build_mdp(TrigPoly.sin(j), 0.1, params)
    chk = mdp_count_check(TrigPoly.sin(j), 0.1, params, partition=part)
    print(f"{j:3d} {part.size:5d} {len(part.levels):6d} {chk.n_actual:12d} {chk.bound:14.1f}")

# a 2D field: the partition refines where the field oscillates hardest
f = random_combination(2, 40.0, seed=3)
part = build_mdp(f, 0.5, SobolevParams(2, 2, 2))
by_level = {}
for c in part.cubes:
    by_level[c.level] = by_level.get(c.level, 0) + 1
print("2D leaves per level:", dict(sorted(by_level.items())), "tiling:", part.is_tiling())

# the averaged Taylor remainder against its closed-form bound
for level in (0, 2, 4):
    fit = averaged_taylor(TrigPoly.sin(9), DyadicCube(level, (0,)), SobolevParams(3, 2, 1))
    print(f"level {level}: sup error {fit.sup_error:.3e}  bound {fit.bound:.3e}  ratio {fit.ratio:.3f}")
