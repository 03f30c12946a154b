"""Coherent-state overlaps and the two ways of computing ||L_Omega||_HS^2.

    python demos/kernel_and_routes.py
"""
import math

import numpy as np

from tfloc.hs_engine import TRUNCATION_RADIUS, coherent_overlap, hs_norm_sq_grid, hs_norm_sq_radial
from tfloc.phase_space import Ball, GridSpec, RadialRegion, coverage

rng = np.random.default_rng(0)
z, w = rng.uniform(-2, 2, (2, 2))
v = coherent_overlap(z, w)
print(f"<phi_z, phi_w> for z={z.round(3)}, w={w.round(3)}: {v:.6f}")
print(f"  |.|^2 = {abs(v) ** 2:.12f}  vs  exp(-pi|z-w|^2) = {math.exp(-math.pi * np.sum((z - w) ** 2)):.12f}")

print("\nballs in the plane: radial Bessel route against the grid route (exact cell coverage)")
print(f"{'r':>5} {'radial':>14} {'grid h=0.04':>14} {'grid h=0.02':>14} {'|B_r|':>10}")
for r in (0.5, 1.0, 2.0):
    exact = hs_norm_sq_radial(RadialRegion.ball(r, 2)).hs_sq
    grid = []
    for h in (0.04, 0.02):
        spec = GridSpec.centered(r + TRUNCATION_RADIUS + 0.1, h)
        grid.append(hs_norm_sq_grid(coverage(Ball((0, 0), r), spec)).hs_sq)
    print(f"{r:5.2f} {exact:14.10f} {grid[0]:14.10f} {grid[1]:14.10f} {math.pi * r * r:10.6f}")

# small balls: HS ~ |B|^2; large balls: HS ~ |B|
for r in (0.05, 4.0):
    m = math.pi * r * r
    hs = hs_norm_sq_radial(RadialRegion.ball(r, 2)).hs_sq
    print(f"r={r}: hs/|B|^2 = {hs / m**2:.4f}, hs/|B| = {hs / m:.4f}")
