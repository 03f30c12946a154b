"""Cauchy wavelets on the upper half-plane.

The squared wavelet transform of the wavelet itself depends on z only
through the hyperbolic distance to i; rearranging a set into a hyperbolic
ball about i raises the Hilbert-Schmidt norm of its localization operator.

    python demos/hyperbolic_kernel.py
"""
import numpy as np

from tfloc.hyperbolic import (
    HypRegion,
    cauchy_kernel,
    d_hyp,
    hyp_ball,
    hyp_hs_norm_sq,
    hyp_rearrange_on_grid,
    wavelet_selfoverlap_quadrature,
)
from tfloc.phase_space import GridSpec

for z in [(0.0, 1.0), (0.5, 2.0), (-1.0, 0.3)]:
    d = float(d_hyp(z, (0.0, 1.0)))
    print(f"z={z}: d_H={d:.4f}  rho(d)={cauchy_kernel(d):.10f}  quadrature={wavelet_selfoverlap_quadrature(z):.10f}")

b = hyp_ball(1.0)
print(f"\nhyperbolic unit ball: center {b.euclid_center}, radius {b.euclid_radius:.6f}, nu {b.nu_measure:.6f}")

spec = GridSpec.lattice(-1.5, 1.5, 0.3, 3.0, 0.05)
X, Y = spec.mesh()
mask = (np.hypot(X - 0.6, Y - 1.2) < 0.35) | (np.hypot(X + 0.7, Y - 0.9) < 0.25)
region = HypRegion(spec, mask)
star = hyp_rearrange_on_grid(region)
print(f"two discs: nu {region.nu_measure:.4f}, HS {hyp_hs_norm_sq(region):.6f}; rearranged HS {hyp_hs_norm_sq(star):.6f}")
