"""Eigenvalues of L_{B_1} on a grid and the Lieb bound for spectrograms.

    python demos/spectrum_and_lieb.py
"""
import math

import numpy as np
from scipy.special import gammainc

from tfloc.phase_space import Ball, GridSpec, rasterize
from tfloc.spectral import spectrum
from tfloc.stft import gaussian_signal, lieb_check, random_hermite_signal

h = 0.05
res = spectrum(rasterize(Ball((0, 0), 1.0), GridSpec.centered(1.0 + h, h)))
exact = gammainc(np.arange(6) + 1, math.pi)
print("top eigenvalues of the unit-disc operator, grid vs incomplete-gamma values")
for k, (a, b) in enumerate(zip(res.eigenvalues[:6], exact)):
    print(f"  {k}: {a:.5f}  {b:.5f}")
print(f"trace {res.trace:.4f} (pi = {math.pi:.4f}), sum of squares {res.hs_sq:.4f}")
print("Schatten norms:", {p: round(v, 4) for p, v in res.schatten.items()})

print("\nLieb: ||V f||_p^p <= (2/p) ||f||^p, equality for the Gaussian")
for p in (2, 3, 4, 6):
    out = lieb_check(gaussian_signal(), p)
    print(f"  Gaussian p={p}: lhs {out['lhs']:.8f} rhs {out['rhs']:.8f}")
rng = np.random.default_rng(42)
for i in range(3):
    out = lieb_check(random_hermite_signal(rng), 4)
    print(f"  random signal {i} p=4: slack {out['slack']:.4f}")
