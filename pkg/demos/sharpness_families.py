"""Deficit scaling for the three families of near-extremal sets.

Each sweep fits log(deficit) against log(parameter); the CSV that the
CLI writes for the same sweep is printed for the first family.

    python demos/sharpness_families.py
"""
import numpy as np

from tfloc.deficit_lab import sweep_dilate, sweep_dumbbell, sweep_eps

eps = sweep_eps(np.geomspace(0.02, 0.2, 8))
print("ball with a thin shell moved outwards, deficit against eps")
print(eps.to_csv())
print(f"slope {eps.slope:.3f} (residual {eps.residual:.1e})\n")

dil = sweep_dilate()
print("two small discs scaled by r, deficit against measure")
for rep in dil.reports:
    print(f"  r={rep.param:.2f}  |Omega|={rep.omega_measure:.4f}  deficit={rep.deficit:.3e}  alpha={rep.alpha:.4f}")
print(f"slope {dil.slope:.3f}, alpha spread {dil.extra['alpha_spread']:.1e}\n")

db = sweep_dumbbell((2, 3, 4, 6))
print("annulus plus a far disc, deficit against measure, and the 2I bound")
for rep, two_i in zip(db.reports, db.extra["two_I"]):
    print(f"  r={rep.param:.0f}  |Omega|={rep.omega_measure:8.3f}  deficit={rep.deficit:.6f}  2I={two_i:.6f}")
print(f"slope {db.slope:.3f}")
