"""Indicator-kernel deficits on the line.

For unions of intervals the autocorrelation T(Omega, b) is exact, so the
ratio of the deficit to (|B|/|Omega|)^2 |Omega|^2 alpha^2 can be tabulated
without discretization error.

    python demos/indicator_probe.py
"""
from tfloc.deficit_lab import conjecture2_probe, indicator_autocorrelation
from tfloc.rearrange import Intervals

one = Intervals(((0.0, 2.0),))
for b in (0.25, 0.5, 1.0):
    print(f"T([0,2], {b}) = {indicator_autocorrelation(one, b):.12f}  (2bL - b^2 = {2 * b * 2 - b * b})")

print(f"\n{'gap':>5} {'b':>5} {'alpha':>7} {'deficit':>12} {'ratio':>8}")
for gap in (0.5, 1.0, 2.0, 4.0):
    om = Intervals(((0.0, 1.0), (1.0 + gap, 2.0 + gap)))
    for b in (0.2, 0.5, 1.0):
        rep = conjecture2_probe(om, b, 0.1)
        print(f"{gap:5.1f} {b:5.2f} {rep.alpha:7.4f} {rep.lhs_deficit:12.6f} {rep.ratio:8.4f}")
