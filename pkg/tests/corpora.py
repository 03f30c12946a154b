"""Seeded random sets and fields shared by the property and acceptance tests."""
import numpy as np
from scipy import ndimage

from tfloc.phase_space import GridSpec
from tfloc.rearrange import Intervals


def blob_mask(rng, spec: GridSpec, core, quantile=(0.5, 0.9), sigma=(1.0, 4.0)):
    """Thresholded smoothed noise restricted to ``core`` (often disconnected)."""
    noise = ndimage.gaussian_filter(rng.standard_normal(spec.shape), rng.uniform(*sigma))
    return (noise > np.quantile(noise[core], rng.uniform(*quantile))) & core, noise


def planar_corpus(seed=42, n=200, h=0.1, half=1.5, margin=3.3):
    """Pairs ``(mask, field_values)`` on one centered grid with a kernel margin."""
    rng = np.random.default_rng(seed)
    spec = GridSpec.centered(half + margin, h)
    X, Y = spec.mesh()
    core = (np.abs(X) < half) & (np.abs(Y) < half)
    out = []
    while len(out) < n:
        m, noise = blob_mask(rng, spec, core)
        if not m.any():
            continue
        vals = np.where(core, np.maximum(noise, 0) * rng.uniform(0, 1, spec.shape), 0.0)
        if not vals.any():
            continue
        out.append((m, vals))
    return spec, out


def half_plane_corpus(seed=0, n=50, h=0.05):
    """Random blob sets in the box ``[-1.5, 1.5] x [0.3, 3]``, kept off the box edge."""
    rng = np.random.default_rng(seed)
    spec = GridSpec.lattice(-1.5, 1.5, 0.3, 3.0, h)
    core = np.ones(spec.shape, dtype=bool)
    core[0] = core[-1] = False
    core[:, 0] = core[:, -1] = False
    out = []
    while len(out) < n:
        m, _ = blob_mask(rng, spec, core, quantile=(0.75, 0.95), sigma=(2.0, 6.0))
        if m.any():
            out.append(m)
    return spec, out


def interval_unions(seed=7, n=50, max_parts=4):
    """Unions of 2..max_parts disjoint intervals with random gaps and lengths."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        k = int(rng.integers(2, max_parts + 1))
        x, parts = 0.0, []
        for _ in range(k):
            x += rng.uniform(0.1, 2.0)
            length = rng.uniform(0.2, 1.5)
            parts.append((x, x + length))
            x += length
        out.append(Intervals(tuple(parts)))
    return out
