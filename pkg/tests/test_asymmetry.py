import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tfloc.asymmetry import fraenkel, overlap_fraction
from tfloc.deficit_lab import family_eps, two_disc_dumbbell
from tfloc.errors import EmptyRegion
from tfloc.phase_space import Ball, GridRegion, GridSpec, Union, rasterize


def test_disc_is_nearly_symmetric():
    region = rasterize(Ball((0.0, 0.0), 1.0), GridSpec.centered(1.05, 0.02))
    res = fraenkel(region)
    assert 0 <= res.alpha <= 0.02
    assert np.hypot(*res.best_center) < 0.02


def test_two_far_discs():
    spec = GridSpec.lattice(-1.2, 11.2, -1.2, 1.2, 0.05)
    region = rasterize(Union((Ball((0, 0), 1.0), Ball((10, 0), 1.0))), spec)
    assert fraenkel(region).alpha == pytest.approx(1.0, abs=0.05)


def test_eps_family_is_asymmetric():
    eps = 0.1
    region = rasterize(family_eps(eps, 1), GridSpec.centered(1.15, 0.01))
    a = fraenkel(region).alpha
    assert a >= 0.5 * eps
    # never worse than the concentric ball
    assert a <= overlap_fraction(region, (0.0, 0.0)) + 1e-12


def test_empty_region():
    spec = GridSpec.centered(1.0, 0.1)
    with pytest.raises(EmptyRegion):
        fraenkel(GridRegion(spec, np.zeros(spec.shape, bool)))


def test_translation_invariance_lattice_shift():
    h = 0.02
    spec = GridSpec.lattice(-1.0, 2.0, -1.0, 1.0, h)
    a = rasterize(two_disc_dumbbell(0.2, 0.6), spec)
    shifted = GridRegion(spec, np.roll(a.mask, (7, 23), axis=(0, 1)))
    assert abs(fraenkel(a).alpha - fraenkel(shifted).alpha) < 1e-3


@pytest.mark.parametrize("r", [0.5, 2.0])
def test_scale_invariance(r):
    base = GridSpec.lattice(-0.5, 0.5, -0.25, 0.25, 0.01)
    mask = rasterize(two_disc_dumbbell(0.2, 0.6), base).mask
    a0 = fraenkel(GridRegion(base, mask)).alpha
    a1 = fraenkel(GridRegion(base.scaled(r), mask)).alpha
    assert abs(a0 - a1) < 0.02


@settings(max_examples=8)
@given(st.integers(0, 2**32 - 1))
def test_alpha_range(seed):
    rng = np.random.default_rng(seed)
    spec = GridSpec.centered(0.6, 0.1)
    region = GridRegion(spec, rng.random(spec.shape) < rng.uniform(0.05, 0.6))
    if region.count == 0:
        return
    res = fraenkel(region)
    assert 0 <= res.alpha < 2
    assert res.evaluations > 0


def test_objective_matches_supersampled_overlap():
    spec = GridSpec.centered(1.5, 0.05)
    region = rasterize(Union((Ball((0.3, 0.0), 0.5), Ball((-0.6, 0.4), 0.3))), spec)
    r = math.sqrt(region.measure / math.pi)
    c = (0.12, 0.07)
    # 40 x 40 sub-samples per member cell
    k = 40
    off = (np.arange(k) + 0.5) / k - 0.5
    sx, sy = np.meshgrid(off * spec.h, off * spec.h)
    inside = 0
    for x, y in region.points():
        inside += np.count_nonzero((x + sx - c[0]) ** 2 + (y + sy - c[1]) ** 2 < r * r)
    overlap = inside / k**2 * spec.cell_area
    expected = 2 * (region.measure - overlap) / region.measure
    assert overlap_fraction(region, c) == pytest.approx(expected, abs=2e-4)
    assert overlap_fraction(region, (5.0, 5.0)) == 2.0


def test_as_dict():
    region = rasterize(Ball((0.0, 0.0), 0.5), GridSpec.centered(0.6, 0.05))
    d = fraenkel(region).as_dict()
    assert set(d) == {"alpha", "best_center", "evaluations", "converged"}
