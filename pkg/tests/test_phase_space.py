import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tfloc.errors import (
    DimensionMismatch,
    InputError,
    MalformedHeader,
    ShapeExceedsGrid,
    TruncatedPayload,
)
from tfloc.phase_space import (
    Ball,
    GridField,
    GridRegion,
    GridSpec,
    RadialRegion,
    Union,
    coverage,
    dilate,
    measure,
    rasterize,
    read_region,
    region_from_bytes,
    region_to_bytes,
    shift,
    symm_diff_measure,
    unit_ball_volume,
    write_region,
)


def test_unit_ball_volume():
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(4) == pytest.approx(math.pi**2 / 2)
    assert unit_ball_volume(1) == pytest.approx(2.0)


def test_radial_measures():
    assert measure(RadialRegion(2, ((0.0, 1.0),))) == pytest.approx(math.pi)
    assert measure(RadialRegion(2, ((1.0, 2.0),))) == pytest.approx(3 * math.pi)
    assert RadialRegion(4, ((0.0, 1.0), (2.0, 3.0))).measure == pytest.approx(math.pi**2 / 2 * (1 + 81 - 16))


def test_radial_region_rejects_overlap_and_odd_dimension():
    with pytest.raises(InputError):
        RadialRegion(2, ((0.0, 1.0), (0.5, 2.0)))
    with pytest.raises(InputError):
        RadialRegion(3, ((0.0, 1.0),))
    with pytest.raises(InputError):
        RadialRegion(2, ((1.0, 1.0),))


def test_empty_mask_measure():
    spec = GridSpec.centered(1.0, 0.1)
    assert measure(GridRegion(spec, np.zeros(spec.shape, bool))) == 0.0


def test_gridspec_validation():
    with pytest.raises(InputError):
        GridSpec((0.0, 0.0), 0.0, 3, 3)
    with pytest.raises(InputError):
        GridSpec((0.0, 0.0), 0.1, 0, 3)


def test_centered_grid_has_origin_cell():
    spec = GridSpec.centered(1.0, 0.1)
    assert np.min(np.abs(spec.x)) < 1e-12
    assert np.min(np.abs(spec.y)) < 1e-12


def test_mask_length_checked():
    spec = GridSpec.centered(1.0, 0.1)
    with pytest.raises(InputError):
        GridRegion(spec, np.zeros(7, bool))


def test_unit_disc_measure_at_h001():
    spec = GridSpec.centered(1.1, 0.01)
    assert abs(rasterize(Ball((0, 0), 1.0), spec).measure - math.pi) < 0.01 * math.pi


def test_zero_ball_is_empty():
    spec = GridSpec.centered(1.0, 0.1)
    assert rasterize(Ball((0, 0), 0.0), spec).count == 0


def test_annulus_measure_at_h002():
    spec = GridSpec.centered(2.1, 0.02)
    m = rasterize(RadialRegion(2, ((1.0, 2.0),)), spec).measure
    assert abs(m - 3 * math.pi) < 0.01 * 3 * math.pi


def test_rasterize_outside_grid():
    spec = GridSpec.centered(1.0, 0.1)
    with pytest.raises(ShapeExceedsGrid):
        rasterize(Ball((0, 0), 2.0), spec)


def test_rasterize_converges_like_h():
    errs = []
    for h in (0.1, 0.05, 0.025):
        spec = GridSpec.centered(1.2, h)
        errs.append(abs(rasterize(Ball((0.013, -0.029), 1.0), spec).measure - math.pi))
    assert all(e <= 2.0 * h for e, h in zip(errs, (0.1, 0.05, 0.025)))


def test_coverage_is_exact_for_the_disc():
    spec = GridSpec.centered(1.2, 0.05)
    F = coverage(Ball((0.01, 0.02), 1.0), spec)
    assert F.l1 == pytest.approx(math.pi, abs=1e-12)
    assert np.all((F.values >= 0) & (F.values <= 1))


def test_symm_diff_same_ball():
    h = 0.02
    spec = GridSpec.centered(1.2, h)
    A = rasterize(Ball((0, 0), 1.0), spec)
    assert symm_diff_measure(A, (0, 0), 1.0) <= 10 * h


def test_symm_diff_disjoint_and_concentric():
    spec = GridSpec.lattice(-1.5, 11.5, -1.5, 1.5, 0.02)
    A = rasterize(Ball((0, 0), 1.0), spec)
    assert symm_diff_measure(A, (10, 0), 1.0) == pytest.approx(2 * math.pi, rel=0.01)
    assert symm_diff_measure(A, (0, 0), math.sqrt(2)) == pytest.approx(math.pi, rel=0.01)


def test_symm_diff_ball_outside_grid():
    spec = GridSpec.centered(1.2, 0.05)
    A = rasterize(Ball((0, 0), 1.0), spec)
    with pytest.raises(ShapeExceedsGrid):
        symm_diff_measure(A, (5, 0), 1.0)


def test_symm_diff_matches_cell_count():
    spec = GridSpec.centered(2.0, 0.05)
    A = rasterize(Union((Ball((-0.6, 0), 0.5), Ball((0.7, 0.2), 0.6))), spec)
    c, r = (0.1, -0.05), 0.9
    B = rasterize(Ball(c, r), spec)
    expected = (A.mask ^ B.mask).sum() * spec.cell_area
    assert symm_diff_measure(A, c, r) == pytest.approx(expected)
    overlap = (A.mask & B.mask).sum() * spec.cell_area
    assert symm_diff_measure(A, c, r) == pytest.approx(A.measure + B.measure - 2 * overlap)


@given(st.integers(0, 2**32 - 1))
def test_disjoint_union_measure_adds(seed):
    rng = np.random.default_rng(seed)
    spec = GridSpec.centered(1.0, 0.1)
    a = rng.random(spec.shape) < 0.3
    b = (rng.random(spec.shape) < 0.3) & ~a
    A, B = GridRegion(spec, a), GridRegion(spec, b)
    assert (A | B).measure == pytest.approx(A.measure + B.measure)
    assert (A & B).measure == 0.0
    assert A.measure >= 0


def test_shift_and_dilate_shapes():
    b = Ball((0.5, 0.0), 1.0)
    assert shift(b, (1.0, 2.0)).center == (1.5, 2.0)
    d = dilate(b, 2.0)
    assert d.radius == 2.0 and d.measure == pytest.approx(4 * math.pi)
    r = dilate(RadialRegion.ball(1.0), 3.0)
    assert r.measure == pytest.approx(9 * math.pi)


def test_grid_field_norms():
    spec = GridSpec.centered(1.0, 0.1)
    v = np.zeros(spec.shape, dtype=complex)
    v[3, 4] = 2 + 0j
    F = GridField(spec, v)
    assert F.l1 == pytest.approx(2 * spec.cell_area)
    assert F.l2 == pytest.approx(2 * spec.h)


def test_grid_field_rejects_non_finite():
    spec = GridSpec.centered(1.0, 0.1)
    v = np.zeros(spec.shape)
    v[0, 0] = np.nan
    with pytest.raises(InputError):
        GridField(spec, v)


# -- RGN1 ---------------------------------------------------------------------------------------


@given(st.integers(1, 17), st.integers(1, 13), st.integers(0, 2**32 - 1))
def test_rgn1_round_trip(nx, ny, seed):
    rng = np.random.default_rng(seed)
    spec = GridSpec((-0.37, 1.25), 0.1 / 3, nx, ny)
    region = GridRegion(spec, rng.random((ny, nx)) < 0.5)
    back = region_from_bytes(region_to_bytes(region))
    assert back == region
    assert back.spec == spec
    assert np.array_equal(back.mask, region.mask)


def test_rgn1_layout():
    spec = GridSpec((0.0, 0.0), 0.5, 3, 3)
    mask = np.zeros((3, 3), bool)
    mask[0, 0] = True  # bit 0
    mask[0, 2] = True  # bit 2
    mask[2, 2] = True  # bit 8
    data = region_to_bytes(GridRegion(spec, mask))
    assert data.startswith(b"RGN1")
    header, payload = data[4:].split(b"\n", 1)
    assert header.split()[:2] == [b"3", b"3"]
    assert payload == bytes([0b00000101, 0b00000001])


def test_rgn1_file_round_trip(tmp_path):
    spec = GridSpec.centered(1.0, 0.05)
    region = rasterize(Ball((0.1, 0), 0.7), spec)
    p = tmp_path / "disc.rgn"
    write_region(p, region)
    assert read_region(p) == region
    assert p.read_bytes() == region_to_bytes(region)


def test_rgn1_errors():
    spec = GridSpec((0.0, 0.0), 0.5, 4, 4)
    good = region_to_bytes(GridRegion(spec, np.ones((4, 4), bool)))
    with pytest.raises(MalformedHeader):
        region_from_bytes(b"RGN2" + good[4:])
    with pytest.raises(TruncatedPayload):
        region_from_bytes(good[:-1])
    with pytest.raises(MalformedHeader):
        region_from_bytes(b"RGN1 4 4 x 0 0\n" + b"\xff\xff")
    with pytest.raises(DimensionMismatch):
        region_from_bytes(b"RGN1" + b"0 4 0.5 0 0\n")
