import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import dblquad
from scipy.special import jv

from tfloc.deficit_lab import family_eps
from tfloc.errors import InputError, MarginTooSmall
from tfloc.hs_engine import (
    TRUNCATION_RADIUS,
    Method,
    ball_fourier_transform,
    ball_fourier_transform_quadrature,
    coherent_overlap,
    coherent_overlap_exact,
    cross_term,
    gauss_kernel_sq,
    hs_norm_sq,
    hs_norm_sq_grid,
    hs_norm_sq_radial,
    trace_localization,
)
from tfloc.phase_space import Ball, GridField, GridRegion, GridSpec, RadialRegion, coverage, rasterize
from tfloc.rearrange import rearrange_function

# ||L_{B_r}||_HS^2 for d = 1 from the disc covariogram
#   int_0^{2r} exp(-pi s^2) (2 r^2 acos(s/2r) - s sqrt(r^2 - s^2/4)) 2 pi s ds
# (adaptive quadrature, independent of the Bessel route)
COVARIOGRAM_HS = {
    0.05: 6.120370795157883e-05,
    0.5: 0.3327185308376652,
    1.0: 2.1621542366291324,
    2.0: 10.576393939407087,
    4.0: 46.27046538394744,
}

points = st.tuples(st.floats(-4, 4), st.floats(-4, 4))


def test_truncation_radius():
    assert TRUNCATION_RADIUS == pytest.approx(3.2, abs=0.01)
    assert math.exp(-math.pi * TRUNCATION_RADIUS**2) == pytest.approx(1e-14)


def test_gauss_kernel_values():
    assert gauss_kernel_sq((0.3, 0.1), (0.3, 0.1)) == 1.0
    assert gauss_kernel_sq((0, 0), (1, 0)) == pytest.approx(0.0432139, rel=1e-6)
    assert gauss_kernel_sq((0, 0), (0, 2)) == pytest.approx(3.4873e-6, rel=1e-4)


def test_self_overlap_is_one():
    assert coherent_overlap((0.7, -1.1), (0.7, -1.1)) == pytest.approx(1.0 + 0j, abs=1e-13)


@given(points, points)
def test_overlap_modulus_identity(z, w):
    v = coherent_overlap(z, w)
    d2 = (z[0] - w[0]) ** 2 + (z[1] - w[1]) ** 2
    assert abs(abs(v) ** 2 - math.exp(-math.pi * d2)) < 1e-8
    assert abs(abs(v) - math.exp(-math.pi * d2 / 2)) < 1e-8


@given(points, points)
def test_overlap_quadrature_matches_closed_form(z, w):
    assert abs(coherent_overlap(z, w) - complex(coherent_overlap_exact(z, w))) < 1e-10


def test_overlap_hermitian():
    z, w = (0.3, -0.8), (-1.2, 0.5)
    assert coherent_overlap(z, w) == pytest.approx(np.conj(coherent_overlap(w, z)), abs=1e-13)


def test_overlap_rejects_non_finite():
    with pytest.raises(InputError):
        coherent_overlap((np.nan, 0), (0, 0))


@given(st.integers(0, 2**32 - 1))
def test_gauss_kernel_positive_definite(seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.5, 1.5, (25, 2))
    G = gauss_kernel_sq(pts[:, None, :], pts[None, :, :])
    G = 0.5 * (G + G.T)
    assert np.linalg.eigvalsh(G).min() >= -1e-10


# -- grid route --------------------------------------------------------------------------------


def test_zero_field():
    spec = GridSpec.centered(1.0, 0.1)
    res = hs_norm_sq_grid(GridField(spec, np.zeros(spec.shape)))
    assert res.hs_sq == 0.0


def test_large_ball_ratio_tends_to_one():
    spec = GridSpec.centered(4.0 + TRUNCATION_RADIUS + 0.1, 0.1)
    res = hs_norm_sq_grid(rasterize(Ball((0, 0), 4.0), spec))
    assert res.hs_sq / (16 * math.pi) > 0.9


def test_ball_matches_covariogram_at_h002():
    spec = GridSpec.centered(1.0 + TRUNCATION_RADIUS + 0.05, 0.02)
    g = hs_norm_sq_grid(coverage(Ball((0, 0), 1.0), spec)).hs_sq
    assert abs(g - COVARIOGRAM_HS[1.0]) / COVARIOGRAM_HS[1.0] < 1e-3


def test_cell_center_ball_is_close():
    spec = GridSpec.centered(1.0 + TRUNCATION_RADIUS + 0.05, 0.02)
    g = hs_norm_sq_grid(rasterize(Ball((0, 0), 1.0), spec)).hs_sq
    assert abs(g - COVARIOGRAM_HS[1.0]) / COVARIOGRAM_HS[1.0] < 0.02


def test_routes_agree_to_1e10():
    rng = np.random.default_rng(5)
    spec = GridSpec.centered(0.6 + TRUNCATION_RADIUS + 0.1, 0.1)
    X, Y = spec.mesh()
    v = np.where(X * X + Y * Y < 0.36, rng.standard_normal(spec.shape) + 1j * rng.standard_normal(spec.shape), 0)
    F = GridField(spec, v)
    conv = hs_norm_sq_grid(F, "convolution").hs_sq
    direct = hs_norm_sq_grid(F, "direct").hs_sq
    fft = hs_norm_sq_grid(F, "fft").hs_sq
    assert direct == pytest.approx(conv, rel=1e-10)
    assert fft == pytest.approx(conv, rel=1e-10)


def test_method_tags():
    spec = GridSpec.centered(0.5 + TRUNCATION_RADIUS + 0.1, 0.1)
    R = rasterize(Ball((0, 0), 0.5), spec)
    assert hs_norm_sq_grid(R, "direct").method is Method.GRID_DIRECT
    assert hs_norm_sq_grid(R).method is Method.GRID_CONVOLUTION
    assert hs_norm_sq(RadialRegion.ball(1.0)).method is Method.RADIAL_BESSEL
    assert hs_norm_sq_grid(R).as_dict()["method"] == "grid_convolution"


def test_margin_enforced():
    spec = GridSpec.centered(1.5, 0.1)
    R = rasterize(Ball((0, 0), 1.0), spec)
    with pytest.raises(MarginTooSmall):
        hs_norm_sq_grid(R)
    assert hs_norm_sq_grid(R, margin=0).hs_sq > 0


def test_unknown_method():
    spec = GridSpec.centered(0.5 + TRUNCATION_RADIUS + 0.1, 0.1)
    with pytest.raises(InputError):
        hs_norm_sq_grid(rasterize(Ball((0, 0), 0.3), spec), "magic")


def test_cell_stencil_is_exact_for_step_functions():
    # two cells, value 1: exact HS of the union of two squares by 4-d quadrature
    h = 0.25
    spec = GridSpec((-1.0, -1.0), h, 8, 8)
    mask = np.zeros(spec.shape, bool)
    mask[3, 3] = mask[3, 5] = True
    got = hs_norm_sq_grid(GridRegion(spec, mask), margin=0, stencil="cell").hs_sq

    def pair(dx):
        # int over two unit-h squares offset by dx along x of exp(-pi |z-w|^2)
        fx = dblquad(lambda u, v: math.exp(-math.pi * (u - v + dx) ** 2), 0, h, 0, h, epsabs=1e-14)[0]
        fy = dblquad(lambda u, v: math.exp(-math.pi * (u - v) ** 2), 0, h, 0, h, epsabs=1e-14)[0]
        return fx * fy

    expected = 2 * pair(0.0) + 2 * pair(2 * h)
    assert got == pytest.approx(expected, rel=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_hs_bounded_by_l2(seed):
    rng = np.random.default_rng(seed)
    spec = GridSpec.centered(1.0 + TRUNCATION_RADIUS + 0.1, 0.1)
    X, Y = spec.mesh()
    v = np.where((np.abs(X) < 1) & (np.abs(Y) < 1), rng.standard_normal(spec.shape), 0.0)
    F = GridField(spec, v)
    res = hs_norm_sq_grid(F)
    assert 0 <= res.hs_sq < F.l2**2


@given(st.integers(0, 2**32 - 1))
def test_hs_increases_under_layer_cake(seed):
    rng = np.random.default_rng(seed)
    spec = GridSpec.centered(1.0 + TRUNCATION_RADIUS + 0.1, 0.1)
    X, Y = spec.mesh()
    v = np.where((np.abs(X) < 1) & (np.abs(Y) < 1), rng.exponential(1.0, spec.shape), 0.0)
    v *= rng.random(spec.shape) < 0.5
    if not v.any():
        return
    F = GridField(spec, v)
    a = hs_norm_sq_grid(F, stencil="cell").hs_sq
    b = hs_norm_sq_radial(rearrange_function(F)).hs_sq
    assert a <= b * (1 + 1e-9)


def test_cross_term_symmetric():
    spec = GridSpec.centered(2.0 + TRUNCATION_RADIUS, 0.1)
    A = rasterize(Ball((-0.5, 0), 0.4), spec)
    B = rasterize(Ball((0.6, 0.2), 0.5), spec)
    assert cross_term(A, B) == pytest.approx(cross_term(B, A), rel=1e-12)
    both = hs_norm_sq_grid(A | B).hs_sq
    assert both == pytest.approx(hs_norm_sq_grid(A).hs_sq + hs_norm_sq_grid(B).hs_sq + 2 * cross_term(A, B))


# -- radial route ---------------------------------------------------------------------------


def test_ball_transform_constants():
    # small-radius limit is the volume; closed form equals the Bessel integral
    assert ball_fourier_transform(1.0, 0.0, 1) == pytest.approx(math.pi)
    assert ball_fourier_transform(1e-3, 0.7, 1) == pytest.approx(math.pi * 1e-6, rel=1e-5)
    rho = np.array([0.3, 1.0, 2.7])
    for d in (1, 2, 3):
        assert np.allclose(ball_fourier_transform(1.3, rho, d), ball_fourier_transform_quadrature(1.3, rho, d), rtol=1e-10)
    assert ball_fourier_transform(1.0, 0.5, 1) == pytest.approx(jv(1, math.pi) / 0.5)


@pytest.mark.parametrize("r", sorted(COVARIOGRAM_HS))
def test_radial_matches_covariogram(r):
    assert hs_norm_sq_radial(RadialRegion.ball(r, 2)).hs_sq == pytest.approx(COVARIOGRAM_HS[r], rel=1e-10)


def test_small_ball_limit():
    r = 0.05
    m = math.pi * r * r
    assert abs(hs_norm_sq_radial(RadialRegion.ball(r, 2)).hs_sq - m * m) / (m * m) < 1e-2


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("r", [0.3, 1.0, 2.5])
def test_radial_strictly_below_measure(r, d):
    b = RadialRegion.ball(r, 2 * d)
    assert 0 < hs_norm_sq_radial(b).hs_sq < b.measure


def test_small_ball_limit_higher_dimension():
    b = RadialRegion.ball(0.03, 4)
    assert hs_norm_sq_radial(b).hs_sq == pytest.approx(b.measure**2, rel=1e-2)


def test_eps_family_cross_route():
    region = family_eps(0.1, 1)
    exact = hs_norm_sq_radial(region).hs_sq
    spec = GridSpec.centered(1.1 + TRUNCATION_RADIUS + 0.05, 0.02)
    grid = hs_norm_sq_grid(coverage(region, spec)).hs_sq
    assert abs(grid - exact) / exact < 1e-3


def test_trace():
    assert trace_localization(RadialRegion.ball(1.0)) == pytest.approx(math.pi)
    spec = GridSpec.centered(1.0, 0.1)
    assert trace_localization(GridRegion(spec, np.zeros(spec.shape, bool))) == 0.0
