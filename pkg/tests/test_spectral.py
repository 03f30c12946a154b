import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gammainc

from tfloc.errors import CellCapExceeded, EmptyRegion, InputError
from tfloc.hs_engine import TRUNCATION_RADIUS, hs_norm_sq_grid
from tfloc.phase_space import Ball, GridRegion, GridSpec, rasterize
from tfloc.rearrange import rearrange_region_on_grid
from tfloc.spectral import build_operator_matrix, eigenvalues, schatten_norm, spectrum


def disc_eigenvalues(R, k):
    """Eigenvalues of the disc localization operator: regularized lower gamma P(j+1, pi R^2)."""
    return gammainc(np.arange(k) + 1, math.pi * R * R)


def disc_region(r, h, center=(0.0, 0.0)):
    return rasterize(Ball(center, r), GridSpec.centered(r + abs(center[0]) + abs(center[1]) + h, h))


def test_single_cell():
    spec = GridSpec((0.0, 0.0), 0.1, 1, 1)
    M = build_operator_matrix(GridRegion(spec, np.ones((1, 1), bool)))
    assert M.shape == (1, 1)
    assert M[0, 0] == pytest.approx(0.01)


def test_matrix_hermitian():
    M = build_operator_matrix(disc_region(0.6, 0.1, center=(0.3, -0.2)))
    assert np.abs(M - M.conj().T).max() < 1e-12


def test_empty_and_cap():
    spec = GridSpec.centered(1.0, 0.1)
    with pytest.raises(EmptyRegion):
        build_operator_matrix(GridRegion(spec, np.zeros(spec.shape, bool)))
    with pytest.raises(CellCapExceeded):
        build_operator_matrix(disc_region(1.0, 0.05), cap=100)


def test_eigenvalues_small():
    assert eigenvalues(np.array([[0.4]])).tolist() == [0.4]
    assert eigenvalues(np.diag([0.1, 0.3])).tolist() == [0.3, 0.1]
    with pytest.raises(InputError):
        eigenvalues(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(InputError):
        eigenvalues(np.zeros((2, 3)))


def test_schatten_norms():
    assert schatten_norm([0.5, 0.5], 2) == pytest.approx(math.sqrt(0.5))
    e = [0.9, 0.4, 0.1, -1e-18]
    assert schatten_norm(e, 1) == pytest.approx(sum(e[:3]))
    assert schatten_norm(e, math.inf) == 0.9
    assert schatten_norm([], 2) == 0.0
    with pytest.raises(InputError):
        schatten_norm(e, 0.5)


def test_unit_disc_spectrum():
    res = spectrum(disc_region(1.0, 0.05))
    assert res.trace == pytest.approx(math.pi, rel=0.01)
    assert np.all(np.diff(res.eigenvalues) <= 0)
    assert res.lambda_max == pytest.approx(0.957, abs=0.005)
    assert np.allclose(res.eigenvalues[:5], disc_eigenvalues(1.0, 5), atol=0.01)
    assert res.lambda_max <= 1 + 1e-6
    assert res.eigenvalues.min() >= -1e-10


def test_top_eigenvalue_refines_toward_exact():
    exact = disc_eigenvalues(1.0, 1)[0]
    errs = [abs(spectrum(disc_region(1.0, h)).lambda_max - exact) for h in (0.1, 0.05)]
    assert errs[1] < errs[0]


def test_hs_identity():
    region = disc_region(1.0, 0.05)
    res = spectrum(region)
    spec = GridSpec.centered(1.0 + TRUNCATION_RADIUS + 0.1, 0.05)
    hs = hs_norm_sq_grid(rasterize(Ball((0, 0), 1.0), spec)).hs_sq
    assert res.hs_sq == pytest.approx(hs, rel=0.01)


@pytest.mark.parametrize("r", [0.5, 1.0, 1.5])
def test_trace_equals_measure(r):
    region = disc_region(r, 0.1)
    assert spectrum(region).trace == pytest.approx(region.measure, rel=1e-10)


def test_lambda_max_grows_with_radius():
    vals = [spectrum(disc_region(r, 0.1)).lambda_max for r in (0.3, 0.6, 1.0, 1.4)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1))
def test_schatten_bounds_random_sets(seed):
    rng = np.random.default_rng(seed)
    spec = GridSpec.centered(1.0, 0.1)
    region = GridRegion(spec, rng.random(spec.shape) < rng.uniform(0.05, 0.4))
    if region.count == 0:
        return
    res = spectrum(region)
    for p in (1, 2, 4):
        assert res.schatten[p] <= region.measure ** (1 / p) * (1 + 1e-9)
    # Schur bound with unit constants
    assert res.lambda_max <= 1 + 1e-6


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1))
def test_faber_krahn_on_grid(seed):
    rng = np.random.default_rng(seed)
    spec = GridSpec.centered(1.5, 0.1)
    X, Y = spec.mesh()
    mask = (rng.random(spec.shape) < 0.5) & (X * X + Y * Y < 1.0)
    region = GridRegion(spec, mask)
    if region.count < 3:
        return
    ball = rearrange_region_on_grid(region)
    assert spectrum(region).lambda_max <= spectrum(ball).lambda_max + 1e-3


def test_as_dict_keys():
    d = spectrum(disc_region(0.4, 0.1)).as_dict()
    assert set(d) >= {"h", "omega_measure", "trace", "hs_sq", "lambda_max", "schatten"}
    assert set(d["schatten"]) == {"1", "2", "4", "inf"}
