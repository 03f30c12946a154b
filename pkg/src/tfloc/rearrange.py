"""Symmetric rearrangement of sets and functions and Riesz-type double integrals."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.signal import fftconvolve

from .errors import EmptyRegion, InputError, KernelEvaluationError, NegativeValue, ParameterConstraint
from .phase_space import (
    Ball,
    GridField,
    GridRegion,
    GridSpec,
    RadialRegion,
    _check_same_grid,
    unit_ball_volume,
)

__all__ = [
    "RadialProfile",
    "rearrange_region",
    "rearrange_function",
    "rearrange_on_grid",
    "rearrange_region_on_grid",
    "riesz_functional",
    "riesz_functional_1d",
    "Intervals",
    "AppendixConstruction",
    "appendix_construction",
]


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Piecewise-constant, nonincreasing radial function.

    ``values[k]`` is taken on the shell ``knots[k] <= |x| < knots[k+1]``; the
    function vanishes beyond ``knots[-1]``.
    """

    n: int
    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if k.size != v.size + 1 or (k.size and k[0] != 0.0):
            raise InputError("knots must start at 0 and have one more entry than values")
        if np.any(np.diff(k) < 0) or np.any(np.diff(v) > 0) or np.any(v < 0):
            raise InputError("profile must have increasing knots and nonincreasing nonnegative values")
        object.__setattr__(self, "knots", k)
        object.__setattr__(self, "values", v)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        idx = np.searchsorted(self.knots, r, side="right") - 1
        out = np.zeros(r.shape)
        ok = (idx >= 0) & (idx < self.values.size)
        out[ok] = self.values[idx[ok]]
        return out

    def shell_measures(self) -> np.ndarray:
        return unit_ball_volume(self.n) * np.diff(self.knots**self.n)

    def distribution(self, t: float) -> float:
        """Measure of ``{profile > t}``."""
        return float(self.shell_measures()[self.values > t].sum())


def rearrange_region(region) -> RadialRegion:
    """The centered ball with the measure of ``region``."""
    if isinstance(region, RadialRegion):
        n, m = region.n, region.measure
    elif isinstance(region, GridRegion):
        n, m = 2, region.measure
    else:
        n, m = 2, float(region.measure)
    if not m > 0:
        raise EmptyRegion("cannot rearrange a null set")
    return RadialRegion.ball((m / unit_ball_volume(n)) ** (1.0 / n), n)


def rearrange_function(F: GridField) -> RadialProfile:
    """Layer-cake rearrangement of a nonnegative grid field into a radial profile.

    Cell values are sorted in decreasing order (ties by row-major index); the
    ``k``-th value occupies the shell enclosing measure ``[k h^2, (k+1) h^2]``.
    """
    if np.iscomplexobj(F.values) or np.any(F.values < 0):
        raise NegativeValue("rearrangement needs a real nonnegative field")
    flat = F.values.ravel()
    order = np.argsort(-flat, kind="stable")
    vals = flat[order]
    vals = vals[vals > 0]
    cum = np.arange(vals.size + 1) * F.spec.cell_area
    knots = np.sqrt(cum / math.pi)
    return RadialProfile(2, knots, vals)


def _distance_order(spec: GridSpec, center=(0.0, 0.0)) -> np.ndarray:
    X, Y = spec.mesh()
    d2 = ((X - center[0]) ** 2 + (Y - center[1]) ** 2).ravel()
    return np.argsort(d2, kind="stable")


def rearrange_on_grid(F: GridField, center=(0.0, 0.0)) -> GridField:
    """Discrete symmetric-decreasing rearrangement on the same grid.

    Sorted cell values are dealt to cells in order of distance from ``center``
    (ties by row-major index), so the multiset of values is preserved exactly.
    """
    if np.iscomplexobj(F.values) or np.any(F.values < 0):
        raise NegativeValue("rearrangement needs a real nonnegative field")
    flat = F.values.ravel()
    vals = np.sort(flat)[::-1]
    nnz = int(np.count_nonzero(vals))
    _check_ball_fits(F.spec, nnz, center)
    out = np.zeros(flat.size)
    out[_distance_order(F.spec, center)] = vals
    return GridField(F.spec, out.reshape(F.spec.shape))


def rearrange_region_on_grid(region: GridRegion, center=(0.0, 0.0)) -> GridRegion:
    """The ``count`` cells nearest to ``center``: a grid set with the same cell count."""
    _check_ball_fits(region.spec, region.count, center)
    out = np.zeros(region.spec.nx * region.spec.ny, dtype=bool)
    out[_distance_order(region.spec, center)[: region.count]] = True
    return GridRegion(region.spec, out)


def _check_ball_fits(spec: GridSpec, ncells: int, center):
    from .errors import ShapeExceedsGrid

    r = math.sqrt(ncells * spec.cell_area / math.pi) + spec.h
    if ncells and not spec.contains_box(center[0] - r, center[0] + r, center[1] - r, center[1] + r):
        raise ShapeExceedsGrid("rearranged ball does not fit in the grid box")


def _eval_kernel(g, t):
    vals = np.asarray(g(t), dtype=float)
    if vals.shape != np.shape(t):
        vals = np.broadcast_to(vals, np.shape(t))
    if not np.all(np.isfinite(vals)):
        raise KernelEvaluationError("kernel returned non-finite values")
    return vals


def riesz_functional(f: GridField, g: Callable, h: GridField) -> float:
    """``sum_{x,y} f(x) g(|x-y|) h(y) * cell_area^2`` for fields on one grid.

    The cross-correlation of ``f`` and ``h`` over all lattice offsets is formed
    by FFT, then weighted by the radial kernel ``g`` at each offset length.
    """
    _check_same_grid(f.spec, h.spec)
    fv, hv = np.asarray(f.values), np.asarray(h.values)
    if not np.any(fv) or not np.any(hv):
        return 0.0
    fv, hv, _ = _crop_pair(fv, hv)
    corr = fftconvolve(fv, hv[::-1, ::-1].conj() if np.iscomplexobj(hv) else hv[::-1, ::-1])
    ny, nx = hv.shape
    ky = np.arange(-(ny - 1), fv.shape[0])
    kx = np.arange(-(nx - 1), fv.shape[1])
    step = f.spec.h
    KX, KY = np.meshgrid(kx * step, ky * step)
    G = _eval_kernel(g, np.hypot(KX, KY))
    total = np.sum(G * corr) * f.spec.cell_area**2
    return float(np.real(total))


def _crop_pair(a, b):
    """Crop two same-shape arrays to the joint bounding box of their supports."""
    nz = (a != 0) | (b != 0)
    rows = np.nonzero(nz.any(axis=1))[0]
    cols = np.nonzero(nz.any(axis=0))[0]
    sl = (slice(rows[0], rows[-1] + 1), slice(cols[0], cols[-1] + 1))
    return a[sl], b[sl], sl


# -- one-dimensional analytic mode ---------------------------------------------


@dataclass(frozen=True)
class Intervals:
    """Finite union of disjoint open intervals on the line."""

    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        b = sorted((float(a), float(c)) for a, c in self.bounds)
        for k, (a, c) in enumerate(b):
            if not a < c:
                raise InputError(f"empty interval ({a}, {c})")
            if k and a < b[k - 1][1]:
                raise InputError("intervals overlap")
        object.__setattr__(self, "bounds", tuple(b))

    @property
    def measure(self) -> float:
        return sum(c - a for a, c in self.bounds)

    def rearranged(self) -> "Intervals":
        m = self.measure
        return Intervals(((-m / 2, m / 2),))

    def shifted(self, v: float) -> "Intervals":
        return Intervals(tuple((a + v, c + v) for a, c in self.bounds))


def _overlap_breakpoints(F: Intervals, H: Intervals) -> np.ndarray:
    pts = [a - c for a, _ in F.bounds for c in (x for iv in H.bounds for x in iv)]
    pts += [b - c for _, b in F.bounds for c in (x for iv in H.bounds for x in iv)]
    return np.unique(np.array(pts))


def _overlap_length(F: Intervals, H: Intervals, u: np.ndarray) -> np.ndarray:
    """``|F cap (H + u)|`` for an array of shifts ``u``."""
    u = np.asarray(u, dtype=float)
    out = np.zeros(u.shape)
    for a, b in F.bounds:
        for c, d in H.bounds:
            out += np.maximum(0.0, np.minimum(b, d + u) - np.maximum(a, c + u))
    return out


def riesz_functional_1d(
    f: Intervals, g: Callable, h: Intervals, breakpoints: Sequence[float] = (), order: int = 32
) -> float:
    """``int int chi_f(x) g(|x-y|) chi_h(y) dx dy`` on the line.

    Equals ``int g(|u|) |f cap (h+u)| du``; the overlap length is piecewise
    linear in ``u``, so Gauss-Legendre on each linear piece (further split at
    the kernel's own ``breakpoints``, mirrored to negative ``u``) is exact for
    kernels that are polynomial of degree < ``2*order - 1`` there.
    """
    bp = _overlap_breakpoints(f, h)
    extra = np.asarray(list(breakpoints), dtype=float)
    extra = np.concatenate([extra, -extra])
    lo, hi = bp[0], bp[-1]
    pts = np.unique(np.concatenate([bp, extra[(extra > lo) & (extra < hi)], [0.0] if lo < 0 < hi else []]))
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = pts[:-1, None], pts[1:, None]
    u = 0.5 * (b - a) * x + 0.5 * (a + b)
    wt = 0.5 * (b - a) * w
    vals = _eval_kernel(g, np.abs(u)) * _overlap_length(f, h, u)
    return float(np.sum(wt * vals))


# -- non-strict kernels: the equality construction ------------------------------


@dataclass(frozen=True)
class AppendixConstruction:
    """Equality case of the rearrangement inequality for a kernel constant on ``r <= |x| <= R``.

    ``omega`` is the union of the ball of radius ``r + 2 delta`` and the shell
    ``R - 4 delta < |x| < R - 2 delta``; ``f = chi_omega``, ``h = chi_{B_delta}``.
    """

    r: float
    R: float
    delta: float
    n: int
    omega: RadialRegion
    h_ball: RadialRegion
    c: float = 1.0

    def g(self, t):
        t = np.asarray(t, dtype=float)
        r, R, c = self.r, self.R, self.c
        return np.where(t <= r, c + (r - t), np.where(t <= R, c, c * np.exp(-(t - R))))

    @property
    def kernel_breakpoints(self) -> tuple[float, float]:
        return (self.r, self.R)

    def intervals(self) -> tuple[Intervals, Intervals]:
        """Line version (``n = 1``) of ``omega`` and ``B_delta``."""
        r, R, d = self.r, self.R, self.delta
        om = Intervals(((-(R - 2 * d), -(R - 4 * d)), (-(r + 2 * d), r + 2 * d), (R - 4 * d, R - 2 * d)))
        return om, Intervals(((-d, d),))

    def f_grid(self, spec: GridSpec) -> GridRegion:
        from .phase_space import rasterize

        return rasterize(self.omega, spec)

    def h_grid(self, spec: GridSpec) -> GridRegion:
        from .phase_space import rasterize

        return rasterize(Ball((0.0, 0.0), self.delta), spec)


def appendix_construction(r: float, R: float, delta: float, n: int = 2, c: float = 1.0) -> AppendixConstruction:
    """Build the equality quadruple for a kernel that is flat on ``B_R minus B_r``.

    ``n`` is the (even) dimension of the radial description; the line version
    is always available through :meth:`AppendixConstruction.intervals`.

    The kernel is ``c + (r - t)`` on ``[0, r]``, ``c`` on ``[r, R]`` and
    ``c * exp(-(t - R))`` beyond ``R``. Requires ``delta > 0`` and
    ``r + 2 delta < R - 4 delta``; also checks that the rearranged set thickened
    by ``delta`` stays inside ``B_R``.
    """
    if not (r >= 0 and R > r and delta > 0):
        raise ParameterConstraint("need r >= 0, R > r, delta > 0")
    if not r + 2 * delta < R - 4 * delta:
        raise ParameterConstraint(f"r + 2 delta = {r + 2 * delta} is not < R - 4 delta = {R - 4 * delta}")
    omega = RadialRegion(n, ((0.0, r + 2 * delta), (R - 4 * delta, R - 2 * delta)))
    # the line version rearranges to an interval of half-length r + 4 delta
    star_radius = max(rearrange_region(omega).outer_radius, r + 4 * delta)
    if star_radius + delta > R:
        raise ParameterConstraint("rearranged set plus B_delta leaves B_R; shrink delta")
    return AppendixConstruction(r, R, delta, n, omega, RadialRegion.ball(delta, n), c)
