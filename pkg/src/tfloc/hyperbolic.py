"""Poincare half-plane, Cauchy wavelets and hyperbolic rearrangement.

Points are ``z = x + i s`` with ``s > 0``; the invariant measure is
``dnu = dx ds / s^2``. Half-plane sets live on ordinary Cartesian grids whose
cells carry the weight ``h^2 / s_c^2`` (``s_c`` the cell-center height).

Wavelet conventions: ``hat f(w) = (2 pi)^(-1/2) int f(t) exp(-i w t) dt`` and
``hat psi_beta(w) = w^beta exp(-w) / c_beta`` for ``w > 0``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import gammaln, roots_genlaguerre

from .errors import EmptyRegion, InputError, KernelEvaluationError, MarginTooSmall, QuadratureNonconvergence
from .phase_space import GridField, GridSpec, _check_same_grid

__all__ = [
    "HypPoint",
    "HypBall",
    "HypRegion",
    "CauchyWavelet",
    "d_hyp",
    "d_hyp_artanh",
    "affine",
    "hyp_ball",
    "disc_nu_measure",
    "cauchy_wavelet_hat",
    "wavelet_norm_sq_quadrature",
    "wavelet_selfoverlap",
    "wavelet_selfoverlap_quadrature",
    "cauchy_kernel",
    "cauchy_kernel_constant",
    "hyp_weights",
    "hyp_hs_norm_sq",
    "hyp_riesz_functional",
    "hyp_rearrange",
    "hyp_rearrange_on_grid",
]


@dataclass(frozen=True)
class HypPoint:
    x: float
    s: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.s) and self.s > 0):
            raise InputError(f"half-plane point needs finite x and s > 0, got ({self.x}, {self.s})")

    @property
    def complex(self) -> complex:
        return complex(self.x, self.s)


def _xs(z):
    if isinstance(z, HypPoint):
        return z.x, z.s
    z = np.asarray(z, dtype=float)
    return z[..., 0], z[..., 1]


def d_hyp(z, w):
    """Hyperbolic distance, as ``2 asinh(|z - w| / (2 sqrt(s_z s_w)))`` (stable for near and far pairs)."""
    x1, s1 = _xs(z)
    x2, s2 = _xs(w)
    chord = np.hypot(x1 - x2, s1 - s2)
    return 2.0 * np.arcsinh(chord / (2.0 * np.sqrt(s1 * s2)))


def d_hyp_artanh(z, w):
    """Hyperbolic distance from ``2 artanh |(z - w) / (z - conj(w))|``."""
    x1, s1 = _xs(z)
    x2, s2 = _xs(w)
    num = np.hypot(x1 - x2, s1 - s2)
    den = np.hypot(x1 - x2, s1 + s2)
    return 2.0 * np.arctanh(num / den)


def affine(z, a: float, b: float):
    """``z -> a z + b`` (``a > 0``): the left action of the group element ``(b, a)``."""
    if not a > 0:
        raise InputError("dilation must be positive")
    if isinstance(z, HypPoint):
        return HypPoint(a * z.x + b, a * z.s)
    z = np.asarray(z, dtype=float)
    return np.stack([a * z[..., 0] + b, a * z[..., 1]], axis=-1)


# -- balls ----------------------------------------------------------------------------


def disc_nu_measure(center_s: float, radius: float, order: int = 64) -> float:
    """``nu`` of the Euclidean disc ``|z - i center_s| < radius`` (requires ``radius < center_s``).

    Integrating ``1/s^2`` in ``s`` leaves
    ``int_{-r}^{r} 2 sqrt(r^2 - x^2) / (k + x^2) dx`` with ``k = c^2 - r^2``.
    ``x = sqrt(k) tan(phi)`` flattens the peak at ``x = 0`` (width ``sqrt(k)``,
    tiny next to ``r`` for large balls) and ``phi = phi_max sin(theta)`` removes
    the square-root endpoints; the Gauss-Legendre rule is doubled until it settles.
    """
    c, r = float(center_s), float(radius)
    if not 0 <= r < c:
        raise InputError("disc must lie in the open half-plane")
    if r == 0:
        return 0.0
    k = (c - r) * (c + r)
    sk = math.sqrt(k)
    pm = math.atan(r / sk)
    prev = None
    n = order
    for _ in range(6):
        x, w = np.polynomial.legendre.leggauss(n)
        th = 0.5 * np.pi * x
        t = np.tan(pm * np.sin(th))
        g = 2 * np.sqrt(np.maximum(r * r - k * t * t, 0.0)) / sk * pm * np.cos(th)
        val = float(np.sum(0.5 * np.pi * w * g))
        if prev is not None and abs(val - prev) <= 1e-14 * abs(val):
            return val
        prev, n = val, 2 * n
    raise QuadratureNonconvergence("disc measure quadrature did not settle")


@dataclass(frozen=True)
class HypBall:
    """Hyperbolic ball about ``i``: Euclidean disc with center ``(0, cosh R)`` and radius ``sinh R``."""

    R: float
    euclid_center: tuple[float, float]
    euclid_radius: float
    nu_measure: float

    def contains(self, X, Y):
        return d_hyp(np.stack([X, Y], axis=-1), (0.0, 1.0)) < self.R

    def as_dict(self) -> dict:
        return {
            "R": self.R,
            "euclid_center": list(self.euclid_center),
            "euclid_radius": self.euclid_radius,
            "nu_measure": self.nu_measure,
        }


def hyp_ball(R: float) -> HypBall:
    if not R > 0:
        raise InputError("hyperbolic radius must be positive")
    c, r = math.cosh(R), math.sinh(R)
    return HypBall(float(R), (0.0, c), r, disc_nu_measure(c, r))


# -- Cauchy wavelet -----------------------------------------------------------------------


@dataclass(frozen=True)
class CauchyWavelet:
    beta: float = 1.0

    def __post_init__(self):
        if not self.beta > 0:
            raise InputError("beta must be positive")

    @property
    def c_beta(self) -> float:
        return math.sqrt(2 * math.pi * 2.0 ** (-2 * self.beta) * math.gamma(2 * self.beta))


def cauchy_wavelet_hat(omega, beta: float = 1.0):
    """``omega^beta exp(-omega) / c_beta`` for ``omega > 0``, zero otherwise."""
    c = CauchyWavelet(beta).c_beta
    w = np.asarray(omega, dtype=float)
    out = np.zeros(w.shape)
    pos = w > 0
    out[pos] = np.exp(beta * np.log(w[pos]) - w[pos]) / c
    return out if out.ndim else float(out)


@lru_cache(maxsize=64)
def _laguerre(n: int, alpha: float):
    return roots_genlaguerre(n, alpha)


def _laguerre_integral(alpha: float, fn, rate: float, n0: int = 32, tol: float = 1e-13):
    """``int_0^inf w^alpha exp(-rate w) fn(w) dw`` for smooth bounded ``fn``."""
    prev = None
    n = n0
    for _ in range(5):
        u, wt = _laguerre(n, alpha)
        val = np.sum(wt * fn(u / rate)) / rate ** (alpha + 1)
        if prev is not None and abs(val - prev) <= tol * max(abs(val), 1e-300):
            return val
        prev, n = val, 2 * n
    raise QuadratureNonconvergence("Laguerre quadrature did not settle")


def wavelet_norm_sq_quadrature(beta: float, weight: str = "dw") -> float:
    """``int_0^inf |hat psi_beta|^2 dw`` (``weight="dw"``) or ``... dw / w`` (``weight="dw/w"``)."""
    c = CauchyWavelet(beta).c_beta
    alpha = 2 * beta if weight == "dw" else 2 * beta - 1
    if weight not in ("dw", "dw/w"):
        raise InputError("weight must be 'dw' or 'dw/w'")
    return float(_laguerre_integral(alpha, lambda w: np.ones_like(w), 2.0) / (c * c))


def wavelet_selfoverlap(z, beta: float = 1.0):
    """``|W_psi psi(z)|^2 = C_beta s^(2 beta + 1) ((1 + s)^2 + x^2)^(-2 beta - 1)`` in closed form."""
    x, s = _xs(z)
    b = 2 * beta + 1
    logc = 2 * gammaln(2 * beta + 1) - 4 * math.log(CauchyWavelet(beta).c_beta)
    return np.exp(logc + b * np.log(s) - b * np.log((1 + s) ** 2 + x * x))


def wavelet_selfoverlap_quadrature(z, beta: float = 1.0) -> float:
    """``|sqrt(s) int hat psi(w) exp(i x w) hat psi(s w) dw|^2`` by quadrature.

    Small ``|x|`` uses generalized Gauss-Laguerre; otherwise the integrand
    oscillates too fast for it; the tail is cut where it drops below
    ``1e-17`` of the total and the cosine and sine parts go to QUADPACK's
    weighted routine on the finite range.
    """
    x, s = _xs(z)
    x, s = float(x), float(s)
    c = CauchyWavelet(beta).c_beta
    rate = 1.0 + s
    if abs(x) <= 0.25 * rate:
        val = _laguerre_integral(2 * beta, lambda w: np.exp(1j * x * w), rate)
    else:
        amp = lambda w: w ** (2 * beta) * math.exp(-rate * w)  # noqa: E731
        # int |integrand| = Gamma(2 beta + 1) / rate^(2 beta + 1); cut the tail below 1e-16 of it
        scale = math.exp(gammaln(2 * beta + 1) - (2 * beta + 1) * math.log(rate))
        top = (2 * beta + 40.0) / rate
        while amp(top) * top > 1e-17 * scale:
            top *= 1.5
        kw = dict(wvar=abs(x), epsabs=1e-14 * scale, epsrel=1e-11, limit=400)
        with warnings.catch_warnings():
            # roundoff warnings are superseded by the explicit error check below
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            re, e1 = integrate.quad(amp, 0, top, weight="cos", **kw)
            im, e2 = integrate.quad(amp, 0, top, weight="sin", **kw)
        if max(e1, e2) > 1e-9 * scale:
            raise QuadratureNonconvergence("Fourier quadrature did not settle")
        val = complex(re, math.copysign(im, x))
    val *= s ** (beta + 0.5) / (c * c)
    return float(abs(val) ** 2)


def cauchy_kernel_constant(beta: float = 1.0) -> float:
    """``C_beta`` with ``rho(0) = C_beta 4^(-2 beta - 1) = ||psi_beta||^4`` (norm by quadrature)."""
    return wavelet_norm_sq_quadrature(beta) ** 2 * 4.0 ** (2 * beta + 1)


def cauchy_kernel(t, beta: float = 1.0):
    """``rho(t) = C_beta [(1 - tanh^2(t/2)) / 4]^(2 beta + 1)``, so that ``rho(d_H(z, i)) = |W_psi psi(z)|^2``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise InputError("kernel argument must be finite and nonnegative")
    # log sech(t/2) = log 2 - t/2 - log1p(exp(-t))
    log_sech = math.log(2.0) - 0.5 * t - np.log1p(np.exp(-t))
    b = 2 * beta + 1
    out = np.exp(math.log(cauchy_kernel_constant(beta)) + b * (2 * log_sech - math.log(4.0)))
    return out if out.ndim else float(out)


# -- grids ---------------------------------------------------------------------------------


def _check_half_plane(spec: GridSpec):
    if not spec.origin[1] > 0:
        raise InputError("half-plane grids need a positive lower s-bound")


def hyp_weights(spec: GridSpec) -> np.ndarray:
    """``nu``-weight ``h^2 / s_c^2`` of every cell."""
    _check_half_plane(spec)
    _, S = spec.mesh()
    return spec.cell_area / (S * S)


@dataclass(frozen=True, eq=False)
class HypRegion:
    spec: GridSpec
    mask: np.ndarray

    def __post_init__(self):
        _check_half_plane(self.spec)
        m = np.asarray(self.mask, dtype=bool).reshape(self.spec.shape)
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)

    @classmethod
    def from_shape(cls, contains, spec: GridSpec) -> "HypRegion":
        X, Y = spec.mesh()
        return cls(spec, contains(X, Y))

    @property
    def nu_measure(self) -> float:
        return float(np.sum(hyp_weights(self.spec)[self.mask]))

    def field(self) -> GridField:
        return GridField(self.spec, self.mask.astype(float))


def _as_hyp_field(F) -> GridField:
    if isinstance(F, HypRegion):
        return F.field()
    if isinstance(F, GridField):
        _check_half_plane(F.spec)
        return F
    raise InputError(f"expected HypRegion or GridField, got {type(F).__name__}")


def _check_edge(F: GridField):
    v = F.values
    if np.any(v[0]) or np.any(v[-1]) or np.any(v[:, 0]) or np.any(v[:, -1]):
        raise MarginTooSmall("support touches the edge of the half-plane grid box")


def _pair_sum(f: GridField, g_of_d, h: GridField, chunk: int = 1024) -> complex:
    w = hyp_weights(f.spec)
    X, Y = f.spec.mesh()
    fi = np.nonzero(f.values)
    hi = np.nonzero(h.values)
    if fi[0].size == 0 or hi[0].size == 0:
        return 0.0
    zf = np.column_stack([X[fi], Y[fi]])
    zh = np.column_stack([X[hi], Y[hi]])
    af = f.values[fi] * w[fi]
    ah = np.conj(h.values[hi]) * w[hi]
    total = 0.0 + 0.0j
    for s in range(0, zf.shape[0], chunk):
        D = d_hyp(zf[s : s + chunk, None, :], zh[None, :, :])
        total += af[s : s + chunk] @ (g_of_d(D) @ ah)
    return total


def hyp_hs_norm_sq(F, beta: float = 1.0) -> float:
    """``sum F(z) rho(d_H(z, w)) conj(F(w)) dnu(z) dnu(w)`` over support cells.

    The sum couples support cells only, so the grid needs no kernel margin;
    the support must not touch the box edge.
    """
    F = _as_hyp_field(F)
    if not np.any(F.values):
        return 0.0
    _check_edge(F)
    val = _pair_sum(F, lambda D: cauchy_kernel(D, beta), F)
    return float(np.real(val))


def hyp_riesz_functional(f, g, h) -> float:
    """``sum f(z) g(d_H(z, w)) h(w) dnu dnu`` for fields on one half-plane grid."""
    f, h = _as_hyp_field(f), _as_hyp_field(h)
    _check_same_grid(f.spec, h.spec)

    def kern(D):
        v = np.asarray(g(D), dtype=float)
        if not np.all(np.isfinite(v)):
            raise KernelEvaluationError("kernel returned non-finite values")
        return v

    return float(np.real(_pair_sum(f, kern, h)))


# -- rearrangement ---------------------------------------------------------------------------


def hyp_rearrange(region, tol: float = 1e-12) -> HypBall:
    """Hyperbolic ball about ``i`` with the ``nu``-measure of ``region`` (bisection on ``R``)."""
    nu = region.nu_measure if isinstance(region, (HypRegion, HypBall)) else float(region)
    if not nu > 0:
        raise EmptyRegion("cannot rearrange a null set")
    lo, hi = 0.0, 1.0
    while hyp_ball(hi).nu_measure < nu:
        hi *= 2
        if hi > 200:
            raise InputError("measure too large for a hyperbolic ball")
    while hi - lo > tol * max(hi, 1.0):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if hyp_ball(mid).nu_measure < nu:
            lo = mid
        else:
            hi = mid
    return hyp_ball(0.5 * (lo + hi))


def hyp_rearrange_on_grid(F) -> GridField:
    """Discrete rearrangement on the same grid.

    Cells are ranked by ``d_H`` to ``i`` (ties by row-major index). For a set,
    cells are filled in that order until the ``nu``-measure is matched, the
    last cell taking a fractional value. For a nonnegative field, its
    distribution function is matched the same way: the field becomes a
    decreasing function of rank whose level sets have the original ``nu``-measures.
    """
    F = _as_hyp_field(F)
    if np.iscomplexobj(F.values) or np.any(F.values < 0):
        raise InputError("rearrangement needs a real nonnegative field")
    spec = F.spec
    w = hyp_weights(spec).ravel()
    X, Y = spec.mesh()
    order = np.argsort(d_hyp(np.stack([X.ravel(), Y.ravel()], axis=-1), (0.0, 1.0)), kind="stable")
    vals = F.values.ravel()
    src = np.argsort(-vals, kind="stable")
    src = src[vals[src] > 0]
    # cumulative nu-mass of the source levels, dealt onto destination cells
    src_mass = np.concatenate([[0.0], np.cumsum(w[src])])
    dst_w = w[order]
    dst_mass = np.concatenate([[0.0], np.cumsum(dst_w)])
    total = src_mass[-1]
    if total > dst_mass[-1] * (1 - 1e-12):
        raise InputError("grid is too small to hold the rearranged set")
    ncell = int(np.searchsorted(dst_mass, total, side="left"))
    out = np.zeros(vals.size)
    # value on destination cell k: nu-average of the source profile over its mass interval
    step_vals = vals[src]
    for k in range(ncell):
        a, b = dst_mass[k], min(dst_mass[k + 1], total)
        i0 = max(int(np.searchsorted(src_mass, a, side="right")) - 1, 0)
        i1 = int(np.searchsorted(src_mass, b, side="left"))
        seg = 0.0
        for i in range(i0, i1):
            lo_, hi_ = max(a, src_mass[i]), min(b, src_mass[i + 1])
            if hi_ > lo_:
                seg += step_vals[i] * (hi_ - lo_)
        out[order[k]] = seg / dst_w[k]
    return GridField(spec, out.reshape(spec.shape))
