"""Rearrangement deficits of ``||L_Omega||_HS^2`` and the scaling families built on them.

The deficit of a set is ``||L_{Omega*}||_HS^2 - ||L_Omega||_HS^2 >= 0``. This
module evaluates it for radial sets (Bessel route) and for grid sets and
fields (exact cell-averaged stencil against the Bessel route for the
rearrangement), and fits log-log exponents over three families:

* ``eps``: a ball with a thin shell moved outward (deficit ~ eps^2),
* ``dilate``: small dilates of a fixed non-ball (deficit ~ |Omega|^(2+1/d)),
* ``dumbbell``: annulus plus a detached disc of large measure.

The line and planar probes of the indicator-kernel deficit live here too.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from ._workers import pmap
from .asymmetry import fraenkel
from .errors import (
    DegenerateFit,
    EmptyRegion,
    InputError,
    NegativeValue,
    ParameterConstraint,
    ShapeExceedsGrid,
)
from .hs_engine import TRUNCATION_RADIUS, cross_term, hs_norm_sq_grid, hs_norm_sq_radial
from .phase_space import (
    Ball,
    GridField,
    GridRegion,
    GridSpec,
    RadialRegion,
    Union,
    rasterize,
    unit_ball_volume,
)
from .rearrange import (
    Intervals,
    rearrange_function,
    rearrange_on_grid,
    rearrange_region,
    rearrange_region_on_grid,
    riesz_functional,
    riesz_functional_1d,
)

__all__ = [
    "BetaParams",
    "DeficitReport",
    "SweepResult",
    "Conj2Report",
    "beta",
    "beta_tilde",
    "deficit",
    "fit_loglog",
    "family_eps",
    "eps_delta",
    "sweep_eps",
    "two_disc_dumbbell",
    "sweep_dilate",
    "family_dumbbell",
    "sweep_dumbbell",
    "indicator_autocorrelation",
    "fraenkel_1d",
    "conjecture2_probe",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ("param", "measure", "hs_sq", "hs_sq_star", "deficit", "alpha", "beta", "empirical_constant")
SCHEMA_VERSION = 1


# -- beta ------------------------------------------------------------------------


@dataclass(frozen=True)
class BetaParams:
    """Constants of the deficit lower bound. ``c2`` defaults to ``9 pi / (4 |B_1|^(1/d))``, ``|B_1|`` in R^(2d)."""

    d: int = 1
    c1: float = 1.0
    c2: float | None = None

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise InputError("d must be a positive integer")
        if self.c2 is None:
            object.__setattr__(self, "c2", 9 * math.pi / (4 * unit_ball_volume(2 * self.d) ** (1 / self.d)))
        if not (self.c1 > 0 and self.c2 > 0):
            raise InputError("c1 and c2 must be positive")


def _check_t(t):
    t = float(t)
    if not (t > 0 and math.isfinite(t)):
        raise InputError(f"beta needs t > 0, got {t}")
    return t


def beta(t: float, d: int = 1, params: BetaParams | None = None, continuous: bool = True) -> float:
    """``t^(2+1/d)`` for ``t <= 1``, ``t^2 exp(-c2 t^(1/d))`` beyond.

    With ``continuous=True`` the large-``t`` branch carries the extra factor
    ``exp(c2)`` so the two pieces meet at ``t = 1``; this only changes the
    constant in front.
    """
    t = _check_t(t)
    p = params or BetaParams(d)
    if p.d != d:
        raise InputError("params.d disagrees with d")
    if t <= 1:
        return t ** (2 + 1 / d)
    expo = -p.c2 * t ** (1 / d)
    if continuous:
        expo += p.c2
    return t * t * math.exp(expo)


def beta_tilde(t: float, d: int = 1) -> float:
    """Conjectured profile: ``t^(2+1/d)`` for ``t <= 1`` and ``t^(2-1/(2d))`` beyond."""
    t = _check_t(t)
    if t <= 1:
        return t ** (2 + 1 / d)
    return t ** (2 - 1 / (2 * d))


# -- deficit ----------------------------------------------------------------------


@dataclass(frozen=True)
class DeficitReport:
    omega_measure: float
    hs_sq: float
    hs_sq_star: float
    deficit: float
    alpha: float
    beta_value: float
    empirical_constant: float
    alpha_source: str = "optimizer"
    route: str = "grid"
    param: float = float("nan")

    def row(self) -> dict:
        return {
            "param": self.param,
            "measure": self.omega_measure,
            "hs_sq": self.hs_sq,
            "hs_sq_star": self.hs_sq_star,
            "deficit": self.deficit,
            "alpha": self.alpha,
            "beta": self.beta_value,
            "empirical_constant": self.empirical_constant,
        }

    def as_dict(self) -> dict:
        return asdict(self)


def _report(m, hs, hs_star, alpha, d, alpha_source, route, param=float("nan"), continuous=True):
    dfc = hs_star - hs
    b = beta(m, d, continuous=continuous) if m > 0 else float("nan")
    if alpha is not None and math.isfinite(alpha) and alpha > 0:
        emp = dfc / (b * alpha * alpha)
    else:
        emp = float("nan")
    a = float("nan") if alpha is None else float(alpha)
    return DeficitReport(m, hs, hs_star, dfc, a, b, emp, alpha_source, route, float(param))


def _concentric_alpha(region: RadialRegion) -> float:
    """``|Omega sym-diff Omega*| / |Omega|`` for the concentric ball (an upper bound for alpha)."""
    R = rearrange_region(region).outer_radius
    n = region.n
    inside = sum(min(b, R) ** n - min(a, R) ** n for a, b in region.annuli) * unit_ball_volume(n)
    m = region.measure
    return max(0.0, 2.0 * (m - inside) / m)


def _grid_center(spec: GridSpec, count: int, center):
    if center is not None:
        return center
    r = math.sqrt(count * spec.cell_area / math.pi) + spec.h
    if spec.contains_box(-r, r, -r, r):
        return (0.0, 0.0)
    x0, x1, y0, y1 = spec.bounds
    X, Y = spec.x, spec.y
    cx = X[np.argmin(np.abs(X - 0.5 * (x0 + x1)))]
    cy = Y[np.argmin(np.abs(Y - 0.5 * (y0 + y1)))]
    return (float(cx), float(cy))


def deficit(
    omega,
    *,
    with_alpha: bool = True,
    alpha: float | None = None,
    star: str = "radial",
    center=None,
    margin: float = TRUNCATION_RADIUS,
    continuous_beta: bool = True,
    param: float = float("nan"),
) -> DeficitReport:
    """Deficit report for a radial region, a grid region or a nonnegative grid field.

    Radial regions use the Bessel route for both norms and the concentric
    ball for alpha. A grid region is read as the union of its closed cells
    and a grid field as the matching step function; their norm is the exact
    cell-averaged stencil sum. With ``star="radial"`` the rearrangement is
    the true ball (or layer-cake profile) on the Bessel route, so the
    comparison is between two exact values. ``star="grid"`` instead takes the
    same number of cells nearest to ``center`` on the same grid (default: the
    origin, or the box center if the ball does not fit around the origin);
    this is the discrete analogue and is useful when an exact set identity
    must hold cell by cell. For fields alpha is undefined (NaN). ``alpha``
    overrides the computed asymmetry (``alpha_source="given"``).
    """
    if star not in ("radial", "grid"):
        raise InputError(f"star must be 'radial' or 'grid', got {star!r}")
    if isinstance(omega, RadialRegion):
        m = omega.measure
        if m <= 0:
            raise EmptyRegion("deficit of an empty region")
        hs = hs_norm_sq_radial(omega).hs_sq
        hs_star = hs_norm_sq_radial(rearrange_region(omega)).hs_sq
        a, src = (alpha, "given") if alpha is not None else (_concentric_alpha(omega), "concentric")
        return _report(m, hs, hs_star, a, omega.n // 2, src, "radial", param, continuous_beta)
    if isinstance(omega, GridRegion):
        if omega.count == 0:
            raise EmptyRegion("deficit of an empty region")
        hs = hs_norm_sq_grid(omega, margin=margin, stencil="cell").hs_sq
        if star == "radial":
            hs_star = hs_norm_sq_radial(rearrange_region(omega)).hs_sq
        else:
            c = _grid_center(omega.spec, omega.count, center)
            ball = rearrange_region_on_grid(omega, c)
            hs_star = hs_norm_sq_grid(ball, margin=margin, stencil="cell").hs_sq
        if alpha is not None:
            a, src = alpha, "given"
        elif with_alpha:
            a, src = fraenkel(omega).alpha, "optimizer"
        else:
            a, src = None, "none"
        return _report(omega.measure, hs, hs_star, a, 1, src, "grid", param, continuous_beta)
    if isinstance(omega, GridField):
        if np.iscomplexobj(omega.values) or np.any(omega.values < 0):
            raise NegativeValue("deficit of a field needs real nonnegative values")
        if not np.any(omega.values):
            raise EmptyRegion("deficit of a zero field")
        nnz = int(np.count_nonzero(omega.values))
        hs = hs_norm_sq_grid(omega, margin=margin, stencil="cell").hs_sq
        if star == "radial":
            hs_star = hs_norm_sq_radial(rearrange_function(omega)).hs_sq
        else:
            c = _grid_center(omega.spec, nnz, center)
            hs_star = hs_norm_sq_grid(rearrange_on_grid(omega, c), margin=margin, stencil="cell").hs_sq
        m = nnz * omega.spec.cell_area
        return _report(m, hs, hs_star, None, 1, "none", "grid", param, continuous_beta)
    raise InputError(f"cannot compute a deficit for {type(omega).__name__}")


# -- fits and sweeps --------------------------------------------------------------


def fit_loglog(x, y, floor: float = 0.0) -> tuple[float, float, float, int]:
    """Least-squares line through ``(log x, log y)``.

    Points with ``y <= floor`` or non-finite values are dropped. Returns
    ``(slope, intercept, rms_residual, used_points)``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = np.isfinite(x) & np.isfinite(y) & (x > 0) & (y > floor)
    if np.count_nonzero(ok) < 3:
        raise DegenerateFit(f"need at least 3 usable points, have {int(np.count_nonzero(ok))}")
    lx, ly = np.log(x[ok]), np.log(y[ok])
    A = np.column_stack([lx, np.ones_like(lx)])
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid**2))), int(np.count_nonzero(ok))


@dataclass(frozen=True)
class SweepResult:
    family: str
    x_kind: str
    reports: tuple[DeficitReport, ...]
    slope: float
    intercept: float
    residual: float
    used_points: int
    extra: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for rep in self.reports:
            w.writerow({k: repr(float(v)) for k, v in rep.row().items()})
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "family": self.family,
            "x": self.x_kind,
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "points": len(self.reports),
            "used_points": self.used_points,
            **self.extra,
        }

    def to_json(self) -> str:
        return dumps_json(self.summary())


def _finite_or_none(obj):
    if isinstance(obj, dict):
        return {k: _finite_or_none(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite_or_none(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def dumps_json(obj) -> str:
    """Strict JSON (non-finite numbers become ``null``), sorted keys."""
    return json.dumps(_finite_or_none(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def eps_delta(eps: float, d: int = 1) -> float:
    """Outer shell width keeping ``|Omega_eps| = |B_1|``: ``(2 - (1-eps)^(2d))^(1/(2d)) - 1``."""
    n = 2 * d
    return (2.0 - (1.0 - eps) ** n) ** (1.0 / n) - 1.0


def family_eps(eps: float, d: int = 1) -> RadialRegion:
    """``{|z| < 1-eps} cup {1 <= |z| < 1+delta}`` in R^(2d), of the same measure as ``B_1``."""
    if not 0 < eps < 1:
        raise InputError(f"eps must lie in (0, 1), got {eps}")
    return RadialRegion(2 * d, ((0.0, 1.0 - eps), (1.0, 1.0 + eps_delta(eps, d))))


def _sweep(family, x_kind, reports, xs, floor_rel=1e-12, extra=None) -> SweepResult:
    ys = [r.deficit for r in reports]
    floor = floor_rel * max(r.hs_sq_star for r in reports)
    slope, icpt, res, used = fit_loglog(xs, ys, floor)
    return SweepResult(family, x_kind, tuple(reports), slope, icpt, res, used, extra or {})


def sweep_eps(eps_values: Sequence[float], d: int = 1) -> SweepResult:
    """Deficit of ``Omega_eps`` against ``eps`` (Bessel route); slope of the log-log fit."""
    eps_values = [float(e) for e in eps_values]
    if len(eps_values) < 3:
        raise DegenerateFit("an eps sweep needs at least 3 values")
    for e in eps_values:
        if not 0 < e <= 0.3:
            raise InputError(f"eps values must lie in (0, 0.3], got {e}")
    reports = pmap(lambda e: deficit(family_eps(e, d), param=e), eps_values)
    return _sweep("eps", "eps", reports, eps_values, extra={"d": d})


def two_disc_dumbbell(radius: float = 0.125, separation: float = 0.5) -> Union:
    """Two equal discs with centers ``(+-separation/2, 0)``."""
    if not separation > 2 * radius > 0:
        raise InputError("discs must be disjoint and nonempty")
    s = 0.5 * separation
    return Union((Ball((-s, 0.0), radius), Ball((s, 0.0), radius)))


def _base_grid(shape, h) -> GridSpec:
    x0, x1, y0, y1 = shape.bbox()
    rs = math.sqrt(shape.measure / math.pi)
    pad = 2 * h
    return GridSpec.lattice(min(x0, -rs) - pad, max(x1, rs) + pad, min(y0, -rs) - pad, max(y1, rs) + pad, h)


BALL_ALPHA_TOL = 0.02


def sweep_dilate(
    shape=None, r_values: Sequence[float] = (0.1, 0.15, 0.2, 0.3, 0.4, 0.5), cells_across: int = 40
) -> SweepResult:
    """Deficit of dilates ``r * Omega_0`` against their measure (d = 1).

    ``Omega_0`` is rasterized once, with ``cells_across`` cells per smallest
    disc radius; each dilate reuses that mask on the grid scaled by ``r``, so
    the discrete shape, and hence its asymmetry, is exactly scale invariant.
    """
    shape = two_disc_dumbbell() if shape is None else shape
    r_values = [float(r) for r in r_values]
    if len(r_values) < 3:
        raise DegenerateFit("a dilation sweep needs at least 3 values")
    if any(not 0 < r <= 1 for r in r_values):
        raise InputError("dilation factors must lie in (0, 1]")
    parts = shape.parts if isinstance(shape, Union) else (shape,)
    rmin = min(getattr(p, "radius", None) or p.outer_radius for p in parts)
    base = _base_grid(shape, rmin / cells_across)
    mask0 = rasterize(shape, base).mask
    alpha0 = fraenkel(GridRegion(base, mask0)).alpha
    if alpha0 < BALL_ALPHA_TOL:
        # deficits of a rasterized ball are pixelation noise; nothing to fit
        raise DegenerateFit(f"base shape is a ball to grid tolerance (alpha = {alpha0:.3g})")

    def one(r):
        region = GridRegion(base.scaled(r), mask0)
        return deficit(region, alpha=fraenkel(region).alpha, margin=0.0, param=r)

    reports = pmap(one, r_values)
    xs = [rep.omega_measure for rep in reports]
    alphas = [rep.alpha for rep in reports]
    out = _sweep("dilate", "measure", reports, xs, extra={"d": 1, "alpha_base": alpha0})
    extra = dict(out.extra, alpha_spread=float(max(alphas) - min(alphas)))
    return SweepResult(out.family, out.x_kind, out.reports, out.slope, out.intercept, out.residual, out.used_points, extra)


@dataclass(frozen=True)
class Dumbbell:
    """Annulus ``r/3 <= |z| <= r`` plus the disc ``|z - 2r e_1| < r/3`` on a grid with ``h = r/cells``."""

    r: float
    region: GridRegion
    annulus: GridRegion
    far_disc: GridRegion
    inner_disc: GridRegion


def family_dumbbell(r: float, cells: int = 60, max_cells: int = 2_000_000) -> Dumbbell:
    if not r > 0:
        raise InputError("r must be positive")
    h = r / cells
    spec = GridSpec.lattice(-r - 2 * h, 7 * r / 3 + 2 * h, -r - 2 * h, r + 2 * h, h)
    if spec.nx * spec.ny > max_cells:
        raise ShapeExceedsGrid(f"dumbbell grid needs {spec.nx * spec.ny} cells, budget is {max_cells}")
    X, Y = spec.mesh()
    rho2 = X * X + Y * Y
    tol = 1e-12 * r * r
    annulus = (rho2 >= (r / 3) ** 2 - tol) & (rho2 <= r * r + tol)
    far = (X - 2 * r) ** 2 + Y * Y < (r / 3) ** 2 - tol
    inner = rho2 < (r / 3) ** 2 - tol
    return Dumbbell(
        r,
        GridRegion(spec, annulus | far),
        GridRegion(spec, annulus),
        GridRegion(spec, far),
        GridRegion(spec, inner),
    )


DUMBBELL_ALPHA = 2.0 / 9.0  # concentric B_r: |Omega sym-diff B_r| = 2 pi r^2 / 9


def sweep_dumbbell(r_values: Sequence[float] = (2, 3, 4, 6), cells: int = 60) -> SweepResult:
    """Deficit of the annulus-plus-disc family against its measure.

    Alpha is the concentric-ball value ``2/9`` (an upper bound). Each report is
    paired with ``2 I(chi_annulus, chi_{B_{r/3}})``, the bound the deficit must
    respect, stored in ``extra["two_I"]``.
    """
    r_values = [float(r) for r in r_values]
    if len(r_values) < 3:
        raise DegenerateFit("a dumbbell sweep needs at least 3 values")
    if any(r < 2 for r in r_values):
        raise InputError("dumbbell sweeps are meant for r >= 2")

    def one(r):
        fam = family_dumbbell(r, cells)
        rep = deficit(fam.region, alpha=DUMBBELL_ALPHA, star="grid", center=(0.0, 0.0), margin=0.0, param=r)
        two_i = 2.0 * cross_term(fam.annulus, fam.inner_disc, stencil="cell")
        return rep, two_i

    out = pmap(one, r_values)
    reports = [o[0] for o in out]
    xs = [rep.omega_measure for rep in reports]
    return _sweep("dumbbell", "measure", reports, xs, extra={"d": 1, "two_I": [o[1] for o in out]})


# -- indicator kernel ---------------------------------------------------------------


def _indicator(b):
    return lambda t: (np.asarray(t) < b).astype(float)


def indicator_autocorrelation(omega, b: float) -> float:
    """``T(Omega, B_b) = int int_{Omega x Omega} chi_{|x-y| < b}``.

    ``Intervals`` are handled exactly (piecewise-linear overlap length);
    grid regions by a cell double sum.
    """
    if not b >= 0:
        raise InputError("ball radius must be nonnegative")
    if isinstance(omega, Intervals):
        if b == 0:
            return 0.0
        if math.isinf(b):
            return omega.measure**2
        return riesz_functional_1d(omega, _indicator(b), omega, breakpoints=(b,))
    if isinstance(omega, GridRegion):
        f = omega.field()
        return riesz_functional(f, _indicator(b), f)
    raise InputError(f"unsupported region type {type(omega).__name__}")


def fraenkel_1d(omega: Intervals) -> tuple[float, float]:
    """Exact asymmetry of an interval union: ``(alpha, best_center)``.

    The overlap ``|Omega cap (c, c+L)|`` is piecewise linear in ``c`` with
    kinks where an end of the window meets an endpoint, so the maximum is
    attained at one of those finitely many positions.
    """
    L = omega.measure
    if L <= 0:
        raise EmptyRegion("asymmetry of an empty set")
    ends = [x for iv in omega.bounds for x in iv]
    cands = sorted(set(ends + [e - L for e in ends]))
    best, best_c = -1.0, 0.0
    for c in cands:
        ov = sum(max(0.0, min(b, c + L) - max(a, c)) for a, b in omega.bounds)
        if ov > best + 1e-15 * L:
            best, best_c = ov, c
    return max(0.0, 2.0 * (L - best) / L), best_c + 0.5 * L


@dataclass(frozen=True)
class Conj2Report:
    lhs_deficit: float
    rhs_scale: float
    ratio: float
    alpha: float
    b: float
    measure: float
    d: int

    def as_dict(self) -> dict:
        return asdict(self)


def conjecture2_probe(omega, b: float, delta: float) -> Conj2Report:
    """Indicator-kernel deficit against ``(|B|/|Omega|)^(1+1/d) |Omega|^2 alpha^2``.

    Line mode (``Intervals``, d = 1) is exact; planar grids use d = 2. The
    admissible range is ``|B|^(1/d) / (2 |Omega|^(1/d)) <= 1 - delta``.
    """
    if not 0 < delta < 1:
        raise InputError("delta must lie in (0, 1)")
    if isinstance(omega, Intervals):
        d, m = 1, omega.measure
        star = omega.rearranged()
        alpha, _ = fraenkel_1d(omega)
    elif isinstance(omega, GridRegion):
        d, m = 2, omega.measure
        star = rearrange_region_on_grid(omega, _grid_center(omega.spec, omega.count, None))
        alpha = fraenkel(omega).alpha
    else:
        raise InputError(f"unsupported region type {type(omega).__name__}")
    if m <= 0:
        raise EmptyRegion("probe needs a set of positive measure")
    vb = unit_ball_volume(d) * b**d
    if not vb ** (1 / d) / (2 * m ** (1 / d)) <= 1 - delta:
        raise ParameterConstraint("ball too large for the admissible range")
    lhs = 0.5 * indicator_autocorrelation(star, b) - 0.5 * indicator_autocorrelation(omega, b)
    rhs = (vb / m) ** (1 + 1 / d) * m * m * alpha * alpha
    ratio = lhs / rhs if rhs > 0 else float("nan")
    return Conj2Report(lhs, rhs, ratio, alpha, b, m, d)
