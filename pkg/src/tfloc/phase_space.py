"""Phase-space regions, sampled weights, measures and the RGN1 file format.

Planar objects live on a uniform grid of square cells. A cell belongs to a
rasterized shape iff its center does. Radial regions (unions of concentric
annuli) are kept analytic and may live in any even dimension.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union as TUnion

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyRegion,
    InputError,
    MalformedHeader,
    NonFiniteField,
    ShapeExceedsGrid,
    TruncatedPayload,
)

__all__ = [
    "GridSpec",
    "GridRegion",
    "GridField",
    "RadialRegion",
    "Ball",
    "Union",
    "unit_ball_volume",
    "measure",
    "rasterize",
    "coverage",
    "symm_diff_measure",
    "shift",
    "dilate",
    "write_region",
    "read_region",
    "region_to_bytes",
    "region_from_bytes",
]

_BOX_TOL = 1e-9
MAGIC = b"RGN1"


def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n."""
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of ``nx * ny`` square cells of side ``h``.

    ``origin`` is the lower-left corner of the box. Cell ``(j, i)`` (row ``j``
    along y, column ``i`` along x) has center ``origin + ((i+1/2)h, (j+1/2)h)``;
    flat indices are row-major, ``j * nx + i``.
    """

    origin: tuple[float, float]
    h: float
    nx: int
    ny: int

    def __post_init__(self):
        ox, oy = (float(v) for v in self.origin)
        object.__setattr__(self, "origin", (ox, oy))
        object.__setattr__(self, "h", float(self.h))
        if not (math.isfinite(self.h) and self.h > 0):
            raise InputError(f"cell size must be positive, got {self.h}")
        if not (math.isfinite(ox) and math.isfinite(oy)):
            raise InputError("grid origin must be finite")
        if int(self.nx) != self.nx or int(self.ny) != self.ny or self.nx < 1 or self.ny < 1:
            raise InputError(f"grid dimensions must be positive integers, got {self.nx}x{self.ny}")
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "ny", int(self.ny))

    @classmethod
    def lattice(cls, xmin, xmax, ymin, ymax, h) -> "GridSpec":
        """Smallest grid with cell centers on ``h * Z^2`` whose box covers the rectangle."""
        kx0 = math.floor(xmin / h + 0.5)
        kx1 = math.ceil(xmax / h - 0.5)
        ky0 = math.floor(ymin / h + 0.5)
        ky1 = math.ceil(ymax / h - 0.5)
        return cls(((kx0 - 0.5) * h, (ky0 - 0.5) * h), h, kx1 - kx0 + 1, ky1 - ky0 + 1)

    @classmethod
    def centered(cls, half_width: float, h: float) -> "GridSpec":
        """Square lattice grid covering ``[-half_width, half_width]^2``; the origin is a cell center."""
        return cls.lattice(-half_width, half_width, -half_width, half_width, h)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def cell_area(self) -> float:
        return self.h * self.h

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        ox, oy = self.origin
        return (ox, ox + self.nx * self.h, oy, oy + self.ny * self.h)

    def _axis(self, o: float, n: int) -> np.ndarray:
        k = o / self.h + 0.5
        if abs(k - round(k)) < 1e-9:
            # lattice-aligned: centers are exact integer multiples of h
            return (round(k) + np.arange(n)) * self.h
        return o + (np.arange(n) + 0.5) * self.h

    @property
    def x(self) -> np.ndarray:
        return self._axis(self.origin[0], self.nx)

    @property
    def y(self) -> np.ndarray:
        return self._axis(self.origin[1], self.ny)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-center coordinates, each of shape ``(ny, nx)``."""
        return np.meshgrid(self.x, self.y)

    def contains_box(self, xmin, xmax, ymin, ymax) -> bool:
        bx0, bx1, by0, by1 = self.bounds
        tol = _BOX_TOL * max(1.0, abs(bx0), abs(bx1), abs(by0), abs(by1))
        return xmin >= bx0 - tol and xmax <= bx1 + tol and ymin >= by0 - tol and ymax <= by1 + tol

    def scaled(self, factor: float) -> "GridSpec":
        return GridSpec((self.origin[0] * factor, self.origin[1] * factor), self.h * factor, self.nx, self.ny)


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class GridRegion:
    """Boolean cell mask on a :class:`GridSpec`. ``mask`` has shape ``(ny, nx)``."""

    spec: GridSpec
    mask: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool)
        if m.ndim == 1:
            if m.size != self.spec.nx * self.spec.ny:
                raise DimensionMismatch(f"mask length {m.size} != {self.spec.nx}*{self.spec.ny}")
            m = m.reshape(self.spec.shape)
        if m.shape != self.spec.shape:
            raise DimensionMismatch(f"mask shape {m.shape} != grid shape {self.spec.shape}")
        object.__setattr__(self, "mask", _freeze(m.copy()))

    @property
    def flat(self) -> np.ndarray:
        return self.mask.ravel()

    @property
    def count(self) -> int:
        return int(self.mask.sum())

    @property
    def measure(self) -> float:
        return self.count * self.spec.cell_area

    def points(self) -> np.ndarray:
        """Centers of member cells, shape ``(count, 2)``, in row-major order."""
        X, Y = self.spec.mesh()
        return np.column_stack([X[self.mask], Y[self.mask]])

    def centroid(self) -> tuple[float, float]:
        if self.count == 0:
            raise EmptyRegion("empty region has no centroid")
        p = self.points()
        return (float(p[:, 0].mean()), float(p[:, 1].mean()))

    def field(self) -> "GridField":
        return GridField(self.spec, self.mask.astype(float))

    def __or__(self, other: "GridRegion") -> "GridRegion":
        _check_same_grid(self.spec, other.spec)
        return GridRegion(self.spec, self.mask | other.mask)

    def __and__(self, other: "GridRegion") -> "GridRegion":
        _check_same_grid(self.spec, other.spec)
        return GridRegion(self.spec, self.mask & other.mask)

    def __eq__(self, other):
        if not isinstance(other, GridRegion):
            return NotImplemented
        return self.spec == other.spec and np.array_equal(self.mask, other.mask)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class GridField:
    """Weight function sampled at cell centers; ``values`` has shape ``(ny, nx)``.

    Real input is kept real (float64); complex input is stored as complex128.
    """

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        v = v.astype(np.complex128 if np.iscomplexobj(v) else np.float64)
        if v.ndim == 1:
            if v.size != self.spec.nx * self.spec.ny:
                raise DimensionMismatch(f"field length {v.size} != {self.spec.nx}*{self.spec.ny}")
            v = v.reshape(self.spec.shape)
        if v.shape != self.spec.shape:
            raise DimensionMismatch(f"field shape {v.shape} != grid shape {self.spec.shape}")
        if not np.all(np.isfinite(v)):
            raise NonFiniteField("field has non-finite entries")
        object.__setattr__(self, "values", _freeze(v.copy()))

    @property
    def l1(self) -> float:
        return float(np.abs(self.values).sum() * self.spec.cell_area)

    @property
    def l2(self) -> float:
        return float(math.sqrt(self.spec.cell_area) * np.linalg.norm(self.values))

    def lp(self, p: float) -> float:
        if math.isinf(p):
            return float(np.abs(self.values).max())
        return float((np.sum(np.abs(self.values) ** p) * self.spec.cell_area) ** (1 / p))

    @property
    def support(self) -> np.ndarray:
        return self.values != 0

    @property
    def is_real_nonnegative(self) -> bool:
        return not np.iscomplexobj(self.values) and bool(np.all(self.values >= 0))


def _check_same_grid(a: GridSpec, b: GridSpec):
    from .errors import GridMismatch

    if a != b:
        raise GridMismatch(f"grids differ: {a} vs {b}")


@dataclass(frozen=True)
class RadialRegion:
    """Union of concentric annuli ``[a_i, b_i)`` about the origin of R^n."""

    n: int
    annuli: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2 or self.n % 2:
            raise InputError(f"radial regions need an even dimension n >= 2, got {self.n}")
        ann = tuple((float(a), float(b)) for a, b in self.annuli)
        prev = 0.0
        for k, (a, b) in enumerate(ann):
            if not (0 <= a < b and math.isfinite(b)):
                raise InputError(f"bad annulus [{a}, {b})")
            if k and a < prev:
                raise InputError("annuli must be sorted and pairwise disjoint")
            prev = b
        object.__setattr__(self, "annuli", ann)
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def ball(cls, r: float, n: int = 2) -> "RadialRegion":
        if r == 0:
            return cls(n, ())
        return cls(n, ((0.0, r),))

    @property
    def d(self) -> int:
        return self.n // 2

    @property
    def measure(self) -> float:
        return unit_ball_volume(self.n) * sum(b**self.n - a**self.n for a, b in self.annuli)

    @property
    def outer_radius(self) -> float:
        return self.annuli[-1][1] if self.annuli else 0.0

    @property
    def is_ball(self) -> bool:
        return len(self.annuli) == 1 and self.annuli[0][0] == 0.0

    def contains(self, X, Y):
        self._planar()
        r2 = X * X + Y * Y
        out = np.zeros(np.shape(r2), dtype=bool)
        for a, b in self.annuli:
            out |= (r2 >= a * a) & (r2 < b * b)
        return out

    def bbox(self):
        R = self.outer_radius
        return (-R, R, -R, R)

    def _planar(self):
        if self.n != 2:
            raise InputError("only planar (n=2) radial regions can be rasterized")

    def coverage_values(self, spec: GridSpec) -> np.ndarray:
        self._planar()
        out = np.zeros(spec.shape)
        for a, b in self.annuli:
            out += Ball((0.0, 0.0), b).coverage_values(spec)
            if a > 0:
                out -= Ball((0.0, 0.0), a).coverage_values(spec)
        return out


@dataclass(frozen=True)
class Ball:
    """Open planar disc."""

    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius >= 0:
            raise InputError(f"ball radius must be nonnegative, got {self.radius}")

    @property
    def measure(self) -> float:
        return math.pi * self.radius**2

    def contains(self, X, Y):
        cx, cy = self.center
        return (X - cx) ** 2 + (Y - cy) ** 2 < self.radius**2

    def bbox(self):
        cx, cy = self.center
        r = self.radius
        return (cx - r, cx + r, cy - r, cy + r)

    def coverage_values(self, spec: GridSpec) -> np.ndarray:
        out = np.zeros(spec.shape)
        r = self.radius
        if r == 0:
            return out
        cx, cy = self.center
        h = spec.h
        x, y = spec.x, spec.y
        ix = np.nonzero((x + h / 2 > cx - r) & (x - h / 2 < cx + r))[0]
        iy = np.nonzero((y + h / 2 > cy - r) & (y - h / 2 < cy + r))[0]
        if ix.size == 0 or iy.size == 0:
            return out
        X, Y = np.meshgrid(x[ix] - cx, y[iy] - cy)
        area = _disc_box_area(r, X - h / 2, X + h / 2, Y - h / 2, Y + h / 2)
        out[np.ix_(iy, ix)] = np.clip(area / (h * h), 0.0, 1.0)
        return out


@dataclass(frozen=True)
class Union:
    """Disjoint union of planar shapes."""

    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    @property
    def measure(self) -> float:
        return sum(p.measure for p in self.parts)

    def contains(self, X, Y):
        out = np.zeros(np.shape(X), dtype=bool)
        for p in self.parts:
            out |= p.contains(X, Y)
        return out

    def bbox(self):
        if not self.parts:
            return (0.0, 0.0, 0.0, 0.0)
        boxes = np.array([p.bbox() for p in self.parts])
        return (boxes[:, 0].min(), boxes[:, 1].max(), boxes[:, 2].min(), boxes[:, 3].max())

    def coverage_values(self, spec: GridSpec) -> np.ndarray:
        return sum((p.coverage_values(spec) for p in self.parts), np.zeros(spec.shape))


Shape = TUnion[RadialRegion, Ball, Union]


def _as_shape(shape) -> Shape:
    if isinstance(shape, (list, tuple)):
        return Union(tuple(shape))
    return shape


def _disc_antiderivative(r, x):
    x = np.clip(x, -r, r)
    return 0.5 * (x * np.sqrt(np.maximum(r * r - x * x, 0.0)) + r * r * np.arcsin(x / r))


def _disc_box_area(r, x0, x1, y0, y1):
    """Exact area of the disc ``|z| < r`` intersected with boxes ``[x0,x1] x [y0,y1]``.

    The chord length ``min(y1, s(x)) - max(y0, -s(x))`` (``s = sqrt(r^2 - x^2)``)
    keeps a fixed algebraic form between the abscissae where ``s`` crosses
    ``y0`` or ``y1``, so each piece integrates in closed form.
    """
    x0, x1, y0, y1 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x0, x1, y0, y1)))
    nan = np.full(x0.shape, np.nan)

    def crossing(yv):
        ok = np.abs(yv) < r
        c = np.where(ok, np.sqrt(np.maximum(r * r - yv * yv, 0.0)), nan)
        return c

    c0, c1 = crossing(y0), crossing(y1)
    cand = np.stack([x0, x1, np.full(x0.shape, -r), np.full(x0.shape, r), c0, -c0, c1, -c1], axis=-1)
    cand = np.where(np.isnan(cand), x0[..., None], cand)
    cand = np.clip(cand, x0[..., None], x1[..., None])
    cand.sort(axis=-1)
    p, q = cand[..., :-1], cand[..., 1:]
    m = 0.5 * (p + q)
    s = np.sqrt(np.maximum(r * r - m * m, 0.0))
    inside = (np.abs(m) < r) & (q > p)
    Y0, Y1 = y0[..., None], y1[..., None]
    dS = _disc_antiderivative(r, q) - _disc_antiderivative(r, p)
    upper_const = Y1 < s
    lower_const = Y0 > -s
    upper = np.where(upper_const, Y1 * (q - p), dS)
    lower = np.where(lower_const, Y0 * (q - p), -dS)
    up_m = np.where(upper_const, Y1, s)
    lo_m = np.where(lower_const, Y0, -s)
    piece = np.where(inside & (up_m > lo_m), upper - lower, 0.0)
    return piece.sum(axis=-1)


def _check_fits(shape: Shape, spec: GridSpec):
    xmin, xmax, ymin, ymax = shape.bbox()
    if not spec.contains_box(xmin, xmax, ymin, ymax):
        raise ShapeExceedsGrid(
            f"shape bounding box {(xmin, xmax, ymin, ymax)} not inside grid box {spec.bounds}"
        )


def rasterize(shape, spec: GridSpec) -> GridRegion:
    """Cell-center rasterization of a ball, planar radial region, or union."""
    shape = _as_shape(shape)
    _check_fits(shape, spec)
    X, Y = spec.mesh()
    return GridRegion(spec, shape.contains(X, Y))


def coverage(shape, spec: GridSpec) -> GridField:
    """Exact fraction of each cell covered by the shape, as a real field in ``[0, 1]``.

    Used where cell-center rasterization is too coarse (its lattice-count error
    decays erratically, roughly like ``h^(4/3)``); coverage weights converge at
    second order for the smooth functionals computed here.
    """
    shape = _as_shape(shape)
    _check_fits(shape, spec)
    return GridField(spec, shape.coverage_values(spec))


def measure(region) -> float:
    """Lebesgue measure: exact for radial regions and shapes, cell count times ``h^2`` on grids."""
    if isinstance(region, GridField):
        return float(np.abs(region.values).sum() * region.spec.cell_area)
    if isinstance(region, (list, tuple)):
        region = Union(tuple(region))
    return float(region.measure)


def symm_diff_measure(A: GridRegion, center, r: float) -> float:
    """Measure of ``A`` symmetric-difference the ball ``B(center, r)``, cellwise."""
    ball = Ball(center, r)
    if not A.spec.contains_box(*ball.bbox()):
        raise ShapeExceedsGrid(f"ball {ball} leaves the grid box {A.spec.bounds}")
    X, Y = A.spec.mesh()
    B = ball.contains(X, Y)
    return float(np.count_nonzero(A.mask ^ B) * A.spec.cell_area)


def shift(shape, v) -> Shape:
    """Translate a ball or union of balls (radial regions are anchored at the origin and become balls/annuli via Union)."""
    shape = _as_shape(shape)
    vx, vy = v
    if isinstance(shape, Ball):
        return Ball((shape.center[0] + vx, shape.center[1] + vy), shape.radius)
    if isinstance(shape, Union):
        return Union(tuple(shift(p, v) for p in shape.parts))
    if isinstance(shape, RadialRegion):
        if vx == 0 and vy == 0:
            return shape
        return _ShiftedRadial(shape, (float(vx), float(vy)))
    if isinstance(shape, _ShiftedRadial):
        return _ShiftedRadial(shape.base, (shape.offset[0] + vx, shape.offset[1] + vy))
    raise InputError(f"cannot shift {type(shape).__name__}")


@dataclass(frozen=True)
class _ShiftedRadial:
    base: RadialRegion
    offset: tuple[float, float]

    @property
    def measure(self):
        return self.base.measure

    def contains(self, X, Y):
        return self.base.contains(X - self.offset[0], Y - self.offset[1])

    def bbox(self):
        x0, x1, y0, y1 = self.base.bbox()
        ox, oy = self.offset
        return (x0 + ox, x1 + ox, y0 + oy, y1 + oy)

    def coverage_values(self, spec: GridSpec):
        shifted = GridSpec((spec.origin[0] - self.offset[0], spec.origin[1] - self.offset[1]), spec.h, spec.nx, spec.ny)
        return self.base.coverage_values(shifted)


def dilate(shape, factor: float) -> Shape:
    """Image of a shape under ``z -> factor * z``."""
    shape = _as_shape(shape)
    if not factor > 0:
        raise InputError("dilation factor must be positive")
    if isinstance(shape, Ball):
        return Ball((shape.center[0] * factor, shape.center[1] * factor), shape.radius * factor)
    if isinstance(shape, RadialRegion):
        return RadialRegion(shape.n, tuple((a * factor, b * factor) for a, b in shape.annuli))
    if isinstance(shape, Union):
        return Union(tuple(dilate(p, factor) for p in shape.parts))
    if isinstance(shape, _ShiftedRadial):
        return _ShiftedRadial(dilate(shape.base, factor), (shape.offset[0] * factor, shape.offset[1] * factor))
    raise InputError(f"cannot dilate {type(shape).__name__}")


# -- RGN1 file format ---------------------------------------------------------


def region_to_bytes(region: GridRegion) -> bytes:
    s = region.spec
    header = f"{s.nx} {s.ny} {s.h!r} {s.origin[0]!r} {s.origin[1]!r}\n".encode("ascii")
    payload = np.packbits(region.flat.astype(np.uint8), bitorder="little").tobytes()
    return MAGIC + header + payload


def region_from_bytes(data: bytes) -> GridRegion:
    if data[:4] != MAGIC:
        raise MalformedHeader("missing RGN1 magic")
    end = data.find(b"\n", 4)
    if end < 0:
        raise MalformedHeader("header line not terminated")
    try:
        fields = data[4:end].decode("ascii").split()
    except UnicodeDecodeError as exc:
        raise MalformedHeader("header is not ASCII") from exc
    if len(fields) != 5:
        raise MalformedHeader(f"expected 5 header fields, got {len(fields)}")
    try:
        nx, ny = int(fields[0]), int(fields[1])
        h, ox, oy = (float(v) for v in fields[2:])
    except ValueError as exc:
        raise MalformedHeader(f"unparsable header {fields}") from exc
    if nx < 1 or ny < 1:
        raise DimensionMismatch(f"nonpositive grid dimensions {nx}x{ny}")
    try:
        spec = GridSpec((ox, oy), h, nx, ny)
    except InputError as exc:
        raise MalformedHeader(str(exc)) from exc
    payload = data[end + 1 :]
    need = (nx * ny + 7) // 8
    if len(payload) < need:
        raise TruncatedPayload(f"payload has {len(payload)} bytes, need {need}")
    if len(payload) > need:
        raise DimensionMismatch(f"payload has {len(payload)} bytes, header implies {need}")
    bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8), bitorder="little")[: nx * ny]
    return GridRegion(spec, bits.astype(bool))


def write_region(path, region: GridRegion) -> None:
    Path(path).write_bytes(region_to_bytes(region))


def read_region(path) -> GridRegion:
    return region_from_bytes(Path(path).read_bytes())
