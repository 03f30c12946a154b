"""Gaussian-window STFT of sampled 1-D signals.

``V f(x, w) = int f(y) phi(y - x) exp(-2 pi i w y) dy`` with
``phi(t) = 2^(1/4) exp(-pi t^2)``, evaluated by direct quadrature over the
samples. The first grid axis is time ``x``, the second frequency ``w``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_hermite

from ._workers import pmap
from .errors import GridMismatch, InputError, InsufficientSignalSupport
from .phase_space import GridField, GridRegion, GridSpec, _check_same_grid

__all__ = [
    "WINDOW_RADIUS",
    "Signal",
    "Spectrogram",
    "window",
    "gaussian_signal",
    "hermite_function",
    "random_hermite_signal",
    "stft_gaussian",
    "spectrogram",
    "local_energy",
    "quadratic_form_check",
    "lieb_check",
    "default_grid",
]

WINDOW_RADIUS = 3.2
_TAIL = 1e-12


def window(t):
    """``phi(t) = 2^(1/4) exp(-pi t^2)``, unit norm in ``L^2(R)``."""
    t = np.asarray(t, dtype=float)
    return 2**0.25 * np.exp(-np.pi * t * t)


@dataclass(frozen=True, eq=False)
class Signal:
    samples: np.ndarray
    time_step: float
    t0: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex).ravel()
        if s.size == 0:
            raise InputError("signal has no samples")
        if not np.all(np.isfinite(s)):
            raise InputError("signal has non-finite samples")
        if not self.time_step > 0:
            raise InputError("time_step must be positive")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @classmethod
    def sample(cls, fn, t0: float, t1: float, dt: float) -> "Signal":
        n = int(round((t1 - t0) / dt)) + 1
        t = t0 + np.arange(n) * dt
        return cls(fn(t), dt, t0)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.samples.size) * self.time_step

    @property
    def norm(self) -> float:
        return float(math.sqrt(np.sum(np.abs(self.samples) ** 2) * self.time_step))

    def shifted(self, steps: int) -> "Signal":
        """Translate by ``steps * time_step`` (samples unchanged, time axis moved)."""
        return Signal(self.samples, self.time_step, self.t0 + steps * self.time_step)

    def _support(self, tail=1e-8) -> tuple[float, float]:
        e = np.abs(self.samples) ** 2
        c = np.cumsum(e)
        tot = c[-1]
        if tot == 0:
            return (self.t0, self.t0)
        lo = int(np.searchsorted(c, 0.5 * tail * tot))
        hi = int(np.searchsorted(c, (1 - 0.5 * tail) * tot))
        t = self.times
        return (float(t[lo]), float(t[min(hi, t.size - 1)]))

    def _band(self, tail=1e-8) -> tuple[float, float]:
        n = 1 << int(math.ceil(math.log2(4 * self.samples.size)))
        spec = np.fft.fftshift(np.abs(np.fft.fft(self.samples, n)) ** 2)
        freqs = np.fft.fftshift(np.fft.fftfreq(n, self.time_step))
        c = np.cumsum(spec)
        tot = c[-1]
        if tot == 0:
            return (0.0, 0.0)
        lo = int(np.searchsorted(c, 0.5 * tail * tot))
        hi = int(np.searchsorted(c, (1 - 0.5 * tail) * tot))
        return (float(freqs[lo]), float(freqs[min(hi, n - 1)]))


@dataclass(frozen=True, eq=False)
class Spectrogram:
    spec: GridSpec
    values: np.ndarray

    @property
    def mass(self) -> float:
        return float(np.sum(self.values) * self.spec.cell_area)

    def to_csv(self) -> str:
        X, Y = self.spec.mesh()
        lines = ["x,omega,value"]
        for x, w, v in zip(X.ravel(), Y.ravel(), self.values.ravel()):
            lines.append(f"{x!r},{w!r},{float(v)!r}")
        return "\n".join(lines) + "\n"


def gaussian_signal(dt: float = 0.02, half_width: float = 8.0, x0: float = 0.0, w0: float = 0.0) -> Signal:
    """Samples of the time-frequency shifted window ``exp(2 pi i w0 t) phi(t - x0)``."""
    return Signal.sample(lambda t: np.exp(2j * np.pi * w0 * t) * window(t - x0), -half_width, half_width, dt)


def hermite_function(k: int, t):
    """``k``-th Hermite function in the scaling of ``phi``; orthonormal in ``L^2(R)``."""
    t = np.asarray(t, dtype=float)
    u = math.sqrt(2 * math.pi) * t
    norm = 2**0.25 / math.sqrt(2.0**k * math.factorial(k))
    return norm * eval_hermite(k, u) * np.exp(-0.5 * u * u)


def random_hermite_signal(
    rng: np.random.Generator, terms: int = 6, dt: float = 0.02, half_width: float = 8.0, spread: float = 0.5
) -> Signal:
    """Random finite Hermite expansion with coefficients decaying like ``2^-k``.

    The result is shifted in time and frequency by uniform amounts in
    ``[-spread, spread]``; it decays like a Gaussian, so the sampled window
    holds all but a negligible fraction of its energy.
    """
    coef = (rng.standard_normal(terms) + 1j * rng.standard_normal(terms)) * 0.5 ** np.arange(terms)
    x0, w0 = rng.uniform(-spread, spread, 2)

    def fn(t):
        out = sum(c * hermite_function(k, t - x0) for k, c in enumerate(coef))
        return out * np.exp(2j * np.pi * w0 * t)

    return Signal.sample(fn, -half_width, half_width, dt)


def default_grid(f: Signal, h: float = 0.05) -> GridSpec:
    """Lattice grid covering the signal's time and frequency support plus the window margin."""
    a, b = f._support()
    lo, hi = f._band()
    m = WINDOW_RADIUS
    return GridSpec.lattice(a - m, b + m, lo - m, hi + m, h)


def _check_support(f: Signal, spec: GridSpec):
    e = np.abs(f.samples) ** 2
    tot = e.sum()
    if tot == 0:
        return
    edge = max(1, int(round(0.25 / f.time_step)))
    if (e[:edge].sum() + e[-edge:].sum()) > _TAIL * tot:
        raise InsufficientSignalSupport("signal has not decayed at the ends of its sample window")
    a, b = f._support()
    lo, hi = f._band()
    x0, x1, y0, y1 = spec.bounds
    m = WINDOW_RADIUS - spec.h
    if a - m < x0 or b + m > x1 or lo - m < y0 or hi + m > y1:
        raise InsufficientSignalSupport(
            f"grid {spec.bounds} does not cover time support [{a:.3g}, {b:.3g}] "
            f"and band [{lo:.3g}, {hi:.3g}] with margin {WINDOW_RADIUS}"
        )
    # replicas of the band at multiples of 1/dt must stay off the grid
    rate = 1.0 / f.time_step
    if rate < max(y1 - (lo - WINDOW_RADIUS), (hi + WINDOW_RADIUS) - y0):
        raise InsufficientSignalSupport("sampling rate too low for the frequency range of the grid")


def stft_gaussian(f: Signal, spec: GridSpec, check: bool = True) -> GridField:
    """``V f`` on the cell centers of ``spec`` (time along x, frequency along y).

    The window is truncated at ``|y - x| <= 3.2`` and the integral is a plain
    sum over samples (spectrally accurate for Gaussian-decaying integrands).
    """
    if check:
        _check_support(f, spec)
    t = f.times
    xs, ws = spec.x, spec.y
    dt = f.time_step
    E = np.exp(-2j * np.pi * np.outer(ws, t))

    def column(x):
        u = t - x
        keep = np.abs(u) <= WINDOW_RADIUS
        return E[:, keep] @ (f.samples[keep] * window(u[keep])) * dt

    cols = pmap(column, xs)
    return GridField(spec, np.column_stack(cols))


def spectrogram(f: Signal, spec: GridSpec, check: bool = True) -> Spectrogram:
    V = stft_gaussian(f, spec, check)
    return Spectrogram(spec, np.abs(V.values) ** 2)


def local_energy(S: Spectrogram, omega) -> float:
    """``int_Omega |V f|^2`` as a cell sum; ``omega`` is a grid region or a weight field on the same grid."""
    if isinstance(omega, GridRegion):
        _check_same_grid(S.spec, omega.spec)
        return float(np.sum(S.values[omega.mask]) * S.spec.cell_area)
    if isinstance(omega, GridField):
        _check_same_grid(S.spec, omega.spec)
        return float(np.real(np.sum(S.values * omega.values)) * S.spec.cell_area)
    raise GridMismatch(f"cannot integrate a spectrogram over {type(omega).__name__}")


def quadratic_form_check(f: Signal, omega: GridRegion) -> dict:
    """``<chi_Omega V f, V f>`` against ``<L_Omega f, f>``.

    The right side synthesizes ``L_Omega f = sum_{z in Omega} V f(z) phi_z h^2``
    on the sample times and pairs it with ``f`` in ``L^2(R)``.
    """
    V = stft_gaussian(f, omega.spec)
    S = Spectrogram(omega.spec, np.abs(V.values) ** 2)
    lhs = local_energy(S, omega)
    if omega.count == 0:
        return {"lhs": lhs, "rhs": 0.0, "gap": abs(lhs)}
    pts = omega.points()
    coeff = V.values[omega.mask]
    t = f.times
    Lf = np.zeros(t.size, dtype=complex)
    for s in range(0, pts.shape[0], 256):
        x = pts[s : s + 256, 0][:, None]
        w = pts[s : s + 256, 1][:, None]
        atoms = np.exp(2j * np.pi * w * t[None, :]) * window(t[None, :] - x)
        Lf += coeff[s : s + 256] @ atoms
    Lf *= omega.spec.cell_area
    rhs = np.sum(Lf * np.conj(f.samples)) * f.time_step
    return {"lhs": lhs, "rhs": float(rhs.real), "gap": abs(lhs - float(rhs.real)), "rhs_imag": float(rhs.imag)}


def lieb_check(f: Signal, p: float, spec: GridSpec | None = None) -> dict:
    """``||V f||_p^p`` against ``(2/p) ||f||_2^p``; ``slack = rhs - lhs``."""
    if not 2 <= p <= 8:
        raise InputError("p must lie in [2, 8]")
    spec = spec or default_grid(f)
    V = stft_gaussian(f, spec)
    lhs = float(np.sum(np.abs(V.values) ** p) * spec.cell_area)
    rhs = (2.0 / p) * f.norm**p
    return {"lhs": lhs, "rhs": rhs, "slack": rhs - lhs}
