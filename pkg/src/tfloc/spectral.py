"""Finite Hermitian discretization of ``L_Omega`` and its spectrum.

The operator ``V* chi_Omega V`` shares its nonzero spectrum with the
compression ``chi_Omega V V* chi_Omega``, which acts on ``L^2(Omega)`` with
kernel ``<phi_w, phi_z>``. Sampling that kernel at cell centers and weighting
by the cell area gives a Hermitian matrix of the size of the cell count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import CellCapExceeded, EigensolveFailure, EmptyRegion, InputError
from .hs_engine import coherent_overlap_exact
from .phase_space import GridRegion

__all__ = [
    "DEFAULT_CELL_CAP",
    "SpectralResult",
    "build_operator_matrix",
    "eigenvalues",
    "schatten_norm",
    "spectrum",
]

DEFAULT_CELL_CAP = 6000
SCHATTEN_PS = (1, 2, 4, math.inf)


def build_operator_matrix(region: GridRegion, cap: int = DEFAULT_CELL_CAP, rows_per_block: int = 512) -> np.ndarray:
    """Matrix ``M[i, j] = <phi_{z_j}, phi_{z_i}> h^2`` over the cells ``z_i`` of ``region``.

    Cells are taken in row-major order. The kernel is the closed-form overlap
    of two time-frequency shifted Gaussians.
    """
    n = region.count
    if n == 0:
        raise EmptyRegion("cannot discretize L_Omega on an empty region")
    if n > cap:
        raise CellCapExceeded(f"region has {n} cells, cap is {cap}")
    pts = region.points()
    area = region.spec.cell_area
    M = np.empty((n, n), dtype=complex)
    for s in range(0, n, rows_per_block):
        blk = pts[s : s + rows_per_block]
        M[s : s + len(blk)] = coherent_overlap_exact(pts[None, :, :], blk[:, None, :]) * area
    return M


def eigenvalues(M) -> np.ndarray:
    """All eigenvalues of a Hermitian matrix, in descending order."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError(f"expected a square matrix, got shape {M.shape}")
    if M.size == 0:
        return np.zeros(0)
    scale = max(float(np.abs(M).max()), 1e-300)
    if np.abs(M - M.conj().T).max() > 1e-10 * scale:
        raise InputError("matrix is not Hermitian")
    try:
        w = scipy.linalg.eigvalsh(M, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigensolveFailure(str(exc)) from exc
    return w[::-1].copy()


def _clipped(eigs) -> np.ndarray:
    e = np.asarray(eigs, dtype=float)
    if e.size == 0:
        return e
    top = max(float(np.abs(e).max()), 0.0)
    tiny = (e < 0) & (np.abs(e) < 10 * np.finfo(float).eps * top)
    e = np.where(tiny, 0.0, e)
    # singular values of a Hermitian matrix
    return np.abs(e)


def schatten_norm(eigs, p) -> float:
    """``(sum sigma_j^p)^(1/p)``; ``p = inf`` gives the largest singular value."""
    s = _clipped(eigs)
    if s.size == 0:
        return 0.0
    if p == math.inf or p == "inf":
        return float(s.max())
    p = float(p)
    if p < 1:
        raise InputError("Schatten exponent must be >= 1")
    m = s.max()
    if m == 0:
        return 0.0
    return float(m * np.sum((s / m) ** p) ** (1.0 / p))


@dataclass(frozen=True)
class SpectralResult:
    eigenvalues: np.ndarray
    h: float
    omega_measure: float
    schatten: dict = field(default_factory=dict)

    @property
    def trace(self) -> float:
        return float(np.sum(self.eigenvalues))

    @property
    def hs_sq(self) -> float:
        return float(np.sum(self.eigenvalues**2))

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[0]) if self.eigenvalues.size else 0.0

    def as_dict(self) -> dict:
        return {
            "h": self.h,
            "omega_measure": self.omega_measure,
            "trace": self.trace,
            "hs_sq": self.hs_sq,
            "lambda_max": self.lambda_max,
            "schatten": {str(k): v for k, v in self.schatten.items()},
        }


def spectrum(region: GridRegion, cap: int = DEFAULT_CELL_CAP) -> SpectralResult:
    eigs = eigenvalues(build_operator_matrix(region, cap=cap))
    norms = {p: schatten_norm(eigs, p) for p in SCHATTEN_PS}
    return SpectralResult(eigs, region.spec.h, region.measure, norms)
