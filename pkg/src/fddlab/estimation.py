"""Analytic information limits for weak-contrast Fourier amplitude
estimation from photon-counting images, plus a direct quadrature Fisher
matrix for arbitrary mean images.

For a sample f = a0 + sum of small cos/sin modulations, the quantum Fisher
information per detected photon for a mode amplitude at frequency k is
beta^DI(k) / (2 a0^2): attenuated only linearly by the aperture. Direct
imaging pays the transfer function twice, FI^DI = beta^DI(k)^2 / (2 a0^2).
A displaced pupil region l recovers FI^(l) = beta_l(k)^2 / (2 a0^2
beta_l(0)); the beta_l(0) accounts for the photon fraction that region
collects. Summing the five regions and blending with direct imaging at
split alpha gives the hybrid limit.

All values are per detected photon; crb() divides by the photon number to
get variance bounds.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fourier import RealField
from .optics import Otf

__all__ = [
    "FisherDiagonal",
    "FisherMatrix",
    "qfi_analytic",
    "fi_di_analytic",
    "fi_pupil_analytic",
    "fi_fdd_raw",
    "fi_hybrid",
    "crb",
    "fi_numeric",
]


@dataclass(frozen=True)
class FisherDiagonal:
    """Per-photon Fisher information for (k, 'cos'|'sin') parameters,
    ignoring cross-parameter coupling."""

    entries: tuple[tuple[tuple[float, float], str, float], ...]
    a0: float

    def __post_init__(self):
        if not (self.a0 > 0):
            raise ValueError(f"a0 must be positive, got {self.a0}")
        for k, mode, value in self.entries:
            if mode not in ("cos", "sin"):
                raise ValueError(f"mode must be 'cos' or 'sin', got {mode!r}")
            if value < 0 or not np.isfinite(value):
                raise ValueError(f"information value must be finite >= 0, got {value}")

    @property
    def labels(self) -> tuple[tuple[tuple[float, float], str], ...]:
        return tuple((k, mode) for k, mode, _ in self.entries)

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, _, v in self.entries])

    def value_at(self, k, mode: str) -> float:
        kx, ky = float(k[0]), float(k[1])
        tol = 1e-9 * (1 + abs(kx) + abs(ky))
        for (ex, ey), m, v in self.entries:
            if m == mode and abs(ex - kx) <= tol and abs(ey - ky) <= tol:
                return v
        raise KeyError(f"no entry for k=({kx}, {ky}), mode={mode}")


@dataclass(frozen=True)
class FisherMatrix:
    """Dense Fisher matrix over an ordered parameter list.

    Symmetric within 1e-9 and positive semidefinite within -1e-8, both
    relative to the matrix scale (absolute tolerances are meaningless here:
    per-photon entries scale as 1/a0^2, which is huge in grid units).
    """

    labels: tuple[tuple[tuple[float, float], str], ...]
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        n = len(self.labels)
        if m.shape != (n, n):
            raise ValueError(f"matrix shape {m.shape} != ({n}, {n})")
        scale = max(np.abs(m).max(), 1e-300)
        asym = np.abs(m - m.T).max()
        if asym > 1e-9 * scale:
            raise ValueError(f"matrix is not symmetric (defect {asym:.3e})")
        m = (m + m.T) / 2
        eig = np.linalg.eigvalsh(m)
        if eig.min() < -1e-8 * max(eig.max(), 1e-300):
            raise ValueError(f"matrix is not PSD (min eigenvalue {eig.min():.3e})")
        object.__setattr__(self, "matrix", m)

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.matrix).copy()

    def offdiag_fraction(self) -> float:
        """Frobenius norm of the off-diagonal part over the diagonal part."""
        off = self.matrix - np.diag(np.diag(self.matrix))
        diag = np.linalg.norm(np.diag(self.matrix))
        return float(np.linalg.norm(off) / diag) if diag > 0 else 0.0


def _pairs(k_list, per_k_values, a0) -> FisherDiagonal:
    entries = []
    for k, v in zip(k_list, per_k_values):
        kk = (float(k[0]), float(k[1]))
        entries.append((kk, "cos", float(v)))
        entries.append((kk, "sin", float(v)))
    return FisherDiagonal(entries=tuple(entries), a0=a0)


def qfi_analytic(otf_di: Otf, a0: float, k_list) -> FisherDiagonal:
    """Quantum limit beta^DI(k) / (2 a0^2), identical for cos and sin.

    Frequencies beyond the cutoff carry no information; reported as 0 with
    a warning.
    """
    if not (a0 > 0):
        raise ValueError(f"a0 must be positive, got {a0}")
    vals = []
    for k in k_list:
        if np.hypot(k[0], k[1]) > otf_di.k_c:
            warnings.warn(
                f"frequency {tuple(k)} is beyond the cutoff {otf_di.k_c:.4g}; "
                "information is 0",
                stacklevel=2,
            )
            vals.append(0.0)
        else:
            vals.append(otf_di.at(k) / (2 * a0**2))
    return _pairs(k_list, vals, a0)


def fi_di_analytic(otf_di: Otf, a0: float, k_list) -> FisherDiagonal:
    """Direct imaging: beta^DI(k)^2 / (2 a0^2)."""
    if not (a0 > 0):
        raise ValueError(f"a0 must be positive, got {a0}")
    vals = [otf_di.at(k) ** 2 / (2 * a0**2) for k in k_list]
    return _pairs(k_list, vals, a0)


def fi_pupil_analytic(otf_l: Otf, a0: float, k_list) -> FisherDiagonal:
    """One displaced pupil region: beta_l(k)^2 / (2 a0^2 beta_l(0))."""
    if not (a0 > 0):
        raise ValueError(f"a0 must be positive, got {a0}")
    b0 = otf_l.dc_value
    if b0 <= 0:
        raise ValueError("region OTF has beta(0) = 0; it collects no photons")
    vals = [otf_l.at(k) ** 2 / (2 * a0**2 * b0) for k in k_list]
    return _pairs(k_list, vals, a0)


def _check_same_labels(diags: Sequence[FisherDiagonal]):
    ref = diags[0].labels
    for d in diags[1:]:
        if len(d.labels) != len(ref):
            raise ValueError("Fisher diagonals have different parameter counts")
        for (ka, ma), (kb, mb) in zip(ref, d.labels):
            if ma != mb or abs(ka[0] - kb[0]) > 1e-9 or abs(ka[1] - kb[1]) > 1e-9:
                raise ValueError("Fisher diagonals are on mismatched parameter lists")


def fi_fdd_raw(per_pupil: Sequence[FisherDiagonal]) -> FisherDiagonal:
    """Sum of the per-region informations on a shared parameter list."""
    if len(per_pupil) == 0:
        raise ValueError("need at least one per-region Fisher diagonal")
    _check_same_labels(per_pupil)
    total = np.sum([d.values for d in per_pupil], axis=0)
    entries = tuple(
        (k, mode, float(v)) for (k, mode), v in zip(per_pupil[0].labels, total)
    )
    return FisherDiagonal(entries=entries, a0=per_pupil[0].a0)


def fi_hybrid(raw: FisherDiagonal, di: FisherDiagonal, alpha: float) -> FisherDiagonal:
    """Hybrid split: alpha * FI_raw + (1 - alpha) * FI_DI."""
    if not (0 <= alpha <= 1):
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    _check_same_labels([raw, di])
    vals = alpha * raw.values + (1 - alpha) * di.values
    entries = tuple((k, mode, float(v)) for (k, mode), v in zip(raw.labels, vals))
    return FisherDiagonal(entries=entries, a0=raw.a0)


def crb(info: FisherDiagonal, n_photons: float) -> np.ndarray:
    """Per-parameter variance bound 1 / (N * FI); infinite where FI = 0."""
    if not (n_photons > 0):
        raise ValueError(f"n_photons must be positive, got {n_photons}")
    vals = info.values
    out = np.full(vals.shape, np.inf)
    nz = vals > 0
    out[nz] = 1.0 / (n_photons * vals[nz])
    return out


def _fi_quadrature(mean: np.ndarray, derivs: np.ndarray, n_photons: float, cell: float):
    """Poisson Fisher matrix sum_x d_i d_j / mean * cell / N.

    mean: flat array of the expected photon density; derivs: (n_params,
    n_points) derivative densities. The mean is floored at 1e-12 of its
    peak to keep the integrand finite at isolated zeros.
    """
    peak = mean.max()
    if peak <= 0:
        raise ValueError("mean image is nonpositive everywhere")
    floored = np.maximum(mean, 1e-12 * peak)
    weighted = derivs / floored[None, :]
    return (weighted @ derivs.T) * (cell / n_photons)


def fi_numeric(
    mean_image: RealField,
    derivs: Sequence[RealField],
    labels: Sequence[tuple[tuple[float, float], str]],
    n_photons: float,
) -> FisherMatrix:
    """Classical Fisher matrix per photon by direct quadrature:
    (1/N) sum_x (d mean/d theta_i)(d mean/d theta_j) / mean * dx^2.

    Exact for Poisson counts with the given mean; reduces to the analytic
    diagonal formulas when the mean image is uniform.
    """
    if len(derivs) != len(labels):
        raise ValueError("one derivative image per label required")
    if not (n_photons > 0):
        raise ValueError(f"n_photons must be positive, got {n_photons}")
    g = mean_image.grid
    for d in derivs:
        if d.grid.shape != g.shape or d.grid.dx != g.dx:
            raise ValueError("derivative images must share the mean image's grid")
    dmat = np.stack([d.values.ravel() for d in derivs])
    m = _fi_quadrature(mean_image.values.ravel(), dmat, n_photons, g.dx**2)
    return FisherMatrix(labels=tuple((tuple(k), mode) for k, mode in labels), matrix=m)
