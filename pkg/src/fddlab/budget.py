"""Minimum photon budgets for resolving a target frequency, and the
inversion to achievable resolution at a given budget.

A frequency k counts as resolved when the estimated mode amplitudes reach
an SNR threshold gamma for a sample of coefficient of variation cv. That
converts the per-photon information into a minimum photon number per
Airy-disk area:

    n_min = (8 * 0.61^2 * pi^2 * gamma^2 / cv^2) * max over k_i <= k of
            1 / S(k_i)

with S = beta^2 for direct imaging and S = (1-alpha) beta^2 +
alpha sum_l beta_l^2 / beta_l(0) for the hybrid split. The max runs over
the frequencies up to the target because every coarser detail must also
clear the threshold. For the split method the budget is minimized over an
(alpha, k_a) grid, recomputing the partition OTFs per k_a.

The max is evaluated on the positive kx axis profile: all five-region
geometries here are symmetric under 90-degree rotation and the axis cuts
through the bowtie region responsible for the high-frequency behavior, so
the axis is the representative direction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fourier import GridSpec
from .optics import OpticsSpec, Otf, compute_otf, default_grid, make_circular_pupil, partition_fdd

__all__ = [
    "BudgetParams",
    "BudgetCurve",
    "budget_constant",
    "airy_area",
    "n_min_di",
    "n_min_fdd",
    "budget_curves",
    "resolution_for_budget",
]

_DEFAULT_ALPHA = tuple(round(0.05 * i, 2) for i in range(21))
_DEFAULT_KA = tuple(round(0.3 + 0.05 * i, 2) for i in range(14))
_DEFAULT_TARGETS = tuple(round(0.30 + 0.01 * i, 2) for i in range(70))


@dataclass(frozen=True)
class BudgetParams:
    """cv: sample coefficient of variation std(f)/a0; snr_threshold: the
    detection threshold gamma; grids for the split search and the target
    frequencies (as fractions of the cutoff)."""

    cv: float = 0.4
    snr_threshold: float = 3.0
    alpha_grid: tuple = _DEFAULT_ALPHA
    ka_grid: tuple = _DEFAULT_KA
    target_k_ratios: tuple = _DEFAULT_TARGETS

    def __post_init__(self):
        if not (self.cv > 0):
            raise ValueError(f"cv must be positive, got {self.cv}")
        if not (self.snr_threshold > 0):
            raise ValueError(f"snr_threshold must be positive, got {self.snr_threshold}")
        for name, grid in (
            ("alpha_grid", self.alpha_grid),
            ("ka_grid", self.ka_grid),
            ("target_k_ratios", self.target_k_ratios),
        ):
            if len(grid) == 0:
                raise ValueError(f"{name} is empty")
        if any(not (0 <= a <= 1) for a in self.alpha_grid):
            raise ValueError("alpha_grid values must be in [0, 1]")
        for name, grid in (("ka_grid", self.ka_grid), ("target_k_ratios", self.target_k_ratios)):
            if any(not (0 < v < 1) for v in grid):
                raise ValueError(f"{name} values must be in (0, 1)")


@dataclass(frozen=True)
class BudgetCurve:
    """(resolution, n_min) points in order of increasing target frequency,
    with the achieving (alpha, k_a) for the split method (None for DI)."""

    method: str
    points: tuple

    def __post_init__(self):
        if self.method not in ("di", "fdd"):
            raise ValueError(f"method must be 'di' or 'fdd', got {self.method!r}")
        budgets = [p[1] for p in self.points]
        if any(b2 < b1 * (1 - 1e-12) for b1, b2 in zip(budgets, budgets[1:])):
            raise ValueError("budget must be non-decreasing toward finer resolution")

    @property
    def resolutions(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def budgets(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])


def budget_constant(params: BudgetParams) -> float:
    return 8 * 0.61**2 * math.pi**2 * params.snr_threshold**2 / params.cv**2


def airy_area(optics: OpticsSpec) -> float:
    """pi (0.61 lambda / NA)^2, the photon-count normalization area."""
    r = 0.61 * optics.wavelength / optics.numerical_aperture
    return math.pi * r * r


def _axis_with_dc(otf: Otf) -> np.ndarray:
    """beta along the positive kx axis prefixed with the k = 0 bin."""
    _, vals = otf.axis_profile("x")
    return np.concatenate(([otf.dc_value], vals))


def _bins_upto(k: float, dk: float) -> int:
    """Number of positive axis bins with k_i <= k (the k = 0 bin is always
    included separately)."""
    return int(math.floor(k / dk + 1e-9))


def n_min_di(k: float, params: BudgetParams, otf_di: Otf) -> float:
    """Direct-imaging budget: C * max over 0 <= k_i <= k of 1/beta(k_i)^2."""
    if k >= otf_di.k_c:
        warnings.warn(f"target {k:.4g} is at or beyond the cutoff: unreachable", stacklevel=2)
        return math.inf
    if k <= 0:
        raise ValueError(f"target frequency must be positive, got {k}")
    prof = _axis_with_dc(otf_di)
    j = min(_bins_upto(k, otf_di.grid.dkx), len(prof) - 1)
    s = prof[: j + 1] ** 2
    smin = s.min()
    if smin <= 0:
        warnings.warn(f"transfer function vanishes below {k:.4g}: unreachable", stacklevel=2)
        return math.inf
    return budget_constant(params) / smin


@lru_cache(maxsize=8)
def _fdd_tables(params: BudgetParams, optics: OpticsSpec, grid: GridSpec):
    """Per-(k_a, alpha) prefix minima of the hybrid spectral weight S along
    the axis, shared by both budget directions."""
    pupil = make_circular_pupil(optics, grid)
    di = compute_otf(pupil)
    u = _axis_with_dc(di) ** 2
    nbins = len(u)
    alphas = np.array(params.alpha_grid)
    prefmin = np.empty((len(params.ka_grid), len(alphas), nbins))
    for i, ka in enumerate(params.ka_grid):
        part = partition_fdd(pupil, ka)
        v = np.zeros(nbins)
        for mask in part.masks:
            if mask.pixel_count == 0:
                continue
            prof = _axis_with_dc(compute_otf(mask))
            v += prof**2 / prof[0]
        s = (1 - alphas)[:, None] * u[None, :] + alphas[:, None] * v[None, :]
        prefmin[i] = np.minimum.accumulate(s, axis=1)
    return di, prefmin


def n_min_fdd(
    k: float,
    params: BudgetParams,
    optics: OpticsSpec,
    grid: GridSpec | None = None,
) -> tuple[float, float, float]:
    """Split-method budget minimized over the (alpha, k_a) grid; returns
    (n_min, alpha_star, ka_star). Ties go to smaller alpha, then smaller
    k_a."""
    if grid is None:
        grid = default_grid(optics)
    if k >= optics.k_c:
        warnings.warn(f"target {k:.4g} is at or beyond the cutoff: unreachable", stacklevel=2)
        return math.inf, math.nan, math.nan
    if k <= 0:
        raise ValueError(f"target frequency must be positive, got {k}")
    di, prefmin = _fdd_tables(params, optics, grid)
    j = min(_bins_upto(k, grid.dkx), prefmin.shape[2] - 1)
    c = budget_constant(params)
    best = (math.inf, math.nan, math.nan)
    for ia, alpha in enumerate(params.alpha_grid):
        for ik, ka in enumerate(params.ka_grid):
            s = prefmin[ik, ia, j]
            val = c / s if s > 0 else math.inf
            if val < best[0] * (1 - 1e-12):
                best = (val, alpha, ka)
    return best


def budget_curves(
    params: BudgetParams,
    optics: OpticsSpec,
    grid: GridSpec | None = None,
) -> tuple[BudgetCurve, BudgetCurve]:
    """(direct-imaging curve, split curve) over the target frequency grid."""
    if grid is None:
        grid = default_grid(optics)
    di, _ = _fdd_tables(params, optics, grid)
    pts_di, pts_fdd = [], []
    for ratio in params.target_k_ratios:
        k = ratio * optics.k_c
        res = 2 * math.pi / k
        pts_di.append((res, n_min_di(k, params, di), None, None))
        val, a, ka = n_min_fdd(k, params, optics, grid)
        pts_fdd.append((res, val, a, ka))
    return (
        BudgetCurve(method="di", points=tuple(pts_di)),
        BudgetCurve(method="fdd", points=tuple(pts_fdd)),
    )


def resolution_for_budget(
    n: float,
    method: str,
    params: BudgetParams,
    optics: OpticsSpec,
    grid: GridSpec | None = None,
    curve: BudgetCurve | None = None,
) -> float:
    """Finest resolution 2 pi / k whose budget curve stays within n photons
    per Airy-disk area (monotone inversion of the curve)."""
    if curve is None:
        curves = budget_curves(params, optics, grid)
        curve = curves[0] if method == "di" else curves[1]
    elif curve.method != method:
        raise ValueError(f"curve is for {curve.method!r}, not {method!r}")
    budgets = curve.budgets
    if n < budgets[0]:
        raise ValueError(
            f"budget {n:.4g} is below the coarsest-target floor {budgets[0]:.4g}: "
            "no frequency resolvable"
        )
    j = int(np.searchsorted(budgets, n, side="right")) - 1
    return float(curve.resolutions[j])
