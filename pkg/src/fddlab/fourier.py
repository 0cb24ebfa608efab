"""Discrete real-space and Fourier-space fields with a continuous-transform
normalization.

The forward transform is the DFT scaled by the pixel area (F = DFT(f) * dx^2)
and the inverse divides it back out, so discrete spectra approximate the
continuous pair

    F(k) = integral f(r) exp(-i k.r) d^2r,
    f(r) = (2 pi)^-2 integral F(k) exp(+i k.r) d^2k,

and Parseval holds as  sum |f|^2 dx^2 = sum |F|^2 dk^2 / (2 pi)^2  to rounding.
Spectral arrays are stored centered: bin (i, j) holds the frequency
((i - nx/2) dkx, (j - ny/2) dky). Axis 0 is x. Boundaries are periodic.

A normalized intensity field is parametrized by a mean level a0 = 1/A plus
cosine/sine coefficients on the nonredundant half-plane frequency lattice
(kx > 0, or kx = 0 and ky > 0):

    f(r) = a0 + sum_k [ a_k cos(k.r) + b_k sin(k.r) ],

equivalently F(k) = (a_k - i b_k) A / 2 at the +k bin.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "GridSpec",
    "RealField",
    "SpectralField",
    "SampleSpectrum",
    "Mode",
    "fft_forward",
    "fft_inverse",
    "analyze_spectrum",
    "synthesize_sample",
    "analyze_sample",
    "make_test_chart",
]


@dataclass(frozen=True)
class GridSpec:
    """Sampling geometry shared by a real field and its spectrum.

    nx, ny: pixel counts (even, >= 16). dx: pixel pitch; every length in the
    package is in the same unit as dx (the bundled chart generator and the
    command-line configs assume nanometers). The spectral pitch per axis is
    dk = 2 pi / (n dx).
    """

    nx: int
    ny: int
    dx: float

    def __post_init__(self):
        for name, n in (("nx", self.nx), ("ny", self.ny)):
            if int(n) != n or n < 16 or n % 2:
                raise ValueError(f"{name} must be an even integer >= 16, got {n}")
        if not (self.dx > 0 and np.isfinite(self.dx)):
            raise ValueError(f"dx must be positive and finite, got {self.dx}")

    @property
    def dkx(self) -> float:
        return 2 * np.pi / (self.nx * self.dx)

    @property
    def dky(self) -> float:
        return 2 * np.pi / (self.ny * self.dx)

    @property
    def area(self) -> float:
        return self.nx * self.ny * self.dx**2

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    def x_axes(self) -> tuple[np.ndarray, np.ndarray]:
        """Pixel-center coordinates along each axis, starting at 0."""
        return (np.arange(self.nx) * self.dx, np.arange(self.ny) * self.dx)

    def k_axes(self) -> tuple[np.ndarray, np.ndarray]:
        """Centered frequency bins per axis, k in [-n/2, n/2) * dk."""
        kx = (np.arange(self.nx) - self.nx // 2) * self.dkx
        ky = (np.arange(self.ny) - self.ny // 2) * self.dky
        return kx, ky

    def k_radius(self) -> np.ndarray:
        """|k| on the centered spectral grid."""
        kx, ky = self.k_axes()
        return np.hypot(kx[:, None], ky[None, :])

    def k_index(self, k: Sequence[float]) -> tuple[int, int]:
        """Centered-array index of an on-lattice frequency.

        Rejects frequencies farther than 1e-6 dk from the lattice.
        """
        fx = k[0] / self.dkx
        fy = k[1] / self.dky
        ix, iy = round(fx), round(fy)
        if abs(fx - ix) > 1e-6 or abs(fy - iy) > 1e-6:
            raise ValueError(f"frequency {tuple(k)} is off the grid lattice")
        if not (-self.nx // 2 <= ix < self.nx // 2 and -self.ny // 2 <= iy < self.ny // 2):
            raise ValueError(f"frequency {tuple(k)} outside the representable band")
        return ix + self.nx // 2, iy + self.ny // 2


def _check_grid_match(a: GridSpec, b: GridSpec, what: str):
    if a != b:
        raise ValueError(f"grid mismatch in {what}: {a} vs {b}")


@dataclass(frozen=True)
class RealField:
    """Real-valued field (intensity or photon density) on a grid."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", v)

    def integral(self) -> float:
        return float(self.values.sum() * self.grid.dx**2)


@dataclass(frozen=True)
class SpectralField:
    """Complex spectrum on the centered frequency grid."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("spectrum contains non-finite values")
        object.__setattr__(self, "values", v)

    def at(self, k: Sequence[float]) -> complex:
        ix, iy = self.grid.k_index(k)
        return complex(self.values[ix, iy])

    def dc(self) -> complex:
        return complex(self.values[self.grid.nx // 2, self.grid.ny // 2])


def fft_forward(fld: RealField) -> SpectralField:
    """Forward transform with continuous normalization (DFT * dx^2)."""
    F = np.fft.fftshift(np.fft.fft2(fld.values)) * fld.grid.dx**2
    return SpectralField(fld.grid, F)


def fft_inverse(spec: SpectralField) -> RealField:
    """Inverse of fft_forward. The imaginary residual must be negligible
    (Hermitian input); it is checked against 1e-10 of the field scale."""
    f = np.fft.ifft2(np.fft.ifftshift(spec.values)) / spec.grid.dx**2
    scale = np.abs(f.real).max() or 1.0
    if np.abs(f.imag).max() > 1e-10 * max(scale, 1.0 / spec.grid.area):
        raise ValueError("inverse transform is not real: spectrum lacks Hermitian symmetry")
    return RealField(spec.grid, f.real)


def hermitian_defect(spec: SpectralField) -> float:
    """max |F(-k) - conj F(k)| relative to max |F|.

    On an even grid the -n/2 row/column is its own conjugate partner.
    """
    v = np.fft.ifftshift(spec.values)
    mirrored = v[(-np.arange(spec.grid.nx)) % spec.grid.nx][
        :, (-np.arange(spec.grid.ny)) % spec.grid.ny
    ]
    denom = np.abs(v).max() or 1.0
    return float(np.abs(mirrored - np.conj(v)).max() / denom)


def analyze_spectrum(spec: SpectralField) -> "SampleSpectrum":
    """Half-plane cos/sin coefficients of a unit-integral spectrum.

    Rejects spectra that violate Hermitian symmetry (relative defect above
    1e-10) or whose DC bin is not 1 within 1e-6, i.e. fields not normalized
    to unit integral.
    """
    if hermitian_defect(spec) > 1e-10:
        raise ValueError("spectrum is not Hermitian: not the transform of a real field")
    g = spec.grid
    if abs(spec.dc() - 1.0) > 1e-6:
        raise ValueError(f"field integral is {spec.dc():.6g}, expected 1 within 1e-6")
    A = g.area
    a0 = 1.0 / A
    halfx = spec.values[g.nx // 2 + 1 :, :]
    a_arr = 2.0 / A * halfx.real
    b_arr = -2.0 / A * halfx.imag
    kx, ky = g.k_axes()
    tol = 1e-12 * a0
    modes = []
    keep = np.maximum(np.abs(a_arr), np.abs(b_arr)) > tol
    for i, j in np.argwhere(keep):
        modes.append(Mode((kx[g.nx // 2 + 1 + i], ky[j]), float(a_arr[i, j]), float(b_arr[i, j])))
    # kx = 0 half-line, ky > 0
    line = spec.values[g.nx // 2, g.ny // 2 + 1 :]
    a_l = 2.0 / A * line.real
    b_l = -2.0 / A * line.imag
    for (j,) in np.argwhere(np.maximum(np.abs(a_l), np.abs(b_l)) > tol):
        modes.append(Mode((0.0, ky[g.ny // 2 + 1 + j]), float(a_l[j]), float(b_l[j])))
    return SampleSpectrum(a0=a0, modes=tuple(modes))


@dataclass(frozen=True)
class Mode:
    """One half-plane Fourier mode: frequency k and cos/sin amplitudes."""

    k: tuple[float, float]
    a: float
    b: float


def _on_half_plane(k) -> bool:
    return k[0] > 0 or (k[0] == 0 and k[1] > 0)


@dataclass(frozen=True)
class SampleSpectrum:
    """Truth parametrization {a0, a_k, b_k} on the half-plane lattice."""

    a0: float
    modes: tuple[Mode, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not (self.a0 > 0 and np.isfinite(self.a0)):
            raise ValueError(f"a0 must be positive, got {self.a0}")
        seen = set()
        for m in self.modes:
            if not _on_half_plane(m.k):
                raise ValueError(f"mode k={m.k} is not on the half-plane lattice")
            key = (round(m.k[0], 12), round(m.k[1], 12))
            if key in seen:
                raise ValueError(f"duplicate mode at k={m.k}")
            seen.add(key)

    def spectrum(self, grid: GridSpec) -> SpectralField:
        """The spectrum F(k) on `grid`: A a0 at DC, (a - i b) A/2 at each +k."""
        if abs(self.a0 * grid.area - 1.0) > 1e-9:
            raise ValueError("a0 is inconsistent with the grid area (a0 must be 1/A)")
        A = grid.area
        F = np.zeros(grid.shape, dtype=complex)
        F[grid.nx // 2, grid.ny // 2] = self.a0 * A
        for m in self.modes:
            ix, iy = grid.k_index(m.k)
            c = (m.a - 1j * m.b) * A / 2
            F[ix, iy] += c
            jx, jy = grid.k_index((-m.k[0], -m.k[1]))
            F[jx, jy] += np.conj(c)
        return SpectralField(grid, F)


def synthesize_sample(spec: SampleSpectrum, grid: GridSpec) -> RealField:
    """Evaluate f(r) = a0 + sum a_k cos(k.r) + b_k sin(k.r) on the grid.

    Off-lattice frequencies are rejected. A negative-going field (possible
    for adversarial coefficient sets) is NOT clipped here; downstream Poisson
    sampling clips, analysis never does.
    """
    fld = fft_inverse(spec.spectrum(grid))
    if fld.values.min() < -1e-9 * spec.a0:
        warnings.warn(
            f"synthesized field goes negative (min {fld.values.min():.3e}); "
            "analysis stays linear, only Poisson sampling will clip",
            stacklevel=2,
        )
    return fld


def analyze_sample(fld: RealField) -> SampleSpectrum:
    """Inverse of synthesize_sample for band-limited, unit-integral fields:
    a_k = (2/A) Re F(k), b_k = -(2/A) Im F(k) on the half plane."""
    if abs(fld.integral() - 1.0) > 1e-6:
        raise ValueError(f"field integral is {fld.integral():.6g}, expected 1 within 1e-6")
    return analyze_spectrum(fft_forward(fld))


def make_test_chart(
    lines_per_mm: float,
    n_lines: int,
    grid: GridSpec,
    orientation: str = "x",
) -> RealField:
    """Resolution-chart quintuplet: n_lines parallel bright bars on a dark
    background, 50% duty cycle at the given spatial frequency, normalized to
    unit integral. Grid lengths are taken as nanometers (pitch in nm is
    1e6 / lines_per_mm). orientation "x" modulates along x, "y" along y.

    With n_lines = 0 the chart is the uniform background. The background is
    10% of the bar level so the zero-line chart stays normalizable.
    """
    if orientation not in ("x", "y"):
        raise ValueError(f"orientation must be 'x' or 'y', got {orientation!r}")
    if n_lines < 0:
        raise ValueError("n_lines must be >= 0")
    if lines_per_mm <= 0:
        raise ValueError("lines_per_mm must be positive")
    pitch = 1e6 / lines_per_mm  # nm
    if 2 * np.pi / pitch >= np.pi / grid.dx:
        raise ValueError(
            f"chart frequency {lines_per_mm}/mm is at or above the grid Nyquist "
            f"({1e6 / (2 * grid.dx):.0f}/mm)"
        )
    n_mod = grid.nx if orientation == "x" else grid.ny
    n_perp = grid.ny if orientation == "x" else grid.nx
    u = (np.arange(n_mod) - n_mod / 2 + 0.5) * grid.dx
    bars = np.zeros(n_mod)
    if n_lines > 0:
        # bars centered on the field: bar centers at (i - (n-1)/2) * pitch
        for i in range(n_lines):
            c = (i - (n_lines - 1) / 2) * pitch
            bars += ((u >= c - pitch / 4) & (u < c + pitch / 4)).astype(float)
        bars = np.minimum(bars, 1.0)
    # bars extend over the central 60% of the transverse direction
    v = np.arange(n_perp) - n_perp / 2 + 0.5
    stripe = (np.abs(v) <= 0.3 * n_perp).astype(float)
    base = 0.1
    if orientation == "x":
        img = base + bars[:, None] * stripe[None, :]
    else:
        img = base + bars[None, :] * stripe[:, None]
    img /= img.sum() * grid.dx**2
    return RealField(grid, img)
