"""Circular pupils, the five-region FDD partition, and OTFs by pupil
autocorrelation.

The incoherent OTF of a pupil region is the autocorrelation of its
transmission indicator. All OTFs here are normalized by the FULL pupil's
pixel count, so the full pupil has beta(0) = 1 and a region has
beta_l(0) = its pixel-area fraction; the five region fractions sum to 1
exactly by construction.

Partition geometry: region 1 is the central disk of diameter k_a; regions
2..5 each pair two opposite 45-degree wedges of the remaining annulus
(point-symmetric bowties, assigned by the angle folded to [0, pi)). The
point symmetry matters: it is what lets a region's autocorrelation stay
close to the full-pupil OTF along that region's axis out to the cutoff.
Region 2 straddles the +-kx axis, region 3 the +-ky axis, regions 4 and 5
the two diagonals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fourier import GridSpec, RealField, SpectralField, fft_forward

__all__ = [
    "OpticsSpec",
    "PupilMask",
    "PupilPartition",
    "Otf",
    "OtfSet",
    "default_grid",
    "make_circular_pupil",
    "partition_fdd",
    "compute_otf",
    "compute_psf",
    "hybrid_otfs",
    "chat_otf",
]

# first zero of the Bessel function J1; Airy radius = 2 * J1_ZERO / k_c = 0.61 lambda / NA
_J1_ZERO = 3.8317059702075125


@dataclass(frozen=True)
class OpticsSpec:
    """Wavelength and numerical aperture; cutoff k_c = 4 pi NA / lambda."""

    wavelength: float
    numerical_aperture: float

    def __post_init__(self):
        if not (self.wavelength > 0):
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if not (0 < self.numerical_aperture <= 1.6):
            raise ValueError(
                f"numerical_aperture must be in (0, 1.6], got {self.numerical_aperture}"
            )

    @property
    def k_c(self) -> float:
        return 4 * np.pi * self.numerical_aperture / self.wavelength

    @property
    def airy_radius(self) -> float:
        """First zero of the intensity point-spread function, 0.61 lambda/NA."""
        return 2 * _J1_ZERO / self.k_c


@dataclass(frozen=True)
class PupilMask:
    """Boolean aperture support on the spectral grid.

    norm_pixels is the pixel count that normalizes this mask's
    autocorrelation; for a full pupil it is its own count, for a partition
    region it is the parent pupil's count (so region OTFs report absolute
    area fractions at k = 0).
    """

    grid: GridSpec
    support: np.ndarray
    k_c: float
    norm_pixels: int

    def __post_init__(self):
        s = np.asarray(self.support, dtype=bool)
        if s.shape != self.grid.shape:
            raise ValueError(f"support shape {s.shape} != grid shape {self.grid.shape}")
        object.__setattr__(self, "support", s)
        if self.norm_pixels <= 0:
            raise ValueError("norm_pixels must be positive")
        if self.k_c <= 0:
            raise ValueError("k_c must be positive")

    @property
    def pixel_count(self) -> int:
        return int(self.support.sum())


@dataclass(frozen=True)
class Otf:
    """Real nonnegative transfer function beta(k) on the centered grid."""

    grid: GridSpec
    values: np.ndarray
    k_c: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} != grid shape {self.grid.shape}")
        if v.min() < 0:
            raise ValueError("OTF has negative values")
        object.__setattr__(self, "values", v)

    @property
    def dc_value(self) -> float:
        return float(self.values[self.grid.nx // 2, self.grid.ny // 2])

    def at(self, k) -> float:
        """Value at the nearest grid bin to frequency k."""
        g = self.grid
        ix = int(round(k[0] / g.dkx)) + g.nx // 2
        iy = int(round(k[1] / g.dky)) + g.ny // 2
        if not (0 <= ix < g.nx and 0 <= iy < g.ny):
            return 0.0
        return float(self.values[ix, iy])

    def axis_profile(self, axis: str = "x") -> tuple[np.ndarray, np.ndarray]:
        """(k, beta) along the positive kx (or ky) axis, k > 0 up to the edge."""
        g = self.grid
        if axis == "x":
            ks = np.arange(1, g.nx // 2) * g.dkx
            vals = self.values[g.nx // 2 + 1 :, g.ny // 2]
        elif axis == "y":
            ks = np.arange(1, g.ny // 2) * g.dky
            vals = self.values[g.nx // 2, g.ny // 2 + 1 :]
        else:
            raise ValueError("axis must be 'x' or 'y'")
        return ks, vals.copy()

    def scaled(self, factor: float) -> "Otf":
        return Otf(self.grid, self.values * factor, self.k_c)


@dataclass(frozen=True)
class PupilPartition:
    """Full pupil plus five disjoint regions tiling it, with per-region
    image displacements (region 1 central, 2..5 on a cross layout)."""

    parent: PupilMask
    inner_radius_ratio: float
    regions: tuple[tuple[PupilMask, tuple[float, float]], ...]

    def __post_init__(self):
        if not (0 < self.inner_radius_ratio < 1):
            raise ValueError(
                f"inner_radius_ratio must be in (0, 1), got {self.inner_radius_ratio}"
            )
        if len(self.regions) != 5:
            raise ValueError(f"expected 5 regions, got {len(self.regions)}")
        total = np.zeros(self.parent.grid.shape, dtype=int)
        for mask, _ in self.regions:
            total += mask.support.astype(int)
        if not np.array_equal(total > 0, self.parent.support) or total.max() > 1:
            raise ValueError("regions must tile the parent pupil exactly")

    @property
    def masks(self) -> tuple[PupilMask, ...]:
        return tuple(m for m, _ in self.regions)

    @property
    def displacements(self) -> tuple[tuple[float, float], ...]:
        return tuple(d for _, d in self.regions)


@dataclass(frozen=True)
class OtfSet:
    """OTFs of a hybrid acquisition: direct-imaging OTF, the five region
    OTFs, and the photon-split weighted versions
    beta^H_0 = (1-alpha) beta^DI, beta^H_l = alpha beta_l."""

    di: Otf
    regions: tuple[Otf, ...]
    alpha: float
    hybrid: tuple[Otf, ...]

    def __post_init__(self):
        if len(self.regions) != 5 or len(self.hybrid) != 6:
            raise ValueError("OtfSet needs 5 region OTFs and 6 hybrid OTFs")

    @property
    def k_c(self) -> float:
        return self.di.k_c

    def hybrid_dc(self) -> np.ndarray:
        return np.array([h.dc_value for h in self.hybrid])


def default_grid(optics: OpticsSpec, n: int = 256) -> GridSpec:
    """Square grid with the pixel pitch set so k_c dx = 0.8 pi: the OTF band
    is comfortably inside the representable frequencies and the Airy rings
    are resolved."""
    return GridSpec(nx=n, ny=n, dx=0.8 * np.pi / optics.k_c)


def make_circular_pupil(optics: OpticsSpec, grid: GridSpec) -> PupilMask:
    """Top-hat disk of radius k_c/2 at the spectral origin.

    The grid must resolve the OTF it generates: the autocorrelation extends
    to |k| = k_c, so the per-axis half-band pi/dx must be >= k_c.
    """
    k_c = optics.k_c
    nyq = np.pi / grid.dx
    if nyq < k_c:
        raise ValueError(
            f"grid too small for the pupil: half-band {nyq:.4g} < k_c {k_c:.4g}; "
            f"need dx <= {np.pi / k_c:.4g}"
        )
    support = grid.k_radius() <= k_c / 2
    count = int(support.sum())
    if count == 0:
        raise ValueError("pupil support is empty on this grid")
    return PupilMask(grid, support, k_c, count)


def partition_fdd(
    pupil: PupilMask,
    k_a_ratio: float,
    image_canvas: GridSpec | None = None,
) -> PupilPartition:
    """Split a full pupil into the central disk (diameter k_a) plus four
    bowtie regions of the annulus, and assign cross-layout displacements.

    Displacement magnitude D = object footprint + 2 Airy radii; the canvas
    (if given) must hold the five displaced sub-images without overlap,
    i.e. be at least 3*footprint + 6*airy on each axis. With no canvas a
    minimal valid one is implied.
    """
    if not (0 < k_a_ratio < 1):
        raise ValueError(f"k_a_ratio must be in (0, 1), got {k_a_ratio}")
    grid = pupil.grid
    k_a = k_a_ratio * pupil.k_c
    r = grid.k_radius()
    inner = pupil.support & (r <= k_a / 2)
    annulus = pupil.support & ~inner
    kx, ky = grid.k_axes()
    phi = np.mod(np.arctan2(ky[None, :], kx[:, None]), np.pi)
    w = np.pi / 8
    wedges = [
        annulus & ((phi < w) | (phi >= 7 * w)),   # region 2: +-kx bowtie
        annulus & (phi >= 3 * w) & (phi < 5 * w),  # region 3: +-ky bowtie
        annulus & (phi >= w) & (phi < 3 * w),      # region 4: +45 deg bowtie
        annulus & (phi >= 5 * w) & (phi < 7 * w),  # region 5: -45 deg bowtie
    ]
    airy = 2 * _J1_ZERO / pupil.k_c
    foot_x = grid.nx * grid.dx
    foot_y = grid.ny * grid.dx
    D_x = foot_x + 2 * airy
    D_y = foot_y + 2 * airy
    if image_canvas is not None:
        need_x = 3 * foot_x + 6 * airy
        need_y = 3 * foot_y + 6 * airy
        have_x = image_canvas.nx * image_canvas.dx
        have_y = image_canvas.ny * image_canvas.dx
        if have_x < need_x or have_y < need_y:
            raise ValueError(
                f"canvas {have_x:.4g} x {have_y:.4g} cannot hold 5 disjoint displaced "
                f"images; need at least {need_x:.4g} x {need_y:.4g}"
            )
    displacements = [
        (0.0, 0.0),
        (+D_x, 0.0),
        (0.0, +D_y),
        (-D_x, 0.0),
        (0.0, -D_y),
    ]
    norm = pupil.norm_pixels
    masks = [PupilMask(grid, inner, pupil.k_c, norm)]
    masks += [PupilMask(grid, wm, pupil.k_c, norm) for wm in wedges]
    regions = tuple((m, d) for m, d in zip(masks, displacements))
    return PupilPartition(parent=pupil, inner_radius_ratio=k_a_ratio, regions=regions)


def compute_otf(mask: PupilMask) -> Otf:
    """Autocorrelation of the support indicator, normalized by norm_pixels.

    The correlation is computed through the transform pair and rounded back
    to the exact integer pair counts, so the result is identical to a direct
    integer correlation: beta values are (pixel-pair count)/norm exactly,
    symmetric under k -> -k, and zero beyond k_c.
    """
    if mask.pixel_count == 0:
        raise ValueError("cannot compute the OTF of an empty mask")
    ind = np.fft.ifftshift(mask.support.astype(float))
    corr = np.fft.ifft2(np.abs(np.fft.fft2(ind)) ** 2).real
    counts = np.fft.fftshift(np.round(corr))
    return Otf(mask.grid, counts / mask.norm_pixels, mask.k_c)


def compute_psf(mask: PupilMask) -> RealField:
    """Intensity point-spread function |IFT(pupil)|^2, unit integral.

    For a full circular pupil this is the Airy pattern with first zero at
    0.61 lambda / NA. Its forward transform reproduces the OTF of
    compute_otf to transform accuracy.
    """
    amp = np.fft.ifft2(np.fft.ifftshift(mask.support.astype(float)))
    psf = np.abs(np.fft.fftshift(amp)) ** 2
    psf /= psf.sum() * mask.grid.dx**2
    return RealField(mask.grid, psf)


def hybrid_otfs(partition: PupilPartition, full: Otf, alpha: float) -> OtfSet:
    """Photon-split OTF set: a fraction alpha of the budget goes through the
    five regions, 1 - alpha through the plain pupil."""
    if not (0 <= alpha <= 1):
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    # a region emptied by an extreme k_a contributes a zero OTF, not an error
    region_otfs = tuple(
        compute_otf(m)
        if m.pixel_count
        else Otf(m.grid, np.zeros(m.grid.shape), m.k_c)
        for m in partition.masks
    )
    hybrid = (full.scaled(1 - alpha),) + tuple(o.scaled(alpha) for o in region_otfs)
    return OtfSet(di=full, regions=region_otfs, alpha=alpha, hybrid=hybrid)


def chat_otf(grid: GridSpec, k_c: float) -> Otf:
    """Closed-form OTF of an ideal circular pupil: the chat function
    (2/pi)(arccos rho - rho sqrt(1 - rho^2)), rho = |k|/k_c. Useful as an
    analytic reference independent of pixelized pupils."""
    rho = grid.k_radius() / k_c
    vals = np.zeros(grid.shape)
    inside = rho < 1
    ri = rho[inside]
    vals[inside] = (2 / np.pi) * (np.arccos(ri) - ri * np.sqrt(1 - ri * ri))
    return Otf(grid, vals, k_c)


def psf_otf_roundtrip_defect(mask: PupilMask) -> float:
    """max ||FT(PSF)| - beta| over the grid; a consistency diagnostic.

    The magnitude discards the linear phase from the centered PSF; the
    comparison is exact because pupil autocorrelations are nonnegative.
    """
    beta = compute_otf(mask)
    scaled = beta.values / beta.dc_value if beta.dc_value else beta.values
    spec = fft_forward(compute_psf(mask))
    return float(np.abs(np.abs(spec.values) - scaled).max())
