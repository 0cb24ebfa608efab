"""Forward model: expected images through each pupil, hybrid photon
split, and Poisson shot-noise sampling into a six-frame acquisition.

Each acquisition frame l sees the mean image N_frame * IFT(beta_l fspec).
Because the region transfer functions are normalized by the full pupil
area, their DC values are the region area fractions, so handing every
region frame the same expected budget alpha*N automatically splits the
photons in proportion to region area (the five fractions sum to 1).

The displaced sub-images of a real acquisition are modeled as separate
frames; with the displacement layout guaranteeing disjoint footprints the
statistics are identical and no canvas bookkeeping leaks into the noise.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .fourier import RealField, SampleSpectrum, fft_forward, fft_inverse
from .optics import Otf, OtfSet, PupilPartition, compute_otf, hybrid_otfs

__all__ = [
    "AcquisitionConfig",
    "RawImageSet",
    "derive_rng",
    "mean_image",
    "poissonize",
    "acquire",
]


@dataclass(frozen=True)
class AcquisitionConfig:
    """Total expected photons, hybrid split, pupil partition, RNG seed,
    and optional Gaussian read noise (std in counts per pixel)."""

    n_photons: float
    alpha: float
    partition: PupilPartition
    seed: int
    read_noise_std: float = 0.0

    def __post_init__(self):
        if not (self.n_photons > 0):
            raise ValueError(f"n_photons must be positive, got {self.n_photons}")
        if not (0 <= self.alpha <= 1):
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in 64 bits")
        if self.read_noise_std < 0:
            raise ValueError("read_noise_std must be >= 0")


@dataclass(frozen=True)
class RawImageSet:
    """Six photon-count frames (index 0 = direct imaging, 1-5 = pupil
    regions), their recorded totals, and the configuration that made them.

    Frame values are counts per unit area; multiplying by the pixel area
    gives integer counts when read noise is off.
    """

    frames: tuple[RealField, ...]
    n_photons: tuple[float, ...]
    clipped_pixels: tuple[int, ...]
    config: AcquisitionConfig
    trial: int

    def __post_init__(self):
        if len(self.frames) != 6 or len(self.n_photons) != 6:
            raise ValueError("RawImageSet needs exactly 6 frames and totals")
        if self.config.read_noise_std == 0:
            for fld in self.frames:
                if fld.values.min() < 0:
                    raise ValueError("negative counts in a noise-free frame")

    @property
    def total_photons(self) -> float:
        return float(sum(self.n_photons))


def derive_rng(seed: int, frame: int, trial: int) -> np.random.Generator:
    """Independent, reproducible stream for (seed, frame, trial): parallel
    trials and frames never share RNG state."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(frame, trial)))
    )


def mean_image(sample, otf: Otf, n_expected: float) -> RealField:
    """Expected image N * IFT(beta * fspec).

    sample may be a SampleSpectrum (modes must lie within the cutoff) or a
    unit-integral RealField such as a test chart (frequencies beyond the
    cutoff are physically removed by beta).
    """
    if not (n_expected >= 0):
        raise ValueError(f"n_expected must be >= 0, got {n_expected}")
    grid = otf.grid
    if isinstance(sample, SampleSpectrum):
        for mode in sample.modes:
            if np.hypot(mode.k[0], mode.k[1]) > otf.k_c + 1e-9:
                raise ValueError(
                    f"sample mode at {tuple(mode.k)} lies beyond the cutoff {otf.k_c:.4g}"
                )
        spec = sample.spectrum(grid)
    elif isinstance(sample, RealField):
        if sample.grid.shape != grid.shape or sample.grid.dx != grid.dx:
            raise ValueError("sample field grid does not match the OTF grid")
        total = sample.integral()
        if abs(total - 1) > 1e-6:
            raise ValueError(f"sample field integral {total} != 1")
        spec = fft_forward(sample)
    else:
        raise TypeError(f"sample must be SampleSpectrum or RealField, got {type(sample)}")
    filtered = type(spec)(grid, n_expected * otf.values * spec.values)
    img = fft_inverse(filtered)
    if img.values.min() < -1e-9 * max(img.values.max(), 1e-300):
        warnings.warn(
            f"mean image dips negative (min {img.values.min():.3e}); "
            "the Poisson sampler will clip",
            stacklevel=2,
        )
    return img


def poissonize(mean: RealField, seed) -> tuple[RealField, int]:
    """Per-pixel independent Poisson counts with mean (density * pixel
    area), returned as counts per area, plus the number of negative-mean
    pixels that had to be clipped to zero.

    seed may be an integer or a Generator (for derived streams).
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(
        np.random.SeedSequence(seed)
    )
    cell = mean.grid.dx**2
    lam = mean.values * cell
    clipped = int((lam < 0).sum())
    counts = rng.poisson(np.maximum(lam, 0.0)).astype(float)
    return RealField(mean.grid, counts / cell), clipped


def acquire(
    sample,
    config: AcquisitionConfig,
    trial: int = 0,
    otfs: OtfSet | None = None,
) -> RawImageSet:
    """Simulate one hybrid acquisition: frame 0 through the full pupil at
    (1-alpha)N, frames 1-5 through the regions sharing alpha*N, all with
    independent shot noise.

    Pass a precomputed OtfSet (matching the partition) to skip recomputing
    pupil autocorrelations in Monte Carlo loops; only its di/regions
    entries are used, the alpha weighting is applied here.
    """
    if otfs is None:
        full = compute_otf(config.partition.parent)
        otfs = hybrid_otfs(config.partition, full, config.alpha)
    frames = []
    totals = []
    clipped = []
    budgets = [(1 - config.alpha) * config.n_photons] + [
        config.alpha * config.n_photons
    ] * 5
    per_frame_otfs = (otfs.di,) + otfs.regions
    for idx, (otf, budget) in enumerate(zip(per_frame_otfs, budgets)):
        rng = derive_rng(config.seed, idx, trial)
        mean = mean_image(sample, otf, budget)
        frame, nclip = poissonize(mean, rng)
        if config.read_noise_std > 0:
            noise = rng.normal(0.0, config.read_noise_std, size=frame.values.shape)
            frame = RealField(frame.grid, frame.values + noise / frame.grid.dx**2)
        frames.append(frame)
        totals.append(float(frame.values.sum() * frame.grid.dx**2))
        clipped.append(nclip)
    return RawImageSet(
        frames=tuple(frames),
        n_photons=tuple(totals),
        clipped_pixels=tuple(clipped),
        config=config,
        trial=trial,
    )
