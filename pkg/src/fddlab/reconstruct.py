"""Multi-frame Wiener fusion of an acquisition, single-frame Wiener
deconvolution, Fourier-amplitude estimators, and spectral SNR metrics.

The fused spectrum is g_fdd(k) = sum_l C_l(k) g_l(k) with

    C_l = (beta_l / beta_l(0)) / (sum_m beta_m^2 / beta_m(0) + eps(k)),

the mean-squared-error-optimal linear weights for shot-noise-limited
frames (per-frame noise power equals the frame's photon total). The
regularizer is signal-adaptive: eps(k) = N / |signal spectrum|^2, with the
signal spectrum bootstrapped from the data itself, first as the magnitude
sum of the frames and then from the previous fused estimate. Single-frame
deconvolution is the same machinery with one frame, where the weight
reduces to the conventional beta / (beta^2 + eps).

The fused spectrum divided by N is an estimate of the sample spectrum, so
amplitude estimators read off as a_k = (a0/N)(g(k) + g(-k)) and
b_k = (a0/N) i (g(k) - g(-k)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fourier import RealField, SpectralField, fft_forward, fft_inverse
from .optics import Otf, OtfSet
from .simulate import RawImageSet

__all__ = [
    "ReconstructionConfig",
    "WienerWeights",
    "ReconstructionResult",
    "SnrReport",
    "fdd_weights",
    "reconstruct_fdd",
    "reconstruct_di_dcv",
    "estimate_fourier_params",
    "snr_at_k",
    "snr_gain_theory",
]


@dataclass(frozen=True)
class ReconstructionConfig:
    """iterations: passes of the signal-adaptive regularizer (the first
    pass uses the magnitude-sum initializer); epsilon_floor: relative floor
    for eps in units of the measured photon total, also the constant value
    in 'fixed' mode; band_limit: zero the fused spectrum beyond the cutoff
    (it already vanishes there up to rounding, the flag makes it exact);
    epsilon_mode: 'iterative' (signal-adaptive) or 'fixed' (constant eps,
    for bias-free comparisons against variance bounds)."""

    iterations: int = 3
    epsilon_floor: float = 1e-12
    band_limit: bool = True
    epsilon_mode: str = "iterative"

    def __post_init__(self):
        if not (1 <= self.iterations <= 20):
            raise ValueError(f"iterations must be in [1, 20], got {self.iterations}")
        if self.epsilon_floor < 0:
            raise ValueError("epsilon_floor must be >= 0")
        if self.epsilon_mode not in ("iterative", "fixed"):
            raise ValueError(
                f"epsilon_mode must be 'iterative' or 'fixed', got {self.epsilon_mode!r}"
            )


@dataclass(frozen=True)
class WienerWeights:
    """Per-frame spectral weights C_l(k) and the regularizer they used."""

    weights: tuple[np.ndarray, ...]
    epsilon: np.ndarray

    def __post_init__(self):
        for w in self.weights:
            if not np.all(np.isfinite(w)):
                raise ValueError("non-finite Wiener weight")
        if not np.all(np.isfinite(self.epsilon)):
            raise ValueError("non-finite regularizer")


@dataclass(frozen=True)
class ReconstructionResult:
    spectrum: SpectralField
    image: RealField
    weights: WienerWeights
    epsilons: tuple[np.ndarray, ...]
    n_photons: float
    floor_events: int


def _weight_arrays(betas, dcs, epsilon):
    """Weights for frames given their transfer arrays and DC values; frames
    with zero DC (no photons) get zero weight everywhere."""
    denom = epsilon.astype(float).copy()
    for b, dc in zip(betas, dcs):
        if dc > 0:
            denom = denom + b * b / dc
    if np.any(denom <= 0):
        raise ValueError(
            "zero denominator in Wiener weights: supply a positive epsilon "
            "(the transfer functions vanish somewhere, e.g. beyond the cutoff)"
        )
    out = []
    for b, dc in zip(betas, dcs):
        if dc > 0:
            out.append((b / dc) / denom)
        else:
            out.append(np.zeros_like(denom))
    return tuple(out)


def fdd_weights(otfs: OtfSet, epsilon: np.ndarray) -> WienerWeights:
    """MSE-optimal fusion weights for the six hybrid frames at the given
    regularizer (validated against the normal equations in tests)."""
    epsilon = np.asarray(epsilon, dtype=float)
    grid = otfs.di.grid
    if epsilon.shape != grid.shape:
        raise ValueError(f"epsilon shape {epsilon.shape} != grid shape {grid.shape}")
    if epsilon.min() < 0:
        raise ValueError("epsilon must be >= 0")
    betas = [h.values for h in otfs.hybrid]
    dcs = [h.dc_value for h in otfs.hybrid]
    return WienerWeights(weights=_weight_arrays(betas, dcs, epsilon), epsilon=epsilon)


def _repair_epsilon(eps: np.ndarray, floor: float) -> tuple[np.ndarray, int]:
    bad = ~np.isfinite(eps)
    out = np.where(bad, floor, eps)
    out = np.maximum(out, floor)
    return out, int(bad.sum())


def _wiener_core(grid, spectra, betas, dcs, cfg: ReconstructionConfig, k_c: float):
    n_measured = float(sum(s[grid.nx // 2, grid.ny // 2].real for s in spectra))
    floor = cfg.epsilon_floor * max(n_measured, 1.0)
    events = 0
    snapshots = []

    def fuse(eps):
        w = _weight_arrays(betas, dcs, eps)
        acc = np.zeros(grid.shape, dtype=complex)
        for wl, sl in zip(w, spectra):
            acc += wl * sl
        return w, acc

    if cfg.epsilon_mode == "fixed":
        eps = np.full(grid.shape, max(floor, cfg.epsilon_floor))
        snapshots.append(eps)
        weights, fused = fuse(eps)
    else:
        mag = np.zeros(grid.shape)
        for s in spectra:
            mag += np.abs(s)
        with np.errstate(divide="ignore", invalid="ignore"):
            eps = n_measured / mag**2
        eps, n_bad = _repair_epsilon(eps, floor)
        events += n_bad
        snapshots.append(eps)
        weights, fused = fuse(eps)
        for _ in range(cfg.iterations - 1):
            with np.errstate(divide="ignore", invalid="ignore"):
                eps = n_measured / np.abs(fused) ** 2
            eps, n_bad = _repair_epsilon(eps, floor)
            events += n_bad
            snapshots.append(eps)
            weights, fused = fuse(eps)

    if cfg.band_limit:
        fused = np.where(grid.k_radius() <= k_c, fused, 0.0)
    spectrum = SpectralField(grid, fused)
    image = fft_inverse(spectrum)
    return ReconstructionResult(
        spectrum=spectrum,
        image=image,
        weights=WienerWeights(weights=weights, epsilon=snapshots[-1]),
        epsilons=tuple(snapshots),
        n_photons=n_measured,
        floor_events=events,
    )


def reconstruct_fdd(
    raw: RawImageSet, otfs: OtfSet, cfg: ReconstructionConfig = ReconstructionConfig()
) -> ReconstructionResult:
    """Fuse the six frames of an acquisition into one spectrum/image."""
    grid = otfs.di.grid
    for f in raw.frames:
        if f.grid.shape != grid.shape or f.grid.dx != grid.dx:
            raise ValueError("frame grid does not match the OTF grid")
    spectra = [fft_forward(f).values for f in raw.frames]
    betas = [h.values for h in otfs.hybrid]
    dcs = [h.dc_value for h in otfs.hybrid]
    return _wiener_core(grid, spectra, betas, dcs, cfg, otfs.k_c)


def reconstruct_di_dcv(
    di_frame: RealField, otf_di: Otf, cfg: ReconstructionConfig = ReconstructionConfig()
) -> ReconstructionResult:
    """Conventional Wiener deconvolution of a single full-pupil frame; the
    same code path as the fusion, so the alpha = 0 acquisition reduces to
    this bit-for-bit."""
    grid = otf_di.grid
    if di_frame.grid.shape != grid.shape or di_frame.grid.dx != grid.dx:
        raise ValueError("frame grid does not match the OTF grid")
    spectra = [fft_forward(di_frame).values]
    return _wiener_core(
        grid, spectra, [otf_di.values], [otf_di.dc_value], cfg, otf_di.k_c
    )


def estimate_fourier_params(
    result: ReconstructionResult, a0: float, n_photons: float, k_list
) -> list[tuple[tuple[float, float], float, float]]:
    """Amplitude estimates (k, a_hat, b_hat) read from the fused spectrum:
    a_hat = (a0/N)(g(k) + g(-k)), b_hat = (a0/N) i (g(k) - g(-k))."""
    if not (a0 > 0) or not (n_photons > 0):
        raise ValueError("a0 and n_photons must be positive")
    out = []
    for k in k_list:
        plus = result.spectrum.at(k)
        minus = result.spectrum.at((-k[0], -k[1]))
        a_hat = (a0 / n_photons) * (plus + minus).real
        b_hat = (a0 / n_photons) * (1j * (plus - minus)).real
        out.append(((float(k[0]), float(k[1])), float(a_hat), float(b_hat)))
    return out


@dataclass(frozen=True)
class SnrReport:
    k: tuple[float, float]
    method: str
    per_frame_db: tuple[float, ...]
    combined_db: float

    @property
    def combined_power(self) -> float:
        return 10 ** (self.combined_db / 10)


def _oob_annulus(grid, k_c: float) -> np.ndarray:
    outer = min(1.5 * k_c, math.pi / grid.dx)
    r = grid.k_radius()
    return (r > 1.05 * k_c) & (r <= outer)


def snr_at_k(data, k, otfs, method: str = "theory") -> SnrReport:
    """Spectral SNR at frequency k, per frame and fused in quadrature.

    data: a RawImageSet with otfs an OtfSet, or a single RealField frame
    with otfs its Otf. Noise power per frame is the recorded photon total
    ('theory', the flat shot-noise spectrum) or the measured mean |g|^2
    over the annulus beyond the cutoff ('out_of_band'). The combination
    runs over frames whose transfer function is nonzero at k; dB values
    are 10 log10 of the power ratio.
    """
    if isinstance(data, RawImageSet):
        if not isinstance(otfs, OtfSet):
            raise TypeError("a RawImageSet needs an OtfSet")
        frames = data.frames
        franges = otfs.hybrid
    elif isinstance(data, RealField):
        if not isinstance(otfs, Otf):
            raise TypeError("a single frame needs its Otf")
        frames = (data,)
        franges = (otfs,)
    else:
        raise TypeError(f"data must be RawImageSet or RealField, got {type(data)}")
    grid = frames[0].grid
    k_c = franges[0].k_c
    if np.hypot(k[0], k[1]) >= k_c:
        raise ValueError(f"query frequency {tuple(k)} is not inside the cutoff")
    if method not in ("theory", "out_of_band"):
        raise ValueError(f"method must be 'theory' or 'out_of_band', got {method!r}")
    annulus = None
    if method == "out_of_band":
        annulus = _oob_annulus(grid, k_c)
        if not annulus.any():
            raise ValueError("no spectral bins beyond the cutoff on this grid")
    per_db = []
    combined = 0.0
    for frame, otf in zip(frames, franges):
        spec = fft_forward(frame)
        if method == "theory":
            noise = spec.dc().real
        else:
            noise = float(np.mean(np.abs(spec.values[annulus]) ** 2))
        if noise <= 0:
            per_db.append(-math.inf)
            continue
        power = abs(spec.at(k)) ** 2 / noise
        per_db.append(10 * math.log10(power) if power > 0 else -math.inf)
        if otf.at(k) > 0:
            combined += power
    combined_db = 10 * math.log10(combined) if combined > 0 else -math.inf
    return SnrReport(
        k=(float(k[0]), float(k[1])),
        method=method,
        per_frame_db=tuple(per_db),
        combined_db=combined_db,
    )


def snr_gain_theory(otfs: OtfSet, k) -> float:
    """Predicted SNR gain (dB) of the hybrid acquisition over direct
    imaging at the same budget: 10 log10 of

        [(1-alpha) beta^2 + alpha sum_l beta_l^2/beta_l(0)] / beta^2.

    Numerator and denominator are the squared-SNR densities of the two
    strategies; the photon number and sample spectrum cancel.
    """
    b = otfs.di.at(k)
    if b <= 0:
        raise ValueError(f"direct imaging has no response at {tuple(k)}")
    s = (1 - otfs.alpha) * b * b
    for o in otfs.regions:
        dc = o.dc_value
        if dc > 0:
            s += otfs.alpha * o.at(k) ** 2 / dc
    return 10 * math.log10(s / (b * b))
