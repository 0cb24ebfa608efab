"""Independent 1D numerical check of the analytic information limits.

Everything here lives on a 1D periodic grid with a top-hat pupil of
2K + 1 frequency bins, so the exact transfer function is the discrete
triangle (2K + 1 - |lag|)/(2K + 1) and the analytic formulas have
closed-form references. Two independent numerical routes are provided:

* single-photon density operator rho[m,n] = sum_j f(x_j) Psi(x_m - x_j)
  Psi(x_n - x_j) dx^2, eigendecomposed, and the quantum Fisher matrix
  assembled from the eigenbasis sums; and
* the classical Fisher matrix of the Poisson intensity images by direct
  quadrature, for direct imaging and for the three-frame 1D split
  (direct frame, central pupil segment, edge segment pair).

Neither route assumes weak modulation, so comparing them against the
analytic diagonals measures the quality of that approximation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimation import FisherMatrix, _fi_quadrature

__all__ = [
    "Grid1D",
    "Sample1D",
    "OtfSet1D",
    "random_sample_1d",
    "apsf_1d",
    "otf_1d",
    "fdd_otfs_1d",
    "DensityOperator1D",
    "build_density_operator_1d",
    "qfi_from_density",
    "qfi_numeric_1d",
    "fi_numeric_1d",
    "analytic_info_1d",
    "mode_labels",
]


@dataclass(frozen=True)
class Grid1D:
    n: int
    dx: float

    def __post_init__(self):
        if self.n < 16 or self.n % 2:
            raise ValueError(f"n must be even and >= 16, got {self.n}")
        if not (self.dx > 0):
            raise ValueError(f"dx must be positive, got {self.dx}")

    @property
    def dk(self) -> float:
        return 2 * np.pi / (self.n * self.dx)

    @property
    def length(self) -> float:
        return self.n * self.dx

    def x(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.dx

    def k(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.dk


@dataclass(frozen=True)
class Sample1D:
    """f(x) = a0 + sum a cos(kx) + b sin(kx), unit integral over the period."""

    a0: float
    modes: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        if not (self.a0 > 0):
            raise ValueError(f"a0 must be positive, got {self.a0}")

    def values(self, grid: Grid1D) -> np.ndarray:
        if abs(self.a0 * grid.length - 1) > 1e-9:
            raise ValueError("sample a0 does not match 1/period of this grid")
        x = grid.x()
        f = np.full(grid.n, self.a0)
        for k, a, b in self.modes:
            m = k / grid.dk
            if abs(m - round(m)) > 1e-6:
                raise ValueError(f"mode frequency {k} is off the grid lattice")
            f += a * np.cos(k * x) + b * np.sin(k * x)
        return f

    def k_list(self) -> np.ndarray:
        return np.array([k for k, _, _ in self.modes])


def random_sample_1d(
    grid: Grid1D, n_modes: int = 48, seed: int = 7, min_to_max: float = 0.1
) -> Sample1D:
    """Gaussian-random mode amplitudes at k = dk, 2dk, ..., n_modes*dk,
    scaled so min f = min_to_max * max f (keeps the field positive with a
    definite contrast)."""
    if not (0 < min_to_max < 1):
        raise ValueError(f"min_to_max must be in (0, 1), got {min_to_max}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    a = rng.standard_normal(n_modes)
    b = rng.standard_normal(n_modes)
    x = grid.x()
    mod = np.zeros(grid.n)
    ks = (np.arange(1, n_modes + 1)) * grid.dk
    for k, ai, bi in zip(ks, a, b):
        mod += ai * np.cos(k * x) + bi * np.sin(k * x)
    # offset chosen so (offset + min) = min_to_max * (offset + max)
    offset = (min_to_max * mod.max() - mod.min()) / (1 - min_to_max)
    scale = 1.0 / (offset * grid.length)
    modes = tuple(
        (float(k), float(ai * scale), float(bi * scale))
        for k, ai, bi in zip(ks, a, b)
    )
    return Sample1D(a0=1.0 / grid.length, modes=modes)


def apsf_1d(grid: Grid1D, n_pupil_bins: int) -> np.ndarray:
    """Amplitude PSF of the top-hat pupil over bins |m| <= K, normalized to
    sum Psi^2 dx = 1 (a periodic Dirichlet kernel)."""
    K = n_pupil_bins
    if not (0 < K < grid.n // 2):
        raise ValueError(f"need 0 < K < n/2, got K={K}, n={grid.n}")
    tophat = np.zeros(grid.n)
    c = grid.n // 2
    tophat[c - K : c + K + 1] = 1.0
    psi = np.fft.ifft(np.fft.ifftshift(tophat))
    psi = np.fft.fftshift(psi)
    assert np.abs(psi.imag).max() < 1e-12
    psi = psi.real
    psi /= np.sqrt((psi**2).sum() * grid.dx)
    return psi


def _segment_otf(grid: Grid1D, support: np.ndarray, norm_bins: int) -> np.ndarray:
    ind = np.fft.ifftshift(support.astype(float))
    corr = np.fft.ifft(np.abs(np.fft.fft(ind)) ** 2).real
    return np.fft.fftshift(np.round(corr)) / norm_bins


def otf_1d(grid: Grid1D, n_pupil_bins: int) -> np.ndarray:
    """Full-pupil transfer function: exact triangle
    (2K + 1 - |lag|) / (2K + 1) out to lag 2K."""
    K = n_pupil_bins
    c = grid.n // 2
    support = np.zeros(grid.n, dtype=bool)
    support[c - K : c + K + 1] = True
    return _segment_otf(grid, support, 2 * K + 1)


@dataclass(frozen=True)
class OtfSet1D:
    """Transfer functions of the 1D three-frame split: direct imaging,
    central segment (bins |m| <= Ka), and the two edge segments taken as
    one point-symmetric frame. hybrid = ((1-alpha) di, alpha inner,
    alpha edge)."""

    grid: Grid1D
    n_pupil_bins: int
    n_inner_bins: int
    alpha: float
    di: np.ndarray
    inner: np.ndarray
    edge: np.ndarray

    @property
    def k_c(self) -> float:
        return 2 * self.n_pupil_bins * self.grid.dk

    @property
    def hybrid(self) -> tuple[np.ndarray, ...]:
        return (
            (1 - self.alpha) * self.di,
            self.alpha * self.inner,
            self.alpha * self.edge,
        )

    def value(self, arr: np.ndarray, k: float) -> float:
        m = int(round(k / self.grid.dk)) + self.grid.n // 2
        if not (0 <= m < self.grid.n):
            return 0.0
        return float(arr[m])


def fdd_otfs_1d(
    grid: Grid1D, n_pupil_bins: int, k_a_ratio: float, alpha: float
) -> OtfSet1D:
    if not (0 < k_a_ratio < 1):
        raise ValueError(f"k_a_ratio must be in (0, 1), got {k_a_ratio}")
    if not (0 <= alpha <= 1):
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    K = n_pupil_bins
    Ka = int(round(k_a_ratio * K))
    if not (0 < Ka < K):
        raise ValueError(f"inner segment {Ka} bins collapses the partition")
    c = grid.n // 2
    full = np.zeros(grid.n, dtype=bool)
    full[c - K : c + K + 1] = True
    inner = np.zeros(grid.n, dtype=bool)
    inner[c - Ka : c + Ka + 1] = True
    edge = full & ~inner
    norm = 2 * K + 1
    return OtfSet1D(
        grid=grid,
        n_pupil_bins=K,
        n_inner_bins=Ka,
        alpha=alpha,
        di=_segment_otf(grid, full, norm),
        inner=_segment_otf(grid, inner, norm),
        edge=_segment_otf(grid, edge, norm),
    )


@dataclass(frozen=True)
class DensityOperator1D:
    """Single-photon position-basis density matrix with its
    eigendecomposition.

    support marks eigenvalues above threshold * max; because the field is
    strictly positive, the operator's range equals the pupil's span
    (2K + 1 modes), so the support size is exactly the pupil bin count.
    """

    grid: Grid1D
    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    support: np.ndarray
    v_factor: np.ndarray
    trace_raw: float

    def __post_init__(self):
        m = self.matrix
        if np.abs(m - m.T).max() > 1e-10:
            raise ValueError("density matrix is not symmetric")
        tr = float(np.trace(m))
        if abs(tr - 1) > 1e-8:
            raise ValueError(f"density matrix trace {tr} != 1")
        if self.eigenvalues.min() < -1e-10:
            raise ValueError(
                f"density matrix has negative eigenvalue {self.eigenvalues.min():.3e}"
            )

    @property
    def rank(self) -> int:
        return int(self.support.sum())

    def mode_derivative(self, k: float, mode: str) -> np.ndarray:
        """d rho / d a_k (mode 'cos') or d rho / d b_k ('sin') as a full
        position-basis matrix."""
        c = self._mode_profile(k, mode)
        vc = self.v_factor * c[None, :]
        return (vc @ self.v_factor.T) / self.trace_raw

    def _mode_profile(self, k: float, mode: str) -> np.ndarray:
        x = self.grid.x()
        if mode == "cos":
            return np.cos(k * x)
        if mode == "sin":
            return np.sin(k * x)
        raise ValueError(f"mode must be 'cos' or 'sin', got {mode!r}")


def build_density_operator_1d(
    sample: Sample1D,
    psi: np.ndarray,
    grid: Grid1D,
    support_threshold: float = 1e-12,
) -> DensityOperator1D:
    """rho[m,n] = sum_j f(x_j) Psi(x_m - x_j) Psi(x_n - x_j) dx^2,
    renormalized to unit trace."""
    f = sample.values(grid)
    if f.min() < -1e-12 * max(f.max(), 1e-300):
        raise ValueError(f"sample goes negative (min {f.min():.3e})")
    f = np.maximum(f, 0.0)
    idx = (np.arange(grid.n)[:, None] - np.arange(grid.n)[None, :]) % grid.n
    v = psi[idx] * grid.dx
    rho = (v * f[None, :]) @ v.T
    tr = float(np.trace(rho))
    if tr <= 0:
        raise ValueError("density matrix has nonpositive trace")
    rho = (rho + rho.T) / (2 * tr)
    xi, u = np.linalg.eigh(rho)
    support = xi > support_threshold * xi.max()
    return DensityOperator1D(
        grid=grid,
        matrix=rho,
        eigenvalues=xi,
        eigenvectors=u,
        support=support,
        v_factor=v,
        trace_raw=tr,
    )


def _qfi_weights(xi: np.ndarray, support: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Weight block W[a, m] for support rows a against all columns m:
    2/(xi_a + xi_m) when m is in the support, else 4/xi_a (the transposed
    near-kernel pair contributes the same amount, and the kernel-kernel
    block vanishes identically because the derivatives live inside the
    operator's range)."""
    s_idx = np.where(support)[0]
    xi_s = xi[s_idx]
    w = np.where(
        support[None, :],
        2.0 / (xi_s[:, None] + xi[None, :]),
        4.0 / xi_s[:, None],
    )
    return w, s_idx


def qfi_from_density(
    rho: np.ndarray, drho_list, support_threshold: float = 1e-12
) -> np.ndarray:
    """Quantum Fisher matrix from a density matrix and its parameter
    derivatives: QFI_ij = sum over eigenpairs 2 P_i P_j / (xi_l + xi_m),
    restricted to pairs with at least one eigenvalue in the support.

    Assembled as a Gram matrix, so the result is symmetric PSD by
    construction and degenerate eigenvalues need no special casing (no
    xi_l - xi_m denominators appear).
    """
    rho = np.asarray(rho, dtype=float)
    if np.abs(rho - rho.T).max() > 1e-10 * max(np.abs(rho).max(), 1e-300):
        raise ValueError("density matrix is not symmetric")
    xi, u = np.linalg.eigh((rho + rho.T) / 2)
    support = xi > support_threshold * xi.max()
    w, s_idx = _qfi_weights(xi, support)
    sqrt_w = np.sqrt(w)
    g_rows = []
    for drho in drho_list:
        p = u.T @ np.asarray(drho, dtype=float) @ u
        g_rows.append((sqrt_w * p[s_idx, :]).ravel())
    g = np.stack(g_rows)
    return g @ g.T


def qfi_numeric_1d(rho: DensityOperator1D, labels) -> FisherMatrix:
    """Quantum Fisher matrix for a list of ((k, 0), 'cos'|'sin') labels.

    Same eigenbasis sum as qfi_from_density, but the derivative matrices
    are never materialized: with drho_i = V diag(c_i) V^T, the projected
    block is P_i[S,:] = (V^T U)[:,S]^T diag(c_i) (V^T U).
    """
    xi = rho.eigenvalues
    w, s_idx = _qfi_weights(xi, rho.support)
    sqrt_w = np.sqrt(w)
    m = rho.v_factor.T @ rho.eigenvectors
    m_s = m[:, s_idx]
    g_rows = []
    for (k, _), mode in labels:
        c = rho._mode_profile(k, mode) / rho.trace_raw
        p_s = m_s.T @ (c[:, None] * m)
        g_rows.append((sqrt_w * p_s).ravel())
    g = np.stack(g_rows)
    return FisherMatrix(labels=tuple((tuple(k), mo) for k, mo in labels), matrix=g @ g.T)


def _ift_1d(grid: Grid1D, spectrum_centered: np.ndarray) -> np.ndarray:
    out = np.fft.ifft(np.fft.ifftshift(spectrum_centered)) / grid.dx
    return out.real


def fi_numeric_1d(
    sample: Sample1D, otfs: OtfSet1D, labels, frames: str = "fdd"
) -> FisherMatrix:
    """Per-photon classical Fisher matrix of the intensity images by direct
    quadrature, exact for Poisson noise.

    frames = 'di' uses the plain full-pupil image; 'fdd' sums the three
    hybrid frames. Frames with zero photon share are skipped.
    """
    grid = otfs.grid
    f = sample.values(grid)
    spec = np.fft.fftshift(np.fft.fft(f)) * grid.dx
    if frames == "di":
        frame_otfs = [otfs.di]
    elif frames == "fdd":
        frame_otfs = [h for h in otfs.hybrid]
    else:
        raise ValueError(f"frames must be 'di' or 'fdd', got {frames!r}")
    x = grid.x()
    total = np.zeros((len(labels), len(labels)))
    for beta in frame_otfs:
        b0 = float(beta[grid.n // 2])
        if b0 <= 0:
            continue
        mean = _ift_1d(grid, beta * spec)
        derivs = []
        for (k, _), mode in labels:
            bk = otfs.value(beta, k)
            c = np.cos(k * x) if mode == "cos" else np.sin(k * x)
            derivs.append(bk * c)
        total += _fi_quadrature(mean, np.stack(derivs), 1.0, grid.dx)
    return FisherMatrix(labels=tuple((tuple(k), mo) for k, mo in labels), matrix=total)


def mode_labels(k_list) -> tuple[tuple[tuple[float, float], str], ...]:
    """Parameter ordering a_1..a_L, b_1..b_L as ((k, 0), mode) labels."""
    ks = [float(k) for k in k_list]
    return tuple(((k, 0.0), "cos") for k in ks) + tuple(((k, 0.0), "sin") for k in ks)


def analytic_info_1d(otfs: OtfSet1D, a0: float, labels) -> dict:
    """Analytic per-photon diagonals on the 1D triangle transfer functions,
    aligned with the given labels: quantum limit, direct imaging, raw
    split sum, and hybrid."""
    if not (a0 > 0):
        raise ValueError(f"a0 must be positive, got {a0}")
    qfi, fi_di, fi_raw = [], [], []
    b1_0 = otfs.value(otfs.inner, 0.0)
    b2_0 = otfs.value(otfs.edge, 0.0)
    for (k, _), _mode in labels:
        b = otfs.value(otfs.di, k)
        b1 = otfs.value(otfs.inner, k)
        b2 = otfs.value(otfs.edge, k)
        qfi.append(b / (2 * a0**2))
        fi_di.append(b**2 / (2 * a0**2))
        raw = 0.0
        if b1_0 > 0:
            raw += b1**2 / (2 * a0**2 * b1_0)
        if b2_0 > 0:
            raw += b2**2 / (2 * a0**2 * b2_0)
        fi_raw.append(raw)
    qfi = np.array(qfi)
    fi_di = np.array(fi_di)
    fi_raw = np.array(fi_raw)
    return {
        "qfi": qfi,
        "fi_di": fi_di,
        "fi_fdd_raw": fi_raw,
        "fi_hybrid": otfs.alpha * fi_raw + (1 - otfs.alpha) * fi_di,
    }
