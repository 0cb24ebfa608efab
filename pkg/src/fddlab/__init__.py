"""Numerical laboratory for split-pupil passive imaging: pupils and OTFs,
information limits, photon budgets, shot-noise simulation, and multi-frame
Wiener reconstruction."""

from .fourier import (
    GridSpec,
    Mode,
    RealField,
    SampleSpectrum,
    SpectralField,
    analyze_sample,
    analyze_spectrum,
    fft_forward,
    fft_inverse,
    hermitian_defect,
    make_test_chart,
    synthesize_sample,
)
from .optics import (
    OpticsSpec,
    Otf,
    OtfSet,
    PupilMask,
    PupilPartition,
    chat_otf,
    compute_otf,
    compute_psf,
    default_grid,
    hybrid_otfs,
    make_circular_pupil,
    partition_fdd,
)
from .estimation import (
    FisherDiagonal,
    FisherMatrix,
    crb,
    fi_di_analytic,
    fi_fdd_raw,
    fi_hybrid,
    fi_numeric,
    fi_pupil_analytic,
    qfi_analytic,
)
from .numeric1d import (
    DensityOperator1D,
    Grid1D,
    OtfSet1D,
    Sample1D,
    analytic_info_1d,
    apsf_1d,
    build_density_operator_1d,
    fdd_otfs_1d,
    fi_numeric_1d,
    mode_labels,
    otf_1d,
    qfi_from_density,
    qfi_numeric_1d,
    random_sample_1d,
)
from .budget import (
    BudgetCurve,
    BudgetParams,
    airy_area,
    budget_constant,
    budget_curves,
    n_min_di,
    n_min_fdd,
    resolution_for_budget,
)
from .simulate import (
    AcquisitionConfig,
    RawImageSet,
    acquire,
    derive_rng,
    mean_image,
    poissonize,
)
from .reconstruct import (
    ReconstructionConfig,
    ReconstructionResult,
    SnrReport,
    WienerWeights,
    estimate_fourier_params,
    fdd_weights,
    reconstruct_di_dcv,
    reconstruct_fdd,
    snr_at_k,
    snr_gain_theory,
)
from .fieldio import load_field, partition_description, save_field, save_preview

__version__ = "0.1.0"

__all__ = [
    "GridSpec", "RealField", "SpectralField", "SampleSpectrum", "Mode",
    "fft_forward", "fft_inverse", "hermitian_defect", "analyze_spectrum",
    "synthesize_sample", "analyze_sample", "make_test_chart",
    "OpticsSpec", "PupilMask", "PupilPartition", "Otf", "OtfSet",
    "make_circular_pupil", "partition_fdd", "compute_otf", "compute_psf",
    "hybrid_otfs", "chat_otf", "default_grid",
    "FisherDiagonal", "FisherMatrix", "qfi_analytic", "fi_di_analytic",
    "fi_pupil_analytic", "fi_fdd_raw", "fi_hybrid", "crb", "fi_numeric",
    "Grid1D", "Sample1D", "OtfSet1D", "random_sample_1d", "apsf_1d", "otf_1d",
    "fdd_otfs_1d", "DensityOperator1D", "build_density_operator_1d",
    "qfi_from_density", "qfi_numeric_1d", "fi_numeric_1d", "analytic_info_1d",
    "mode_labels",
    "BudgetParams", "BudgetCurve", "budget_constant", "airy_area",
    "n_min_di", "n_min_fdd", "budget_curves", "resolution_for_budget",
    "AcquisitionConfig", "RawImageSet", "derive_rng", "mean_image",
    "poissonize", "acquire",
    "ReconstructionConfig", "WienerWeights", "ReconstructionResult",
    "SnrReport", "fdd_weights", "reconstruct_fdd", "reconstruct_di_dcv",
    "estimate_fourier_params", "snr_at_k", "snr_gain_theory",
    "save_field", "load_field", "save_preview", "partition_description",
]
