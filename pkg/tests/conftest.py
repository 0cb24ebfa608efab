"""Shared fixtures: one imaging stack at the default working resolution.

Session scope keeps the pupil autocorrelations (the slow part) to a single
computation across the whole suite.
"""

import numpy as np
import pytest

from fddlab import (
    OpticsSpec,
    compute_otf,
    default_grid,
    hybrid_otfs,
    make_circular_pupil,
    partition_fdd,
)


@pytest.fixture(scope="session")
def optics():
    # oil-immersion style objective, visible light, lengths in nm
    return OpticsSpec(wavelength=540.0, numerical_aperture=1.4)


@pytest.fixture(scope="session")
def grid256(optics):
    return default_grid(optics, n=256)


@pytest.fixture(scope="session")
def pupil256(optics, grid256):
    return make_circular_pupil(optics, grid256)


@pytest.fixture(scope="session")
def otf_di(pupil256):
    return compute_otf(pupil256)


@pytest.fixture(scope="session")
def partition256(pupil256):
    return partition_fdd(pupil256, k_a_ratio=0.7)


@pytest.fixture(scope="session")
def otfs256(partition256, otf_di):
    return hybrid_otfs(partition256, otf_di, alpha=0.6)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260816)
