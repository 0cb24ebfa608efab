"""Pupil masks, partition geometry, and OTF computation."""

import numpy as np
import pytest

from fddlab import (
    GridSpec,
    OpticsSpec,
    Otf,
    OtfSet,
    PupilPartition,
    chat_otf,
    compute_otf,
    compute_psf,
    default_grid,
    hybrid_otfs,
    make_circular_pupil,
    partition_fdd,
)
from fddlab.optics import psf_otf_roundtrip_defect

J1_ZERO = 3.8317059702075125


class TestOpticsSpec:
    def test_cutoff_formula(self):
        o = OpticsSpec(wavelength=540.0, numerical_aperture=1.4)
        assert o.k_c == pytest.approx(4 * np.pi * 1.4 / 540.0, rel=1e-15)

    def test_validation(self):
        with pytest.raises(ValueError):
            OpticsSpec(wavelength=0.0, numerical_aperture=1.4)
        with pytest.raises(ValueError):
            OpticsSpec(wavelength=540.0, numerical_aperture=0.0)
        with pytest.raises(ValueError):
            OpticsSpec(wavelength=540.0, numerical_aperture=1.7)


class TestPupil:
    def test_default_grid_band(self, optics, grid256):
        # the autocorrelation support must fit inside the half band
        assert optics.k_c * grid256.dx == pytest.approx(0.8 * np.pi, rel=1e-12)

    def test_rejects_grid_below_band(self, optics):
        g = GridSpec(nx=32, ny=32, dx=1.2 * np.pi / optics.k_c)
        with pytest.raises(ValueError, match="k_c"):
            make_circular_pupil(optics, g)

    def test_support_radius(self, optics, grid256, pupil256):
        r = grid256.k_radius()
        assert np.array_equal(pupil256.support, r <= optics.k_c / 2)
        assert pupil256.pixel_count == pupil256.support.sum()
        assert pupil256.norm_pixels == pupil256.pixel_count


class TestOtf:
    def test_dc_is_one(self, otf_di):
        assert otf_di.dc_value == 1.0

    def test_values_are_exact_pair_fractions(self, pupil256, otf_di):
        counts = otf_di.values * pupil256.norm_pixels
        assert np.abs(counts - np.round(counts)).max() < 1e-9

    def test_point_symmetry(self, otf_di):
        v = otf_di.values[1:, 1:]
        assert np.array_equal(v, v[::-1, ::-1])

    def test_zero_beyond_cutoff(self, grid256, otf_di):
        outside = grid256.k_radius() > otf_di.k_c + 2 * grid256.dkx
        assert np.all(otf_di.values[outside] == 0.0)

    def test_matches_ideal_disk_autocorrelation(self, grid256, otf_di):
        ref = chat_otf(grid256, otf_di.k_c)
        assert np.abs(otf_di.values - ref.values).max() < 2.5e-3

    def test_rejects_negative_values(self, grid256, optics):
        vals = np.zeros(grid256.shape)
        vals[0, 0] = -1e-6
        with pytest.raises(ValueError):
            Otf(grid256, vals, optics.k_c)

    def test_at_matches_axis_profile(self, grid256, otf_di):
        ks, vals = otf_di.axis_profile("x")
        assert vals[4] == otf_di.at((ks[4], 0.0))
        ksy, valsy = otf_di.axis_profile("y")
        # circular pupil: the two axes see the same profile
        assert np.array_equal(vals, valsy)

    def test_axis_profile_rejects_bad_axis(self, otf_di):
        with pytest.raises(ValueError):
            otf_di.axis_profile("z")

    def test_scaled(self, otf_di):
        half = otf_di.scaled(0.5)
        assert half.dc_value == pytest.approx(0.5)

    def test_psf_unit_integral_and_roundtrip(self, pupil256):
        psf = compute_psf(pupil256)
        assert psf.integral() == pytest.approx(1.0, rel=1e-12)
        assert psf_otf_roundtrip_defect(pupil256) < 1e-10


class TestChatFunction:
    def test_closed_form_values(self, optics):
        # ratios 0.5 / 0.9 / 0.95 land exactly on bins of this grid
        g = GridSpec(nx=256, ny=256, dx=2 * np.pi * 100 / (256 * optics.k_c))
        ref = chat_otf(g, optics.k_c)
        c = 128
        assert ref.values[c + 50, c] == pytest.approx(0.3910022189557706, abs=1e-12)
        assert ref.values[c + 90, c] == pytest.approx(0.037386073468498646, abs=1e-12)
        assert ref.values[c + 95, c] == pytest.approx(0.013320011010141243, abs=1e-12)
        assert ref.values[c, c] == 1.0
        # the cutoff bin sits within one ulp of rho = 1
        assert abs(ref.values[c + 100, c]) < 1e-20
        assert ref.values[c + 101, c] == 0.0


class TestPartition:
    def test_ratio_bounds(self, pupil256):
        for bad in (0.0, 1.0, -0.2, 1.3):
            with pytest.raises(ValueError):
                partition_fdd(pupil256, k_a_ratio=bad)

    def test_regions_tile_pupil(self, partition256, pupil256):
        total = np.zeros(pupil256.grid.shape, dtype=int)
        for m in partition256.masks:
            total += m.support.astype(int)
        assert np.array_equal(total > 0, pupil256.support)
        assert total.max() == 1

    def test_direct_construction_rejects_overlap(self, pupil256, partition256):
        masks = list(partition256.regions)
        # duplicate one wedge so coverage overlaps
        bad = masks[:4] + [masks[1]]
        with pytest.raises(ValueError, match="tile"):
            PupilPartition(parent=pupil256, inner_radius_ratio=0.7, regions=tuple(bad))

    def test_inner_region_is_central_disk(self, partition256, grid256, optics):
        k_a = 0.7 * optics.k_c
        want = partition256.parent.support & (grid256.k_radius() <= k_a / 2)
        assert np.array_equal(partition256.masks[0].support, want)

    def test_wedge_orientations(self, partition256, grid256):
        c = grid256.nx // 2
        # annulus points on the kx axis, ky axis, and the two diagonals
        on = [(40, 0), (0, 40), (30, 30), (30, -30)]
        for region, (i, j) in zip(range(1, 5), on):
            for sign in (1, -1):
                assert partition256.masks[region].support[c + sign * i, c + sign * j]

    def test_point_symmetry_of_wedges(self, partition256):
        for m in partition256.masks[1:]:
            v = m.support[1:, 1:]
            assert np.array_equal(v, v[::-1, ::-1])

    def test_displacement_cross_layout(self, partition256, grid256, optics):
        airy = 2 * J1_ZERO / optics.k_c
        d = grid256.nx * grid256.dx + 2 * airy
        want = [(0.0, 0.0), (d, 0.0), (0.0, d), (-d, 0.0), (0.0, -d)]
        for got, exp in zip(partition256.displacements, want):
            assert got[0] == pytest.approx(exp[0], rel=1e-12, abs=1e-12)
            assert got[1] == pytest.approx(exp[1], rel=1e-12, abs=1e-12)

    def test_canvas_capacity_check(self, pupil256, grid256, optics):
        airy = 2 * J1_ZERO / optics.k_c
        need = 3 * grid256.nx * grid256.dx + 6 * airy
        n_ok = 16 * int(np.ceil(need / (16 * grid256.dx)))
        roomy = GridSpec(nx=n_ok, ny=n_ok, dx=grid256.dx)
        partition_fdd(pupil256, 0.7, image_canvas=roomy)
        with pytest.raises(ValueError, match="canvas"):
            partition_fdd(pupil256, 0.7, image_canvas=grid256)


class TestRegionOtfs:
    def test_dc_fractions(self, otfs256):
        dc = [o.dc_value for o in otfs256.regions]
        # area fractions of the inner disk and the four equal wedges
        assert dc[0] == pytest.approx(0.49, abs=5e-3)
        for v in dc[1:]:
            assert v == pytest.approx((1 - 0.49) / 4, abs=5e-3)
        assert sum(dc) == pytest.approx(1.0, abs=1e-12)

    def test_inner_otf_support(self, grid256, otfs256, optics):
        k_a = 0.7 * optics.k_c
        outside = grid256.k_radius() > k_a + 2 * grid256.dkx
        assert np.all(otfs256.regions[0].values[outside] == 0.0)

    def test_axis_wedge_tracks_full_otf_near_cutoff(self, grid256, otfs256, otf_di):
        _, di = otf_di.axis_profile("x")
        _, r2 = otfs256.regions[1].axis_profile("x")
        bin_ka = 90  # just above the inner-disk cutoff on this grid
        assert 0.8 < r2[bin_ka - 1] / di[bin_ka - 1] < 0.95
        # near the band edge only axis-aligned pairs survive in either mask
        hi = slice(96 - 1, 103 - 1)
        assert np.array_equal(r2[hi], di[hi])
        assert di[102 - 1] > 0.0

    def test_perpendicular_wedge_vanishes_on_axis(self, otfs256):
        _, r3 = otfs256.regions[2].axis_profile("x")
        assert np.all(r3[85:] == 0.0)


class TestHybridSet:
    def test_alpha_validation(self, partition256, otf_di):
        for bad in (-0.1, 1.1):
            with pytest.raises(ValueError):
                hybrid_otfs(partition256, otf_di, bad)

    def test_split_weights(self, partition256, otf_di):
        for alpha in (0.0, 0.6, 1.0):
            s = hybrid_otfs(partition256, otf_di, alpha)
            assert np.allclose(s.hybrid[0].values, (1 - alpha) * otf_di.values)
            for h, r in zip(s.hybrid[1:], s.regions):
                assert np.allclose(h.values, alpha * r.values)
            assert s.hybrid_dc().sum() == pytest.approx(1.0, abs=1e-12)

    def test_set_arity_enforced(self, otf_di, otfs256):
        with pytest.raises(ValueError):
            OtfSet(di=otf_di, regions=otfs256.regions[:4], alpha=0.5,
                   hybrid=otfs256.hybrid)

    def test_empty_annulus_regions_yield_zero_otfs(self, optics):
        # at 16 grid points a ratio near 1 empties the annulus entirely
        g = default_grid(optics, n=16)
        p = make_circular_pupil(optics, g)
        part = partition_fdd(p, k_a_ratio=0.99)
        assert part.masks[0].pixel_count == p.pixel_count
        s = hybrid_otfs(part, compute_otf(p), alpha=0.5)
        for r in s.regions[1:]:
            assert np.all(r.values == 0.0)
        assert s.hybrid_dc().sum() == pytest.approx(1.0, abs=1e-12)
