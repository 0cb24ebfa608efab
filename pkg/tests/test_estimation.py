"""Fisher information: analytic formulas, containers, and direct quadrature."""

import numpy as np
import pytest

from fddlab import (
    FisherDiagonal,
    FisherMatrix,
    Mode,
    RealField,
    SampleSpectrum,
    crb,
    fi_di_analytic,
    fi_fdd_raw,
    fi_hybrid,
    fi_numeric,
    fi_pupil_analytic,
    mean_image,
    qfi_analytic,
)


@pytest.fixture(scope="module")
def k_list(grid256):
    return [(b * grid256.dkx, 0.0) for b in (20, 40, 60, 80, 89, 95)]


@pytest.fixture(scope="module")
def a0(grid256):
    return 1.0 / grid256.area


class TestContainers:
    def test_diagonal_validation(self):
        with pytest.raises(ValueError):
            FisherDiagonal(entries=(((1.0, 0.0), "tan", 1.0),), a0=1.0)
        with pytest.raises(ValueError):
            FisherDiagonal(entries=(((1.0, 0.0), "cos", 1.0),), a0=0.0)

    def test_value_at_lookup(self):
        d = FisherDiagonal(
            entries=(((1.0, 0.0), "cos", 2.0), ((1.0, 0.0), "sin", 3.0)), a0=1.0
        )
        assert d.value_at((1.0, 0.0), "sin") == 3.0
        with pytest.raises((KeyError, ValueError)):
            d.value_at((2.0, 0.0), "cos")

    def test_matrix_rejects_asymmetry(self):
        with pytest.raises(ValueError):
            FisherMatrix(
                labels=(((1.0, 0.0), "cos"), ((1.0, 0.0), "sin")),
                matrix=np.array([[1.0, 0.5], [0.0, 1.0]]),
            )

    def test_matrix_rejects_indefinite(self):
        with pytest.raises(ValueError):
            FisherMatrix(
                labels=(((1.0, 0.0), "cos"), ((1.0, 0.0), "sin")),
                matrix=np.array([[1.0, 2.0], [2.0, 1.0]]),
            )

    def test_offdiag_fraction(self):
        m = FisherMatrix(
            labels=(((1.0, 0.0), "cos"), ((1.0, 0.0), "sin")),
            matrix=np.diag([2.0, 1.0]),
        )
        assert m.offdiag_fraction() == 0.0


class TestAnalyticFormulas:
    def test_quantum_limit_values(self, otf_di, a0, k_list):
        q = qfi_analytic(otf_di, a0, k_list)
        for k in k_list:
            want = otf_di.at(k) / (2 * a0**2)
            assert q.value_at(k, "cos") == pytest.approx(want, rel=1e-12)
            assert q.value_at(k, "sin") == pytest.approx(want, rel=1e-12)

    def test_direct_imaging_values(self, otf_di, a0, k_list):
        f = fi_di_analytic(otf_di, a0, k_list)
        for k in k_list:
            want = otf_di.at(k) ** 2 / (2 * a0**2)
            assert f.value_at(k, "cos") == pytest.approx(want, rel=1e-12)

    def test_classical_never_exceeds_quantum(self, otf_di, a0, k_list):
        q = qfi_analytic(otf_di, a0, k_list)
        f = fi_di_analytic(otf_di, a0, k_list)
        assert np.all(f.values <= q.values * (1 + 1e-12))

    def test_beyond_cutoff_carries_nothing(self, otf_di, a0):
        k_out = (1.05 * otf_di.k_c, 0.0)
        with pytest.warns(UserWarning):
            q = qfi_analytic(otf_di, a0, [k_out])
        assert np.all(q.values == 0.0)
        assert np.all(np.isinf(crb(q, 1e6)))

    def test_region_values(self, otfs256, a0, k_list):
        r2 = otfs256.regions[1]
        f = fi_pupil_analytic(r2, a0, k_list)
        for k in k_list:
            want = r2.at(k) ** 2 / (2 * a0**2 * r2.dc_value)
            assert f.value_at(k, "cos") == pytest.approx(want, rel=1e-12)

    def test_region_requires_positive_throughput(self, grid256, otf_di, a0, k_list):
        dead = type(otf_di)(grid256, np.zeros(grid256.shape), otf_di.k_c)
        with pytest.raises(ValueError):
            fi_pupil_analytic(dead, a0, k_list)

    def test_raw_sum_and_label_guard(self, otfs256, a0, k_list):
        parts = [fi_pupil_analytic(r, a0, k_list) for r in otfs256.regions]
        raw = fi_fdd_raw(parts)
        assert np.allclose(raw.values, np.sum([p.values for p in parts], axis=0))
        other = fi_pupil_analytic(otfs256.regions[0], a0, k_list[:-1])
        with pytest.raises(ValueError):
            fi_fdd_raw([parts[0], other])

    def test_hybrid_blend(self, otfs256, otf_di, a0, k_list):
        parts = [fi_pupil_analytic(r, a0, k_list) for r in otfs256.regions]
        raw = fi_fdd_raw(parts)
        di = fi_di_analytic(otf_di, a0, k_list)
        for alpha in (0.0, 0.3, 1.0):
            h = fi_hybrid(raw, di, alpha)
            assert np.allclose(h.values, alpha * raw.values + (1 - alpha) * di.values)
        with pytest.raises(ValueError):
            fi_hybrid(raw, di, 1.2)

    def test_hybrid_beats_direct_near_band_edge(self, otfs256, otf_di, a0, grid256):
        # the photon split only pays off near the band edge; the crossover
        # for this alpha sits just above 0.78 k_c
        ks = [(b * grid256.dkx, 0.0) for b in range(82, 103)]
        parts = [fi_pupil_analytic(r, a0, ks) for r in otfs256.regions]
        h = fi_hybrid(fi_fdd_raw(parts), fi_di_analytic(otf_di, a0, ks), 0.6)
        di = fi_di_analytic(otf_di, a0, ks)
        n = 1e6
        assert np.all(crb(h, n) < crb(di, n))

    def test_crb_scaling(self, otf_di, a0, k_list):
        f = fi_di_analytic(otf_di, a0, k_list)
        assert np.allclose(crb(f, 2e6), crb(f, 1e6) / 2)
        with pytest.raises(ValueError):
            crb(f, 0.0)


class TestNumericQuadrature:
    def _derivs(self, grid, otf, ks, n):
        x, y = grid.x_axes()
        out, labels = [], []
        for k in ks:
            phase = k[0] * x[:, None] + k[1] * y[None, :]
            b = otf.at(k)
            out.append(RealField(grid, n * b * np.cos(phase)))
            labels.append((k, "cos"))
            out.append(RealField(grid, n * b * np.sin(phase)))
            labels.append((k, "sin"))
        return out, labels

    def test_uniform_mean_reproduces_analytic(self, grid256, otf_di, a0):
        ks = [(20 * grid256.dkx, 0.0), (60 * grid256.dkx, 0.0), (0.0, 45 * grid256.dky)]
        n = 1e6
        flat = SampleSpectrum(a0=a0, modes=())
        mean = mean_image(flat, otf_di, n)
        derivs, labels = self._derivs(grid256, otf_di, ks, n)
        fm = fi_numeric(mean, derivs, labels, n)
        ana = fi_di_analytic(otf_di, a0, ks)
        # lattice-mode orthogonality makes the quadrature exact here
        assert fm.offdiag_fraction() < 1e-9
        for k in ks:
            i = labels.index((k, "cos"))
            assert fm.matrix[i, i] == pytest.approx(ana.value_at(k, "cos"), rel=1e-9)

    def test_structured_mean_stays_in_band(self, grid256, otf_di, a0):
        ks = [(40 * grid256.dkx, 0.0), (80 * grid256.dkx, 0.0)]
        n = 1e6
        s = SampleSpectrum(
            a0=a0,
            modes=(
                Mode(ks[0], a=0.3 * a0, b=0.0),
                Mode(ks[1], a=0.0, b=0.25 * a0),
            ),
        )
        mean = mean_image(s, otf_di, n)
        derivs, labels = self._derivs(grid256, otf_di, ks, n)
        fm = fi_numeric(mean, derivs, labels, n)
        ana = fi_di_analytic(otf_di, a0, ks)
        for i, lab in enumerate(labels):
            assert fm.matrix[i, i] == pytest.approx(
                ana.value_at(*lab), rel=0.15
            )

    def test_input_guards(self, grid256, otf_di, a0):
        n = 1e6
        flat = SampleSpectrum(a0=a0, modes=())
        mean = mean_image(flat, otf_di, n)
        derivs, labels = self._derivs(grid256, otf_di, [(20 * grid256.dkx, 0.0)], n)
        with pytest.raises(ValueError):
            fi_numeric(mean, derivs[:1], labels, n)
        with pytest.raises(ValueError):
            fi_numeric(mean, derivs, labels, 0.0)
