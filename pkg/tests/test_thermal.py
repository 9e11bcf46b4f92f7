"""Tests for thermal states and Kerr closed forms."""

import math

import numpy as np
import pytest

from anharmonic_cli.errors import (
    DomainError,
    InvalidStateError,
    TruncationOverflowError,
    UnconvergedTruncationError,
    UnstableSpectrumError,
)
from anharmonic_cli.fock import Basis, Model, ModelSpec, build_ladder_operators, eigensystem
from anharmonic_cli.thermal import (
    DensityMatrix,
    canonical_state,
    g_n_statistic,
    kerr_continuum_g2,
    kerr_high_T_occupation,
    kerr_low_occupation_g2,
    kerr_populations,
    kerr_subpoissonian_boundary,
    kerr_thermal_statistics,
    naive_dim,
    naive_thermal_state,
    photon_distribution,
    select_keep,
    thermal_eigensystem,
    to_fock,
    trace_distance,
)


class TestDensityMatrix:
    def test_rejects_wrong_trace(self):
        with pytest.raises(InvalidStateError):
            DensityMatrix(np.diag([0.5, 0.4]))

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(InvalidStateError):
            DensityMatrix(np.diag([1.2, -0.2]))

    def test_trace_distance_of_orthogonal_states(self):
        rho = DensityMatrix(np.diag([1.0, 0.0]))
        sigma = DensityMatrix(np.diag([0.0, 1.0]))
        assert trace_distance(rho, sigma) == pytest.approx(1.0)
        assert trace_distance(rho, rho) == 0.0


class TestNaiveThermalState:
    def test_naive_dim(self):
        assert naive_dim(1.0, 1.0) == 29
        assert naive_dim(1.0, 0.0) == 2

    def test_bose_einstein_statistics(self):
        rho = naive_thermal_state(1.0, 1.0, naive_dim(1.0, 1.0))
        a, _ = build_ladder_operators(rho.dim)
        assert g_n_statistic(rho, a, 2) == pytest.approx(2.0, abs=1e-8)
        assert g_n_statistic(rho, a, 1) == pytest.approx(1.0)
        occupation = rho.expectation(a.dag() @ a).real
        assert occupation == pytest.approx(1.0 / math.expm1(1.0), rel=1e-9)

    def test_short_truncation_overflows(self):
        with pytest.raises(TruncationOverflowError):
            naive_thermal_state(1.0, 1.0, 10)

    def test_tail_check_can_be_skipped(self):
        rho = naive_thermal_state(1.0, 1.0, 10, tail=None)
        assert rho.dim == 10


class TestCanonicalState:
    def test_kerr_state_is_boltzmann(self):
        eigsys = eigensystem(ModelSpec(Model.KERR, 0.1, dim=40), 30)
        rho = canonical_state(eigsys, 0.5)
        weights = np.diag(rho.elements).real
        assert rho.basis is Basis.EIGEN
        assert weights[1] / weights[0] == pytest.approx(math.exp(-2.0))
        assert weights[2] / weights[0] == pytest.approx(math.exp(-2.2 / 0.5))

    def test_zero_temperature_is_ground_state(self):
        eigsys = eigensystem(ModelSpec(Model.QUARTIC, 0.01, dim=40), 4)
        rho = canonical_state(eigsys, 0.0)
        assert rho.elements[0, 0] == 1.0

    def test_fock_distribution_of_eigenstate(self):
        eigsys = eigensystem(ModelSpec(Model.QUARTIC, 0.01, dim=40), 4)
        rho = canonical_state(eigsys, 0.0)
        distribution = photon_distribution(rho, eigsys)
        assert distribution.sum() == pytest.approx(1.0)
        assert distribution[0] > 0.99
        assert to_fock(rho, eigsys).basis is Basis.FOCK

    def test_eigen_state_needs_eigensystem(self):
        eigsys = eigensystem(ModelSpec(Model.QUARTIC, 0.01, dim=40), 4)
        with pytest.raises(InvalidStateError):
            photon_distribution(canonical_state(eigsys, 0.0))


class TestThermalEigensystem:
    def test_tail_criterion_met(self):
        eigsys = thermal_eigensystem(ModelSpec(Model.QUARTIC, 1e-3), 0.3)
        weights = np.exp(-(eigsys.energies - eigsys.energies[0]) / 0.3)
        assert weights[-1] < 1e-12
        assert weights[-2] >= 1e-12

    def test_keep_cap(self):
        with pytest.raises(TruncationOverflowError):
            thermal_eigensystem(ModelSpec(Model.QUARTIC, 1e-3), 0.3, max_keep=3)

    def test_hot_state_grows_working_space(self):
        eigsys = thermal_eigensystem(ModelSpec(Model.KERR, 0.01), 2.0)
        assert eigsys.dim_work > 40

    def test_strong_nonlinearity_keeps_converged_levels(self):
        U = T = math.exp(2)
        eigsys = thermal_eigensystem(ModelSpec(Model.QUARTIC, U), T)
        reference = eigensystem(ModelSpec(Model.QUARTIC, U, dim=640), eigsys.keep)
        assert eigsys.dim_work > 40
        assert np.allclose(eigsys.energies, reference.energies, rtol=1e-6)

    def test_unconverged_levels_raise(self):
        with pytest.raises(UnconvergedTruncationError):
            thermal_eigensystem(ModelSpec(Model.QUARTIC, math.exp(2)), math.exp(2), max_dim=40)

    def test_kerr_skips_the_doubling_test(self):
        eigsys = thermal_eigensystem(ModelSpec(Model.KERR, 0.2), 0.5)
        assert eigsys.dim_work == 40

    def test_select_keep_at_zero_temperature(self):
        assert select_keep(np.arange(5.0), 0.0) == 2


class TestKerrStatistics:
    def test_harmonic_limit(self):
        stats = kerr_thermal_statistics(1.0, 0.0, 1.0)
        assert stats.g2 == pytest.approx(2.0, abs=1e-8)
        assert stats.mean_occupation == pytest.approx(1.0 / math.expm1(1.0))

    def test_ground_state_populations(self):
        assert np.array_equal(kerr_populations(1.0, 0.1, 0.0), [1.0, 0.0])

    def test_attractive_kerr_rejected(self):
        with pytest.raises(UnstableSpectrumError):
            kerr_populations(1.0, -0.1, 1.0)

    def test_weak_kerr_stays_thermal(self):
        assert kerr_thermal_statistics(1.0, math.exp(-5), 1.0).g2 == pytest.approx(2.0, abs=0.1)

    def test_strong_kerr_blocks_double_occupation(self):
        assert kerr_thermal_statistics(1.0, math.exp(2), 1.0).g2 < 1e-4

    def test_low_occupation_form_matches_sum(self):
        exact = kerr_thermal_statistics(1.0, 0.5, 0.1).g2
        assert kerr_low_occupation_g2(1.0, 0.5, 0.1) == pytest.approx(exact, rel=1e-9)

    def test_continuum_approaches_half_pi(self):
        assert kerr_continuum_g2(1.0, 1.0, 1e6) == pytest.approx(math.pi / 2, abs=5e-3)

    def test_continuum_domain(self):
        with pytest.raises(DomainError):
            kerr_continuum_g2(1.0, 0.0, 1.0)

    def test_high_temperature_occupation(self):
        T, U = math.exp(10), math.exp(-3)
        numeric = kerr_thermal_statistics(1.0, U, T)
        assert kerr_high_T_occupation(1.0, U, T) == pytest.approx(numeric.mean_occupation, rel=1e-2)
        assert numeric.g2 == pytest.approx(math.pi / 2, rel=2e-2)


class TestSubpoissonianBoundary:
    def test_threshold_value(self):
        boundary = kerr_subpoissonian_boundary(1.0, 0.2)
        assert boundary.u_threshold == pytest.approx(0.0686, abs=5e-4)
        assert boundary.in_validity_regime

    def test_threshold_is_poissonian(self):
        boundary = kerr_subpoissonian_boundary(1.0, 0.2)
        g2 = kerr_thermal_statistics(1.0, boundary.u_threshold, 0.2).g2
        assert g2 == pytest.approx(1.0, abs=0.05)

    def test_too_hot(self):
        with pytest.raises(DomainError):
            kerr_subpoissonian_boundary(1.0, 10.0)
