"""Tests for frequency-split field operators and photon correlations."""

import math

import numpy as np
import pytest

from anharmonic_cli.errors import DimensionMismatchError, InvalidOperatorError, UndefinedStatisticError
from anharmonic_cli.field import (
    FrequencyComponents,
    Quadrature,
    first_order_coherence,
    frequency_components,
    g2_delayed,
    g2_zero_delay,
    mean_intensity,
)
from anharmonic_cli.fock import Basis, FockOperator, Model, ModelSpec, eigensystem
from anharmonic_cli.lindblad import (
    assemble_liouvillian,
    build_eigenbasis_dissipator,
    build_naive_dissipator,
    steady_state,
)
from anharmonic_cli.thermal import DensityMatrix, canonical_state, thermal_eigensystem


class TestFrequencyComponents:
    def test_plus_lowers_energy(self):
        eigsys = eigensystem(ModelSpec(Model.KERR, 0.1, dim=12), 4)
        comps = frequency_components(eigsys, derivative=False)
        assert np.allclose(np.tril(comps.plus.elements), 0.0)
        assert comps.plus.elements[0, 1] == pytest.approx(1.0)

    def test_plus_annihilates_ground_state(self):
        eigsys = eigensystem(ModelSpec(Model.QUARTIC, 0.05, dim=30), 6)
        comps = frequency_components(eigsys)
        assert np.allclose(comps.plus.elements[:, 0], 0.0)

    def test_derivative_weights_by_transition_frequency(self):
        eigsys = eigensystem(ModelSpec(Model.KERR, 0.1, dim=12), 4)
        comps = frequency_components(eigsys)
        # Δ_21 = 1.2, ⟨1|X|2⟩ = √2
        assert comps.plus.elements[1, 2] == pytest.approx(-1j * 1.2 * np.sqrt(2))

    def test_momentum_quadrature(self):
        eigsys = eigensystem(ModelSpec(Model.KERR, 0.1, dim=12), 4)
        comps = frequency_components(eigsys, Quadrature.P, derivative=False)
        assert comps.plus.elements[0, 1] == pytest.approx(-1j)

    def test_rejects_lower_triangular_plus(self):
        plus = FockOperator(np.array([[0.0, 0.0], [1.0, 0.0]]), Basis.EIGEN)
        with pytest.raises(InvalidOperatorError):
            FrequencyComponents(plus=plus, minus=plus.dag())


class TestZeroDelay:
    def test_intensity_is_occupation_for_kerr(self):
        eigsys = thermal_eigensystem(ModelSpec(Model.KERR, 0.2), 0.5)
        rho = canonical_state(eigsys, 0.5)
        comps = frequency_components(eigsys, derivative=False)
        occupation = np.diag(rho.elements).real @ np.arange(eigsys.keep)
        assert mean_intensity(rho, comps) == pytest.approx(occupation)

    def test_harmonic_thermal_light_is_bunched(self):
        eigsys = thermal_eigensystem(ModelSpec(Model.KERR, 0.0), 0.5)
        rho = canonical_state(eigsys, 0.5)
        assert g2_zero_delay(rho, frequency_components(eigsys)) == pytest.approx(2.0, abs=1e-8)

    def test_strong_nonlinearity_derivative_g2(self):
        U = T = math.exp(2)
        eigsys = thermal_eigensystem(ModelSpec(Model.QUARTIC, U), T)
        g2 = g2_zero_delay(canonical_state(eigsys, T), frequency_components(eigsys))
        assert g2 == pytest.approx(1.9315, abs=1e-3)

    def test_vacuum_has_undefined_g2(self):
        eigsys = eigensystem(ModelSpec(Model.KERR, 0.2, dim=12), 4)
        with pytest.raises(UndefinedStatisticError):
            g2_zero_delay(canonical_state(eigsys, 0.0), frequency_components(eigsys))

    def test_fock_state_rejected(self):
        eigsys = eigensystem(ModelSpec(Model.KERR, 0.2, dim=12), 4)
        rho = DensityMatrix(np.diag([0.5, 0.5, 0.0, 0.0]), Basis.FOCK)
        with pytest.raises(DimensionMismatchError):
            mean_intensity(rho, frequency_components(eigsys))


class TestDelayedCorrelations:
    def setup_method(self):
        self.eigsys = thermal_eigensystem(ModelSpec(Model.KERR, 0.2), 0.5)
        self.M = assemble_liouvillian(
            self.eigsys.energies, build_eigenbasis_dissipator(self.eigsys, 0.1, 0.5)
        )
        self.steady = steady_state(self.M)
        self.comps = frequency_components(self.eigsys)

    def test_zero_delay_limit(self):
        assert g2_delayed(self.M, self.steady, self.comps, 0.0) == pytest.approx(
            g2_zero_delay(self.steady, self.comps)
        )

    def test_long_delay_decorrelates(self):
        assert g2_delayed(self.M, self.steady, self.comps, 400.0) == pytest.approx(1.0, abs=1e-6)

    def test_first_order_coherence_starts_at_one(self):
        assert first_order_coherence(self.M, self.steady, self.comps, 0.0) == pytest.approx(1.0)

    def test_first_order_coherence_decays(self):
        assert abs(first_order_coherence(self.M, self.steady, self.comps, 400.0)) < 1e-6

    def test_harmonic_thermal_light_obeys_siegert(self):
        eigsys = thermal_eigensystem(ModelSpec(Model.KERR, 0.0), 0.5)
        channels = build_naive_dissipator(0.1, 0.5, eigsys.keep, eigsys=eigsys)
        M = assemble_liouvillian(eigsys.energies, channels)
        steady = steady_state(M)
        comps = frequency_components(eigsys, derivative=False)
        for tau in (2.0, 10.0):
            g1 = first_order_coherence(M, steady, comps, tau)
            assert g2_delayed(M, steady, comps, tau) == pytest.approx(1.0 + abs(g1) ** 2, abs=1e-6)
