"""Tests for the time-domain and augmented-system references."""

import numpy as np
import pytest

from anharmonic_cli.errors import MemoryGuardError, SensorCouplingError
from anharmonic_cli.field import frequency_components, mean_intensity
from anharmonic_cli.fock import Model, ModelSpec, eigensystem
from anharmonic_cli.lindblad import assemble_liouvillian, build_eigenbasis_dissipator, steady_state
from anharmonic_cli.oracle import (
    augmented_two_sensor,
    build_augmented_system,
    extrapolated_two_sensor,
    qrf_spectrum,
    spectrum_sum_rule,
)
from anharmonic_cli.spectra import SensorCorrelator, SensorParams, build_reordering_matrices


def open_setup(keep=4, T=1.0, gamma_a=0.05, spec=ModelSpec(Model.KERR, 0.2, dim=40)):
    eigsys = eigensystem(spec, keep)
    table = build_eigenbasis_dissipator(eigsys, gamma_a, T)
    M = assemble_liouvillian(eigsys.energies, table)
    components = frequency_components(eigsys, derivative=False)
    steady = steady_state(M)
    correlator = SensorCorrelator(M, build_reordering_matrices(components.plus, keep), steady)
    return eigsys, table, M, components, steady, correlator


class TestQrfSpectrum:
    def test_matches_sensor_spectrum(self):
        _, _, M, components, steady, correlator = open_setup()
        omegas = np.linspace(0.8, 2.0, 5)
        reference = qrf_spectrum(M, components.minus, components.plus, steady, omegas, 0.1)
        semi_analytic = correlator.spectrum(omegas, 0.1)
        assert np.max(np.abs(semi_analytic - reference.values)) < 1e-6 * np.max(reference.values)
        assert reference.horizon > 0

    def test_matches_sensor_spectrum_with_quartic_couplings(self):
        spec = ModelSpec(Model.QUARTIC, 0.1, dim=40)
        eigsys, _, M, components, steady, correlator = open_setup(keep=5, spec=spec)
        omegas = np.linspace(0.5 * eigsys.delta[1, 0], 1.5 * eigsys.delta[3, 2], 7)
        reference = qrf_spectrum(M, components.minus, components.plus, steady, omegas, 0.1)
        semi_analytic = correlator.spectrum(omegas, 0.1)
        assert np.count_nonzero(np.abs(np.triu(components.plus.elements, 2)) > 1e-8) > 0
        assert np.max(np.abs(semi_analytic - reference.values)) < 1e-6 * np.max(reference.values)


class TestSumRule:
    def test_spectrum_integrates_to_intensity(self):
        _, _, _, components, steady, correlator = open_setup(gamma_a=0.01)
        omegas = np.linspace(-4.0, 6.0, 5001)
        total = spectrum_sum_rule(omegas, correlator.spectrum(omegas, 0.02))
        assert total == pytest.approx(mean_intensity(steady, components), rel=1e-2)

    def test_trapezoid_of_constant(self):
        assert spectrum_sum_rule([0.0, 1.0, 2.0], [3.0, 3.0, 3.0]) == pytest.approx(6.0)


class TestAugmentedSystem:
    def test_dimension_guard(self):
        eigsys = eigensystem(ModelSpec(Model.KERR, 0.2, dim=40), 9)
        table = build_eigenbasis_dissipator(eigsys, 0.05, 1.0)
        plus = frequency_components(eigsys, derivative=False).plus
        sensors = (SensorParams(1.0, 0.1, 1e-3), SensorParams(1.4, 0.1, 1e-3))
        with pytest.raises(MemoryGuardError):
            build_augmented_system(eigsys.energies, table, plus, sensors)

    def test_strong_coupling_refused(self):
        eigsys, table, _, components, _, _ = open_setup()
        sensors = (SensorParams(1.0, 0.1, 0.5), SensorParams(1.4, 0.1, 0.5))
        with pytest.raises(SensorCouplingError):
            augmented_two_sensor(eigsys.energies, table, components.plus, sensors, 0.05)

    def test_augmented_dimension(self):
        eigsys, table, _, components, _, _ = open_setup()
        sensors = (SensorParams(1.0, 0.1, 1e-3), SensorParams(1.4, 0.1, 1e-3))
        augmented = build_augmented_system(eigsys.energies, table, components.plus, sensors)
        assert augmented.liouvillian.dim == 16
        assert augmented.liouvillian.trace_defect() < 1e-12

    def test_extrapolation_matches_hierarchy(self):
        eigsys, table, _, components, _, correlator = open_setup()
        omegas = (float(eigsys.delta[1, 0]), float(eigsys.delta[2, 1]))
        hierarchy = correlator.two_photon_correlation(SensorParams(omegas[0], 0.1), SensorParams(omegas[1], 0.1))
        reference = extrapolated_two_sensor(eigsys.energies, table, components.plus, omegas, (0.1, 0.1), 0.05)
        assert reference.g2 == pytest.approx(hierarchy, rel=1e-2)
        assert reference.couplings[1] == pytest.approx(0.5 * reference.couplings[0])
