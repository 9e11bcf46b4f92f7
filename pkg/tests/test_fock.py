"""Tests for Fock-space operators and Hamiltonians."""

import math

import numpy as np
import pytest

from anharmonic_cli.errors import (
    InvalidDimensionError,
    InvalidOperatorError,
    InvalidParameterError,
    UnstableSpectrumError,
)
from anharmonic_cli.fock import (
    Basis,
    FockOperator,
    Model,
    ModelSpec,
    attractive_model,
    build_hamiltonian,
    build_ladder_operators,
    check_truncation,
    circuit_params_to_model,
    degenerate_transitions,
    diagonalize,
    eigensystem,
    kerr_transition_energies,
    quadrature_operators,
    working_dim,
)


class TestLadderOperators:
    def test_matrix_elements(self):
        a, a_dagger = build_ladder_operators(5)
        assert a.elements[0, 1] == 1.0
        assert a.elements[1, 2] == pytest.approx(math.sqrt(2))
        assert np.allclose(a_dagger.elements, a.elements.T)

    def test_commutator_is_identity_below_the_cut(self):
        a, a_dagger = build_ladder_operators(6)
        commutator = (a @ a_dagger).elements - (a_dagger @ a).elements
        assert np.allclose(np.diag(commutator)[:-1], 1.0)
        assert commutator[-1, -1] == pytest.approx(-5.0)

    def test_quadratures_are_hermitian(self):
        x, p = quadrature_operators(8)
        assert x.is_hermitian()
        assert p.is_hermitian()

    def test_rejects_tiny_dimension(self):
        with pytest.raises(InvalidDimensionError):
            build_ladder_operators(1)


class TestFockOperator:
    def test_rejects_non_square(self):
        with pytest.raises(InvalidOperatorError):
            FockOperator(np.zeros((2, 3)))

    def test_elements_are_read_only(self):
        op = FockOperator(np.eye(3))
        with pytest.raises(ValueError):
            op.elements[0, 0] = 2.0


class TestModelSpec:
    def test_odd_extra_order_rejected(self):
        with pytest.raises(InvalidParameterError):
            ModelSpec(Model.SERIES, 0.01, extra_orders=((7, 0.1),))

    def test_negative_leading_term_is_unstable(self):
        with pytest.raises(UnstableSpectrumError):
            ModelSpec(Model.QUARTIC, -0.01).check_stability()

    def test_positive_sextic_stabilises(self):
        ModelSpec(Model.SERIES, -0.01, extra_orders=((6, 0.001),)).check_stability()

    def test_attractive_kerr_is_unstable(self):
        with pytest.raises(UnstableSpectrumError):
            build_hamiltonian(ModelSpec(Model.KERR, -0.1, dim=10))


class TestBuildHamiltonian:
    def test_kerr_is_diagonal(self):
        H = build_hamiltonian(ModelSpec(Model.KERR, 0.1, dim=6))
        n = np.arange(6)
        assert np.allclose(H.elements, np.diag(n + 0.1 * n * (n - 1)))

    def test_harmonic_limit(self):
        H = build_hamiltonian(ModelSpec(Model.QUARTIC, 0.0, dim=6))
        assert np.allclose(H.elements, np.diag(np.arange(6)))

    def test_cropped_elements_do_not_depend_on_dim(self):
        small = build_hamiltonian(ModelSpec(Model.QUARTIC, 0.01, dim=10))
        large = build_hamiltonian(ModelSpec(Model.QUARTIC, 0.01, dim=20))
        assert np.allclose(small.elements, large.elements[:10, :10], atol=1e-12)

    def test_quartic_ground_diagonal(self):
        # ⟨0|X⁴|0⟩ = 3
        H = build_hamiltonian(ModelSpec(Model.QUARTIC, 0.01, dim=10))
        assert H.elements[0, 0].real == pytest.approx(0.03)
        assert H.is_hermitian()


class TestCircuitMapping:
    def test_frequency_and_quartic_term(self):
        spec = circuit_params_to_model(0.01, 1.0)
        assert spec.omega_a == pytest.approx(math.sqrt(0.08))
        assert spec.U == pytest.approx(-0.01 / 12)
        order, coefficient = spec.extra_orders[0]
        assert order == 6
        assert coefficient > 0

    def test_attractive_model_recovers_parameters(self):
        spec = attractive_model(-0.01)
        assert spec.U == pytest.approx(-0.01)
        assert spec.omega_a == pytest.approx(1.0)
        assert spec.model is Model.SERIES

    def test_attractive_model_needs_negative_u(self):
        with pytest.raises(InvalidParameterError):
            attractive_model(0.01)


class TestDiagonalize:
    def test_kerr_eigensystem(self):
        eigsys = eigensystem(ModelSpec(Model.KERR, 0.1, dim=12), 4)
        assert np.allclose(eigsys.energies, [0.0, 1.0, 2.2, 3.6])
        assert eigsys.delta[1, 0] == pytest.approx(1.0)
        assert eigsys.c_table[1, 2] == pytest.approx(math.sqrt(2))

    def test_transition_energies_match_kerr_levels(self):
        eigsys = eigensystem(ModelSpec(Model.KERR, 0.1, dim=12), 4)
        expected = kerr_transition_energies(1.0, 0.1, 3)
        assert np.allclose(np.diag(eigsys.delta, k=-1), expected)

    def test_phase_convention(self):
        eigsys = eigensystem(ModelSpec(Model.QUARTIC, 0.02, dim=40), 6)
        v = eigsys.transform
        pivots = v[np.argmax(np.abs(v), axis=0), np.arange(6)]
        assert np.all(pivots.real > 0)
        assert np.allclose(pivots.imag, 0.0)

    def test_c_table_is_rotated_quadrature(self):
        eigsys = eigensystem(ModelSpec(Model.QUARTIC, 0.02, dim=40), 6)
        x, _ = quadrature_operators(40)
        rotated = eigsys.to_eigenbasis(x)
        assert rotated.basis is Basis.EIGEN
        assert np.allclose(rotated.elements, eigsys.c_table)

    def test_quartic_only_couples_opposite_parity(self):
        eigsys = eigensystem(ModelSpec(Model.QUARTIC, 0.02, dim=40), 6)
        assert abs(eigsys.c_table[0, 2]) < 1e-10
        assert abs(eigsys.c_table[0, 3]) > 1e-4

    def test_keep_out_of_range(self):
        H = build_hamiltonian(ModelSpec(Model.KERR, 0.1, dim=5))
        with pytest.raises(InvalidDimensionError):
            diagonalize(H, 6)

    def test_non_hermitian_rejected(self):
        with pytest.raises(InvalidOperatorError):
            diagonalize(FockOperator(np.array([[0.0, 1.0], [0.0, 1.0]])), 2)


class TestDegenerateTransitions:
    def test_harmonic_ladder_is_degenerate(self):
        eigsys = eigensystem(ModelSpec(Model.KERR, 0.0, dim=10), 4)
        assert degenerate_transitions(eigsys)

    def test_kerr_splits_the_ladder(self):
        eigsys = eigensystem(ModelSpec(Model.KERR, 0.1, dim=10), 4)
        assert degenerate_transitions(eigsys) == []


class TestTransitionStructure:
    def test_attractive_ladder_narrows(self):
        eigsys = eigensystem(attractive_model(-0.01), 4)
        assert eigsys.delta[2, 1] < eigsys.delta[1, 0] < 1.0

    def test_repulsive_gap_grows_with_u(self):
        weak = eigensystem(ModelSpec(Model.QUARTIC, 0.01, dim=40), 3)
        strong = eigensystem(ModelSpec(Model.QUARTIC, 0.05, dim=40), 3)
        assert 1.0 < weak.delta[1, 0] < strong.delta[1, 0]
        assert strong.delta[1, 0] < strong.delta[2, 1]


class TestTruncation:
    def test_working_dim_floor(self):
        assert working_dim(3) == 40
        assert working_dim(20) == 80

    def test_weak_quartic_converges(self):
        report = check_truncation(ModelSpec(Model.QUARTIC, 1e-3, dim=40), 5)
        assert report.converged
        assert report.doubled_dim == 80
