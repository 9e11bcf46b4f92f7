"""Frequency-split output field operators and full-field photon correlations."""

from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from anharmonic_cli.errors import DimensionMismatchError, InvalidOperatorError, UndefinedStatisticError
from anharmonic_cli.fock import Basis, EigenSystem, FockOperator, quadrature_operators
from anharmonic_cli.lindblad import DensityVector, LiouvillianMatrix, propagate
from anharmonic_cli.thermal import DensityMatrix

INTENSITY_FLOOR = 1e-300


class Quadrature(StrEnum):
    X = "X"
    P = "P"


@dataclass(frozen=True, eq=False)
class FrequencyComponents:
    """Positive (plus) and negative (minus) frequency parts of a quadrature or its derivative."""

    plus: FockOperator
    minus: FockOperator
    quadrature: Quadrature = Quadrature.X
    derivative: bool = True

    def __post_init__(self) -> None:
        if np.any(np.tril(self.plus.elements)):
            raise InvalidOperatorError("Positive-frequency part must be strictly upper triangular")
        if np.max(np.abs(self.minus.elements - self.plus.elements.conj().T)) > 1e-12:
            raise InvalidOperatorError("Negative-frequency part must be the adjoint of the positive part")

    @property
    def dim(self) -> int:
        return self.plus.dim


def quadrature_matrix(eigsys: EigenSystem, quadrature: Quadrature = Quadrature.X) -> np.ndarray:
    x, p = quadrature_operators(eigsys.dim_work)
    chosen = x if quadrature is Quadrature.X else p
    return eigsys.to_eigenbasis(chosen).elements


def frequency_components(
    eigsys: EigenSystem,
    quadrature: Quadrature = Quadrature.X,
    *,
    derivative: bool = True,
) -> FrequencyComponents:
    """Split a quadrature (or its time derivative) into lowering and raising parts.

    Ẋ⁺ = -i Σ_{k>j} Δ_kj X_jk |j⟩⟨k|; without `derivative` the Δ_kj factor
    and the phase are dropped.
    """
    upper = np.triu(quadrature_matrix(eigsys, quadrature), k=1)
    if derivative:
        upper = -1j * eigsys.delta.T * upper
    plus = FockOperator(upper, Basis.EIGEN)
    return FrequencyComponents(plus=plus, minus=plus.dag(), quadrature=quadrature, derivative=derivative)


def _state_matrix(rho: DensityMatrix | DensityVector, comps: FrequencyComponents) -> np.ndarray:
    if isinstance(rho, DensityVector):
        matrix = rho.to_matrix()
    else:
        if rho.basis is not Basis.EIGEN:
            raise DimensionMismatchError("Field observables need a state in the eigenbasis")
        matrix = rho.elements
    if matrix.shape[0] != comps.dim:
        raise DimensionMismatchError(f"State dim {matrix.shape[0]} does not match field dim {comps.dim}")
    return matrix


def _check_liouvillian(M: LiouvillianMatrix, comps: FrequencyComponents) -> None:
    if M.dim != comps.dim or M.basis is not Basis.EIGEN:
        raise DimensionMismatchError(
            f"Liouvillian {M.basis}[{M.dim}] does not match eigenbasis field of dim {comps.dim}"
        )


def mean_intensity(rho: DensityMatrix | DensityVector, comps: FrequencyComponents) -> float:
    """⟨minus · plus⟩."""
    matrix = _state_matrix(rho, comps)
    return float(np.trace(matrix @ comps.minus.elements @ comps.plus.elements).real)


def _intensity(rho: DensityMatrix | DensityVector, comps: FrequencyComponents) -> float:
    intensity = mean_intensity(rho, comps)
    if intensity <= INTENSITY_FLOOR:
        raise UndefinedStatisticError("Mean output intensity vanishes; g(2) is undefined")
    return intensity


def g2_zero_delay(rho: DensityMatrix | DensityVector, comps: FrequencyComponents) -> float:
    intensity = _intensity(rho, comps)
    matrix = _state_matrix(rho, comps)
    m, p = comps.minus.elements, comps.plus.elements
    return float(np.trace(matrix @ m @ m @ p @ p).real / intensity**2)


def g2_delayed(
    M: LiouvillianMatrix,
    rho: DensityMatrix | DensityVector,
    comps: FrequencyComponents,
    tau: float,
) -> float:
    """g(2)(τ) by propagating p ρ m under M and measuring m p."""
    _check_liouvillian(M, comps)
    intensity = _intensity(rho, comps)
    matrix = _state_matrix(rho, comps)
    m, p = comps.minus.elements, comps.plus.elements
    conditioned = DensityVector.from_matrix(p @ matrix @ m)
    evolved = propagate(M, conditioned, tau).to_matrix()
    return float(np.trace(m @ p @ evolved).real / intensity**2)


def first_order_coherence(
    M: LiouvillianMatrix,
    rho: DensityMatrix | DensityVector,
    comps: FrequencyComponents,
    tau: float,
) -> complex:
    """g(1)(τ) = ⟨m(0) p(τ)⟩ / ⟨m p⟩."""
    _check_liouvillian(M, comps)
    intensity = _intensity(rho, comps)
    matrix = _state_matrix(rho, comps)
    evolved = propagate(M, DensityVector.from_matrix(matrix @ comps.minus.elements), tau).to_matrix()
    return complex(np.trace(comps.plus.elements @ evolved) / intensity)
