"""Thermal density matrices, photon statistics and Kerr closed forms."""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate, linalg, special

from anharmonic_cli.errors import (
    DimensionMismatchError,
    DomainError,
    InvalidDimensionError,
    InvalidParameterError,
    InvalidStateError,
    TruncationOverflowError,
    UnconvergedTruncationError,
    UndefinedStatisticError,
    UnstableSpectrumError,
)
from anharmonic_cli.fock import (
    CONVERGENCE_TOL,
    Basis,
    EigenSystem,
    FockOperator,
    ModelSpec,
    Model,
    build_hamiltonian,
    diagonalize,
)

logger = logging.getLogger(__name__)

BOLTZMANN_TAIL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-10
HERMITIAN_TOL = 1e-12
MAX_WORKING_DIM = 1280
ROUNDOFF_FACTOR = 64
MAX_POPULATION_DIM = 1 << 22
HIGH_T_VALIDITY = 100.0
SUBPOISSONIAN_VALIDITY = 0.3


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix."""

    elements: np.ndarray
    basis: Basis = Basis.FOCK

    def __post_init__(self) -> None:
        rho = np.asarray(self.elements, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise InvalidStateError(f"Density matrix must be square, got shape {rho.shape}")
        if rho.shape[0] < 2:
            raise InvalidDimensionError(f"Density matrix dimension must be >= 2, got {rho.shape[0]}")
        norm = np.linalg.norm(rho)
        if norm and np.linalg.norm(rho - rho.conj().T) / norm > HERMITIAN_TOL:
            raise InvalidStateError("Density matrix is not Hermitian")
        trace = np.trace(rho)
        if abs(trace - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"Density matrix trace is {trace.real:.12g}, expected 1")
        smallest = linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
        if smallest < -POSITIVITY_TOL:
            raise InvalidStateError(f"Density matrix has negative eigenvalue {smallest:.3e}")
        rho = rho.copy()
        rho.setflags(write=False)
        object.__setattr__(self, "elements", rho)

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    def expectation(self, op: FockOperator) -> complex:
        if op.dim != self.dim or op.basis != self.basis:
            raise DimensionMismatchError(
                f"State is {self.basis}[{self.dim}], operator is {op.basis}[{op.dim}]"
            )
        return complex(np.sum(self.elements * op.elements.T))


@dataclass(frozen=True)
class KerrStatistics:
    populations: np.ndarray
    mean_occupation: float
    g2: float


@dataclass(frozen=True)
class SubpoissonianBoundary:
    u_threshold: float
    temperature: float
    in_validity_regime: bool


def _boltzmann_weights(energies: np.ndarray, T: float) -> np.ndarray:
    if T < 0:
        raise InvalidParameterError(f"Temperature must be >= 0, got {T}")
    weights = np.zeros(len(energies))
    if T == 0:
        weights[0] = 1.0
        return weights
    weights = np.exp(-(energies - energies[0]) / T)
    return weights / weights.sum()


def _check_tail(weights: np.ndarray, tail: float | None) -> None:
    if tail is not None and weights[-1] >= tail:
        raise TruncationOverflowError(
            f"Top retained level carries weight {weights[-1]:.3e} >= {tail:.0e}; increase the truncation"
        )


def canonical_state(eigsys: EigenSystem, T: float, *, tail: float | None = BOLTZMANN_TAIL) -> DensityMatrix:
    """Canonical state e^{-H/T}/Z, diagonal in the retained eigenbasis.

    `tail=None` skips the truncation check, for comparisons at a fixed
    truncation.
    """
    weights = _boltzmann_weights(eigsys.energies, T)
    _check_tail(weights, tail)
    return DensityMatrix(np.diag(weights), Basis.EIGEN)


def naive_thermal_state(
    omega_a: float,
    T: float,
    dim: int,
    *,
    tail: float | None = BOLTZMANN_TAIL,
) -> DensityMatrix:
    """Bose-Einstein state of the bare mode, blind to any nonlinearity."""
    if dim < 2:
        raise InvalidDimensionError(f"dim must be >= 2, got {dim}")
    weights = _boltzmann_weights(omega_a * np.arange(dim, dtype=float), T)
    _check_tail(weights, tail)
    return DensityMatrix(np.diag(weights), Basis.FOCK)


def naive_dim(omega_a: float, T: float, tail: float = BOLTZMANN_TAIL) -> int:
    """Smallest Fock truncation whose top level passes the tail criterion."""
    if T <= 0:
        return 2
    return max(2, math.floor(-T * math.log(tail) / omega_a) + 2)


def select_keep(energies: np.ndarray, T: float, tail: float = BOLTZMANN_TAIL) -> int | None:
    """Smallest retained count whose top level has Boltzmann weight below tail."""
    if len(energies) < 2:
        return None
    if T == 0:
        return 2
    ratios = np.exp(-(np.asarray(energies) - energies[0]) / T)
    below = np.nonzero(ratios[1:] < tail)[0]
    if not len(below):
        return None
    return max(2, int(below[0]) + 2)


def _working_spectrum(spec: ModelSpec, dim: int) -> tuple[FockOperator, np.ndarray]:
    H = build_hamiltonian(replace(spec, dim=dim))
    if spec.model is Model.KERR:
        return H, np.sort(np.diag(H.elements).real)
    return H, linalg.eigvalsh(H.elements.real)


def _level_shift(coarse: np.ndarray, fine: np.ndarray, keep: int, omega_a: float) -> float:
    """Largest relative move of the lowest `keep` levels between two truncations.

    Moves below the eigensolver roundoff of the larger matrix do not count.
    """
    low, high = coarse[:keep], fine[:keep]
    roundoff = ROUNDOFF_FACTOR * np.finfo(float).eps * float(np.max(np.abs(fine)))
    moved = np.maximum(np.abs(low - high) - roundoff, 0.0)
    return float(np.max(moved / np.maximum(np.abs(high), omega_a)))


def thermal_eigensystem(
    spec: ModelSpec,
    T: float,
    *,
    tail: float = BOLTZMANN_TAIL,
    max_keep: int | None = None,
    max_dim: int = MAX_WORKING_DIM,
    tol: float = CONVERGENCE_TOL,
) -> EigenSystem:
    """Diagonalise with as many levels as the temperature needs.

    Only the lowest quarter of the working space is trusted, so the working
    dimension doubles until the tail criterion is met there and the retained
    energies stop moving under a further doubling. Kerr Hamiltonians are
    diagonal in the Fock basis and skip the doubling test.
    """
    dim = spec.dim
    H, energies = _working_spectrum(spec, dim)
    coarse: np.ndarray | None = None
    while True:
        keep = select_keep(energies[: dim // 4], T, tail)
        if keep is not None and spec.model is Model.KERR:
            break
        if 2 * dim > max_dim:
            if keep is None:
                raise TruncationOverflowError(
                    f"T={T:g} needs more levels than a working dimension of {max_dim} can hold"
                )
            if coarse is None:
                _, coarse = _working_spectrum(spec, dim // 2)
            shift = _level_shift(coarse, energies, keep, spec.omega_a)
            if shift >= tol:
                raise UnconvergedTruncationError(
                    f"Retained levels still move by {shift:.2e} at working dimension {dim}",
                    shift=shift,
                )
            break
        fine_H, fine = _working_spectrum(spec, 2 * dim)
        if keep is not None and _level_shift(energies, fine, keep, spec.omega_a) < tol:
            break
        coarse, H, energies, dim = energies, fine_H, fine, 2 * dim
    if max_keep is not None and keep > max_keep:
        raise TruncationOverflowError(f"T={T:g} needs {keep} retained levels, cap is {max_keep}")
    logger.debug("Retaining %d of %d levels at T=%g", keep, dim, T)
    return diagonalize(H, keep)


def to_fock(rho: DensityMatrix, eigsys: EigenSystem) -> DensityMatrix:
    if rho.basis is Basis.FOCK:
        return rho
    if rho.dim != eigsys.keep:
        raise DimensionMismatchError(f"State has dim {rho.dim}, eigensystem keeps {eigsys.keep}")
    v = eigsys.transform
    return DensityMatrix(v @ rho.elements @ v.conj().T, Basis.FOCK)


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    if rho.dim != sigma.dim or rho.basis != sigma.basis:
        raise DimensionMismatchError(
            f"Cannot compare {rho.basis}[{rho.dim}] with {sigma.basis}[{sigma.dim}]"
        )
    difference = rho.elements - sigma.elements
    return float(0.5 * np.sum(np.abs(linalg.eigvalsh(0.5 * (difference + difference.conj().T)))))


def g_n_statistic(rho: DensityMatrix, a: FockOperator, N: int) -> float:
    """⟨a†^N a^N⟩ / ⟨a†a⟩^N."""
    if N < 1:
        raise InvalidParameterError(f"N must be >= 1, got {N}")
    if a.dim != rho.dim or a.basis != rho.basis:
        raise DimensionMismatchError(f"State is {rho.basis}[{rho.dim}], operator is {a.basis}[{a.dim}]")
    mean = rho.expectation(a.dag() @ a).real
    if mean <= 1e-300:
        raise UndefinedStatisticError("⟨a†a⟩ vanishes; g(N) is undefined")
    a_n = np.linalg.matrix_power(a.elements, N)
    moment = np.trace(rho.elements @ a_n.conj().T @ a_n).real
    return float(moment / mean**N)


def photon_distribution(rho: DensityMatrix, eigsys: EigenSystem | None = None) -> np.ndarray:
    """P[n] = ⟨n|ρ|n⟩ in the Fock basis."""
    if rho.basis is Basis.EIGEN:
        if eigsys is None:
            raise InvalidStateError("An eigenbasis state needs its EigenSystem to reach the Fock basis")
        rho = to_fock(rho, eigsys)
    return np.clip(np.diag(rho.elements).real, 0.0, None)


def kerr_populations(
    omega_a: float,
    U: float,
    T: float,
    *,
    tail: float = BOLTZMANN_TAIL,
    start_dim: int = 64,
    max_dim: int = MAX_POPULATION_DIM,
) -> np.ndarray:
    """Canonical Kerr populations e^{-(nω + n(n-1)U)/T}/Z, truncated by the tail criterion."""
    if U < 0:
        raise UnstableSpectrumError("Attractive Kerr Hamiltonian is unbounded below")
    if T < 0:
        raise InvalidParameterError(f"Temperature must be >= 0, got {T}")
    if T == 0:
        return np.array([1.0, 0.0])
    dim = start_dim
    while dim <= max_dim:
        n = np.arange(dim, dtype=float)
        weights = np.exp(-(omega_a * n + U * n * (n - 1)) / T)
        weights /= weights.sum()
        if weights[-1] < tail:
            return weights
        dim *= 2
    raise TruncationOverflowError(f"Kerr populations at T={T:g}, U={U:g} exceed {max_dim} levels")


def kerr_thermal_statistics(omega_a: float, U: float, T: float, **kwargs) -> KerrStatistics:
    """Occupation and g(2) of the canonical Kerr ensemble."""
    populations = kerr_populations(omega_a, U, T, **kwargs)
    n = np.arange(len(populations), dtype=float)
    mean = float(n @ populations)
    if mean <= 1e-300:
        raise UndefinedStatisticError(f"Kerr occupation vanishes at T={T:g}")
    g2 = float((n * (n - 1)) @ populations / mean**2)
    return KerrStatistics(populations=populations, mean_occupation=mean, g2=g2)


def kerr_low_occupation_g2(omega_a: float, U: float, T: float) -> float:
    """Kerr g(2) with the canonical sums cut at two photons."""
    if T <= 0:
        raise DomainError(f"Low-occupation g(2) needs T > 0, got {T}")
    x = math.exp(-omega_a / T)
    y = math.exp(-2.0 * U / T)
    z = 1.0 + x + x * x * y
    return 2.0 * y * z / (1.0 + 2.0 * x * y) ** 2


def kerr_continuum_g2(omega_a: float, U: float, T: float) -> float:
    """Kerr g(2) with the photon number treated as a continuous variable."""
    if U <= 0 or T <= 0:
        raise DomainError(f"Continuum g(2) needs U > 0 and T > 0, got U={U}, T={T}")
    # shift the exponent by its minimum over n >= 0
    vertex = max(0.0, (U - omega_a) / (2.0 * U))
    offset = (omega_a - U) * vertex + U * vertex**2

    width = math.sqrt(T / U)
    if omega_a != U:
        width = min(width, T / abs(omega_a - U))
    scale = vertex + width

    def weight(s: float) -> float:
        n = scale * s
        return math.exp(-((omega_a - U) * n + U * n * n - offset) / T)

    moments = [
        scale ** (k + 1)
        * integrate.quad(lambda s, k=k: s**k * weight(s), 0.0, np.inf, epsabs=0.0, epsrel=1e-11, limit=200)[0]
        for k in range(3)
    ]
    m0, m1, m2 = moments
    return (m2 - m1) * m0 / m1**2


def kerr_high_T_occupation(omega_a: float, U: float, T: float) -> float:
    """High-temperature closed form for the Kerr occupation.

    ⟨n⟩ = 1/2 - ω/(2U) + √(T/πU) e^{-(ω-U)²/4TU} / (1 + Erf((U-ω)/2√(TU))),
    evaluated through erfcx so that large arguments do not overflow.
    """
    if U <= 0:
        raise DomainError(f"High-T occupation needs U > 0, got {U}")
    if T <= 0:
        raise DomainError(f"High-T occupation needs T > 0, got {T}")
    if T < HIGH_T_VALIDITY * omega_a:
        logger.warning(
            "T=%g is below %g ω_a; the continuum approximation is unreliable", T, HIGH_T_VALIDITY
        )
    argument = (omega_a - U) / (2.0 * math.sqrt(T * U))
    return 0.5 - omega_a / (2.0 * U) + math.sqrt(T / (math.pi * U)) / special.erfcx(argument)


def kerr_subpoissonian_boundary(omega_a: float, T: float) -> SubpoissonianBoundary:
    """Nonlinearity above which the low-temperature Kerr state is subpoissonian.

    U ≥ (T/2) ln(e^{ω/T} - 1 + √(e^{2ω/T} - 2e^{ω/T} - 1)) - ω/2, computed with
    e^{ω/T} factored out of the logarithm.
    """
    if T <= 0:
        raise DomainError(f"Subpoissonian boundary needs T > 0, got {T}")
    x = math.exp(-omega_a / T)
    discriminant = 1.0 - 2.0 * x - x * x
    if discriminant < 0:
        raise DomainError(f"T={T:g} is too hot for the subpoissonian boundary")
    threshold = 0.5 * T * math.log(1.0 - x + math.sqrt(discriminant))
    valid = 0.0 < T < SUBPOISSONIAN_VALIDITY * omega_a
    if not valid:
        logger.warning(
            "T=%g lies outside the low-temperature window (T < %g ω_a)", T, SUBPOISSONIAN_VALIDITY
        )
    return SubpoissonianBoundary(u_threshold=threshold, temperature=T, in_validity_regime=valid)
