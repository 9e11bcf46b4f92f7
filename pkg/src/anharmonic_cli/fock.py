"""Truncated Fock-space operators, resonator Hamiltonians and their eigensystems.

All energies are in units of the bare mode frequency unless a ModelSpec says
otherwise. Quadratures use X0 = P0 = 1, so X = a + a† and P = -i(a - a†).
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import StrEnum
from functools import cached_property

import numpy as np
from scipy import linalg

from anharmonic_cli.errors import (
    DimensionMismatchError,
    InvalidDimensionError,
    InvalidOperatorError,
    InvalidParameterError,
    UnstableSpectrumError,
)

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
DEGENERACY_TOL = 1e-9
CONVERGENCE_TOL = 1e-8
CIRCUIT_RATIO_WARNING = 0.1
MIN_WORKING_DIM = 40


class Basis(StrEnum):
    FOCK = "fock"
    EIGEN = "eigen"


class Model(StrEnum):
    KERR = "kerr"
    QUARTIC = "quartic"
    SERIES = "series"


def _readonly(array: np.ndarray) -> np.ndarray:
    out = np.array(array, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class FockOperator:
    """Dense operator on a truncated Fock or eigenstate space."""

    elements: np.ndarray
    basis: Basis = Basis.FOCK

    def __post_init__(self) -> None:
        elements = np.asarray(self.elements, dtype=complex)
        if elements.ndim != 2 or elements.shape[0] != elements.shape[1]:
            raise InvalidOperatorError(f"Operator must be square, got shape {elements.shape}")
        if elements.shape[0] < 2:
            raise InvalidDimensionError(f"Operator dimension must be >= 2, got {elements.shape[0]}")
        object.__setattr__(self, "elements", _readonly(elements))

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    def dag(self) -> "FockOperator":
        return FockOperator(self.elements.conj().T, self.basis)

    def hermiticity_error(self) -> float:
        """Relative Frobenius norm of the anti-Hermitian part."""
        norm = np.linalg.norm(self.elements)
        if norm == 0.0:
            return 0.0
        return float(np.linalg.norm(self.elements - self.elements.conj().T) / norm)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermiticity_error() < tol

    def __matmul__(self, other: "FockOperator") -> "FockOperator":
        if other.dim != self.dim or other.basis != self.basis:
            raise DimensionMismatchError(
                f"Cannot compose {self.basis}[{self.dim}] with {other.basis}[{other.dim}]"
            )
        return FockOperator(self.elements @ other.elements, self.basis)


@dataclass(frozen=True)
class ModelSpec:
    """Parameters of H = ω a†a + U (a+a†)^4 + Σ U_2n (a+a†)^2n, or of the Kerr form."""

    model: Model = Model.QUARTIC
    U: float = 0.0
    omega_a: float = 1.0
    extra_orders: tuple[tuple[int, float], ...] = ()
    dim: int = MIN_WORKING_DIM

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise InvalidDimensionError(f"Truncation dim must be >= 2, got {self.dim}")
        if self.omega_a <= 0:
            raise InvalidParameterError(f"omega_a must be positive, got {self.omega_a}")
        for order, _ in self.extra_orders:
            if order < 6 or order % 2:
                raise InvalidParameterError(f"Extra orders must be even and >= 6, got {order}")
        if self.model is Model.KERR and self.extra_orders:
            raise InvalidParameterError("The Kerr model takes no higher-order terms")

    def coefficients(self) -> dict[int, float]:
        """Potential coefficients keyed by the power of (a + a†)."""
        coefficients = {4: self.U}
        for order, value in self.extra_orders:
            coefficients[order] = coefficients.get(order, 0.0) + value
        return coefficients

    def check_stability(self) -> None:
        """Refuse potentials whose leading power has a negative coefficient."""
        if self.model is Model.KERR:
            if self.U < 0:
                raise UnstableSpectrumError("Attractive Kerr Hamiltonian is unbounded below")
            return
        nonzero = {order: c for order, c in self.coefficients().items() if c != 0.0}
        if not nonzero:
            return
        top = max(nonzero)
        if nonzero[top] < 0:
            raise UnstableSpectrumError(
                f"Leading term U_{top} = {nonzero[top]:g} is negative; "
                "add a positive higher-order term (e.g. U_6) to bound the spectrum"
            )


@dataclass(frozen=True)
class ConvergenceReport:
    dim: int
    doubled_dim: int
    max_change: float
    converged: bool


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Retained eigenstates of a Hamiltonian, ordered by energy.

    `transform` is the (dim_work x keep) isometry whose columns are the
    eigenvectors in the Fock basis; `delta[k, j]` is ε_k - ε_j and
    `c_table[j, k]` is ⟨j|(a + a†)|k⟩.
    """

    energies: np.ndarray
    transform: np.ndarray
    delta: np.ndarray
    c_table: np.ndarray

    def __post_init__(self) -> None:
        for name in ("energies", "transform", "delta", "c_table"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))

    @property
    def keep(self) -> int:
        return self.energies.shape[0]

    @property
    def dim_work(self) -> int:
        return self.transform.shape[0]

    @cached_property
    def hamiltonian(self) -> FockOperator:
        return FockOperator(np.diag(self.energies), Basis.EIGEN)

    def transitions(self) -> list[tuple[int, int]]:
        """All (j, k) pairs with k > j."""
        return [(j, k) for k in range(self.keep) for j in range(k)]

    def to_eigenbasis(self, op: FockOperator) -> FockOperator:
        if op.basis is not Basis.FOCK or op.dim != self.dim_work:
            raise DimensionMismatchError(
                f"Expected a Fock operator of dim {self.dim_work}, got {op.basis}[{op.dim}]"
            )
        v = self.transform
        return FockOperator(v.conj().T @ op.elements @ v, Basis.EIGEN)


def working_dim(keep: int) -> int:
    """Default diagonalisation dimension for `keep` retained levels."""
    return max(4 * keep, MIN_WORKING_DIM)


def build_ladder_operators(dim: int) -> tuple[FockOperator, FockOperator]:
    """Truncated annihilation and creation operators."""
    if dim < 2:
        raise InvalidDimensionError(f"Ladder operators need dim >= 2, got {dim}")
    a = FockOperator(np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1))
    return a, a.dag()


def quadrature_operators(dim: int) -> tuple[FockOperator, FockOperator]:
    """X = a + a† and P = -i(a - a†)."""
    a, a_dagger = build_ladder_operators(dim)
    x = FockOperator(a.elements + a_dagger.elements)
    p = FockOperator(-1j * (a.elements - a_dagger.elements))
    return x, p


def build_hamiltonian(spec: ModelSpec) -> FockOperator:
    """Hamiltonian matrix in the Fock basis.

    Powers of (a + a†) are taken in a padded space and cropped so that every
    retained element is exact.
    """
    spec.check_stability()
    n = np.arange(spec.dim, dtype=float)
    if spec.model is Model.KERR:
        return FockOperator(np.diag(spec.omega_a * n + spec.U * n * (n - 1)))

    coefficients = spec.coefficients()
    padded = spec.dim + max(coefficients)
    a = np.diag(np.sqrt(np.arange(1, padded, dtype=float)), k=1)
    x = a + a.T
    h = np.diag(spec.omega_a * np.arange(padded, dtype=float))
    for order, coefficient in sorted(coefficients.items()):
        if coefficient != 0.0:
            h = h + coefficient * np.linalg.matrix_power(x, order)
    h = 0.5 * (h + h.T)
    return FockOperator(h[: spec.dim, : spec.dim])


def circuit_params_to_model(
    E_C: float,
    E_J: float,
    max_order: int = 6,
    dim: int = 2 * MIN_WORKING_DIM,
) -> ModelSpec:
    """Series model of a Josephson nonlinearity.

    Uses φ = (2E_C/E_J)^(1/4) (a + a†), which gives ω = √(8 E_C E_J),
    U = -E_C/12 and U_2n = -E_J (-√(2E_C/E_J))^n / (2n)!.
    """
    if E_C <= 0 or E_J <= 0:
        raise InvalidParameterError(f"E_C and E_J must be positive, got {E_C}, {E_J}")
    if max_order < 4 or max_order % 2:
        raise InvalidParameterError(f"max_order must be even and >= 4, got {max_order}")
    if E_C / E_J > CIRCUIT_RATIO_WARNING:
        logger.warning(
            "E_C/E_J = %.3g exceeds %.1f; series truncation is doubtful", E_C / E_J, CIRCUIT_RATIO_WARNING
        )

    xi = math.sqrt(2.0 * E_C / E_J)

    def coefficient(n: int) -> float:
        return -E_J * (-xi) ** n / math.factorial(2 * n)

    extra = tuple((2 * n, coefficient(n)) for n in range(3, max_order // 2 + 1))
    return ModelSpec(
        model=Model.SERIES if extra else Model.QUARTIC,
        U=coefficient(2),
        omega_a=math.sqrt(8.0 * E_C * E_J),
        extra_orders=extra,
        dim=dim,
    )


def attractive_model(U: float, omega_a: float = 1.0, dim: int = 2 * MIN_WORKING_DIM) -> ModelSpec:
    """Attractive quartic model stabilised by the U_6 term of the circuit mapping."""
    if U >= 0:
        raise InvalidParameterError(f"Attractive model needs U < 0, got {U}")
    E_C = -12.0 * U
    E_J = omega_a**2 / (8.0 * E_C)
    return circuit_params_to_model(E_C, E_J, max_order=6, dim=dim)


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    # largest-magnitude component of each column made real-positive
    rows = np.argmax(np.abs(vectors), axis=0)
    pivots = vectors[rows, np.arange(vectors.shape[1])]
    return vectors * (np.abs(pivots) / pivots)[None, :]


def diagonalize(H: FockOperator, keep: int) -> EigenSystem:
    """Diagonalise H and retain its `keep` lowest eigenstates."""
    if keep < 2 or keep > H.dim:
        raise InvalidDimensionError(f"keep must lie in [2, {H.dim}], got {keep}")
    if not H.is_hermitian():
        raise InvalidOperatorError(
            f"Hamiltonian is not Hermitian (relative error {H.hermiticity_error():.2e})"
        )

    h = H.elements
    is_real = not np.any(h.imag)
    if not np.any(h - np.diag(np.diag(h))):
        diagonal = np.diag(h).real
        order = np.argsort(diagonal, kind="stable")
        energies = diagonal[order]
        vectors = np.eye(H.dim)[:, order]
    else:
        matrix = h.real if is_real else 0.5 * (h + h.conj().T)
        energies, vectors = linalg.eigh(matrix)

    vectors = _fix_phases(vectors[:, :keep])
    energies = energies[:keep]
    x, _ = quadrature_operators(H.dim)
    c_table = vectors.conj().T @ x.elements @ vectors
    if np.max(np.abs(c_table.imag), initial=0.0) < HERMITIAN_TOL:
        c_table = c_table.real
    if is_real:
        vectors = vectors.real

    return EigenSystem(
        energies=energies,
        transform=vectors,
        delta=energies[:, None] - energies[None, :],
        c_table=c_table,
    )


def eigensystem(spec: ModelSpec, keep: int) -> EigenSystem:
    return diagonalize(build_hamiltonian(spec), keep)


def kerr_transition_energies(omega_a: float, U: float, n_max: int) -> np.ndarray:
    """Δε_n = ω + 2(n - 1)U for n = 1..n_max."""
    if n_max < 1:
        raise InvalidParameterError(f"n_max must be >= 1, got {n_max}")
    n = np.arange(1, n_max + 1, dtype=float)
    return omega_a + 2.0 * (n - 1.0) * U


def degenerate_transitions(
    eigsys: EigenSystem,
    tol: float = DEGENERACY_TOL,
    omega_a: float = 1.0,
    min_coupling: float = 1e-12,
) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Pairs of coupled transitions whose frequencies coincide within tol·ω."""
    scale = np.max(np.abs(eigsys.c_table), initial=0.0)
    pairs = [
        (j, k)
        for j, k in eigsys.transitions()
        if abs(eigsys.c_table[j, k]) > min_coupling * max(scale, 1.0)
    ]
    if len(pairs) < 2:
        return []
    frequencies = np.array([eigsys.delta[k, j] for j, k in pairs])
    order = np.argsort(frequencies, kind="stable")
    found = []
    for first, second in zip(order[:-1], order[1:]):
        if frequencies[second] - frequencies[first] < tol * omega_a:
            found.append((pairs[first], pairs[second]))
    return found


def check_truncation(spec: ModelSpec, keep: int, tol: float = CONVERGENCE_TOL) -> ConvergenceReport:
    """Doubling test: retained energies must not move when dim doubles."""
    low = eigensystem(spec, keep).energies
    doubled = replace(spec, dim=2 * spec.dim)
    high = eigensystem(doubled, keep).energies
    change = float(np.max(np.abs(low - high) / np.maximum(np.abs(high), spec.omega_a)))
    converged = change < tol
    if not converged:
        logger.warning(
            "Truncation not converged: dim %d -> %d moves retained levels by %.2e",
            spec.dim,
            doubled.dim,
            change,
        )
    return ConvergenceReport(spec.dim, doubled.dim, change, converged)
