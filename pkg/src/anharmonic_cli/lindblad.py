"""Thermal dissipators, the vectorised Liouvillian and its steady state.

Density matrices are vectorised row-major: ⟨j|ρ|k⟩ sits at index j*D + k,
so vec(AρB) = (A ⊗ Bᵀ) vec(ρ).
"""

import logging
import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import linalg, sparse
from scipy.sparse import linalg as sparse_linalg

from anharmonic_cli.errors import (
    DimensionMismatchError,
    DomainError,
    InvalidParameterError,
    NonUniqueSteadyStateError,
    SolverError,
)
from anharmonic_cli.fock import (
    Basis,
    EigenSystem,
    FockOperator,
    build_ladder_operators,
    degenerate_transitions,
)
from anharmonic_cli.thermal import DensityMatrix

logger = logging.getLogger(__name__)

ZERO_FREQUENCY = 1e-9
DETAILED_BALANCE_TOL = 1e-12
RESIDUAL_TOL = 1e-10
NULL_TOL = 1e-10
DENSE_FALLBACK_LIMIT = 2500


def bose_occupation(delta: float, T: float) -> float:
    """1/(e^{Δ/T} - 1), zero at T = 0."""
    if delta <= 0:
        raise DomainError(f"Bose occupation needs a positive frequency, got {delta}")
    if T < 0:
        raise InvalidParameterError(f"Temperature must be >= 0, got {T}")
    if T == 0:
        return 0.0
    return 1.0 / math.expm1(delta / T)


@dataclass(frozen=True)
class Channel:
    """A Lindblad channel rate·D[J]."""

    operator: np.ndarray
    rate: float


@dataclass(frozen=True, eq=False)
class RateTable:
    """Transition rates between retained eigenstates, one row per (j, k > j)."""

    dim: int
    temperature: float
    lower: np.ndarray
    upper: np.ndarray
    gamma: np.ndarray
    nbar: np.ndarray
    delta: np.ndarray

    def __post_init__(self) -> None:
        if np.any(self.gamma < 0) or np.any(self.nbar < 0):
            raise InvalidParameterError("Transition rates and occupations must be non-negative")
        if self.temperature > 0 and len(self):
            ratio = self.nbar / (1.0 + self.nbar)
            expected = np.exp(-self.delta / self.temperature)
            if np.max(np.abs(ratio - expected)) > DETAILED_BALANCE_TOL:
                raise InvalidParameterError("Rate table violates detailed balance")

    def __len__(self) -> int:
        return len(self.gamma)

    @property
    def downward(self) -> np.ndarray:
        return self.gamma * (1.0 + self.nbar)

    @property
    def upward(self) -> np.ndarray:
        return self.gamma * self.nbar

    def channels(self) -> list[Channel]:
        """Jump operators |j⟩⟨k| and |k⟩⟨j| as explicit channels."""
        out = []
        for j, k, down, up in zip(self.lower, self.upper, self.downward, self.upward):
            lowering = np.zeros((self.dim, self.dim))
            lowering[j, k] = 1.0
            out.append(Channel(lowering, float(down)))
            if up > 0:
                out.append(Channel(lowering.T.copy(), float(up)))
        return out


def build_eigenbasis_dissipator(
    eigsys: EigenSystem,
    gamma_a: float,
    T: float,
    *,
    omega_a: float = 1.0,
    coupling_tol: float = 1e-12,
) -> RateTable:
    """Secular thermal dissipator acting on the transitions |j⟩⟨k|."""
    if gamma_a <= 0:
        raise InvalidParameterError(f"gamma_a must be positive, got {gamma_a}")
    if T < 0:
        raise InvalidParameterError(f"Temperature must be >= 0, got {T}")

    degenerate = degenerate_transitions(eigsys, omega_a=omega_a)
    if degenerate:
        logger.warning(
            "%d pairs of degenerate transitions; the secular dissipator assumes distinct frequencies",
            len(degenerate),
        )

    cutoff = coupling_tol * max(np.max(np.abs(eigsys.c_table)), 1.0)
    rows = []
    for j, k in eigsys.transitions():
        coupling = eigsys.c_table[j, k]
        if abs(coupling) <= cutoff:
            continue
        delta = float(eigsys.delta[k, j])
        if delta < ZERO_FREQUENCY * omega_a:
            logger.warning("Dropping near-zero-frequency transition %d -> %d (Δ=%.2e)", k, j, delta)
            continue
        rows.append((j, k, gamma_a * abs(coupling) ** 2, bose_occupation(delta, T), delta))

    columns = [np.array(column) for column in zip(*rows)] if rows else [np.array([])] * 5
    lower, upper, gamma, nbar, delta = columns
    return RateTable(
        dim=eigsys.keep,
        temperature=T,
        lower=lower.astype(int),
        upper=upper.astype(int),
        gamma=gamma.astype(float),
        nbar=nbar.astype(float),
        delta=delta.astype(float),
    )


def build_naive_dissipator(
    gamma_a: float,
    T: float,
    dim: int,
    *,
    omega_a: float = 1.0,
    eigsys: EigenSystem | None = None,
) -> list[Channel]:
    """(1 + n̄) D[a] + n̄ D[a†] with the single occupation n̄(ω_a).

    With an eigensystem the ladder operators are rotated into its retained
    basis, so the result can share a Liouvillian with eigenbasis energies.
    """
    if gamma_a <= 0:
        raise InvalidParameterError(f"gamma_a must be positive, got {gamma_a}")
    nbar = bose_occupation(omega_a, T)
    if eigsys is None:
        a, a_dagger = build_ladder_operators(dim)
    else:
        a, a_dagger = (eigsys.to_eigenbasis(op) for op in build_ladder_operators(eigsys.dim_work))
    channels = [Channel(a.elements, gamma_a * (1.0 + nbar))]
    if nbar > 0:
        channels.append(Channel(a_dagger.elements, gamma_a * nbar))
    return channels


@dataclass(frozen=True, eq=False)
class DensityVector:
    entries: np.ndarray
    dim: int

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=complex).ravel()
        if entries.shape[0] != self.dim**2:
            raise DimensionMismatchError(
                f"Vector of length {entries.shape[0]} is not a {self.dim}x{self.dim} state"
            )
        object.__setattr__(self, "entries", entries)

    @classmethod
    def vacuum(cls, dim: int) -> "DensityVector":
        entries = np.zeros(dim * dim, dtype=complex)
        entries[0] = 1.0
        return cls(entries, dim)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "DensityVector":
        matrix = np.asarray(matrix)
        return cls(matrix.ravel(), matrix.shape[0])

    def to_matrix(self) -> np.ndarray:
        return self.entries.reshape(self.dim, self.dim)

    def trace(self) -> complex:
        return complex(self.entries[:: self.dim + 1].sum())

    def to_density_matrix(self, basis: Basis = Basis.EIGEN) -> DensityMatrix:
        return DensityMatrix(self.to_matrix(), basis)


@dataclass(frozen=True, eq=False)
class LiouvillianMatrix:
    """Sparse D²×D² generator of the vectorised master equation."""

    matrix: sparse.csr_array
    dim: int
    basis: Basis = Basis.EIGEN

    @property
    def size(self) -> int:
        return self.dim * self.dim

    @cached_property
    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def trace_row(self) -> np.ndarray:
        row = np.zeros(self.size)
        row[:: self.dim + 1] = 1.0
        return row

    def trace_defect(self) -> float:
        """Largest entry of vec(1)ᵀ M, zero for a trace-preserving generator."""
        return float(np.max(np.abs(self.matrix.T @ self.trace_row())))

    def apply(self, vector: DensityVector) -> DensityVector:
        if vector.dim != self.dim:
            raise DimensionMismatchError(
                f"Vector dim {vector.dim} does not match Liouvillian dim {self.dim}"
            )
        return DensityVector(self.matrix @ vector.entries, self.dim)


def _lindblad_term(jump: np.ndarray) -> sparse.csr_array:
    jump = sparse.csr_array(jump)
    identity = sparse.eye_array(jump.shape[0], format="csr")
    jdj = (jump.conj().T @ jump).tocsr()
    return sparse.csr_array(
        sparse.kron(jump, jump.conj(), format="csr")
        - 0.5 * sparse.kron(jdj, identity, format="csr")
        - 0.5 * sparse.kron(identity, jdj.T, format="csr")
    )


def _transition_term(table: RateTable) -> sparse.csr_array:
    # D[|j⟩⟨k|] by direct indexing: population transfer plus coherence decay
    dim = table.dim
    outflow = np.zeros(dim)
    rows, cols, values = [], [], []
    for j, k, down, up in zip(table.lower, table.upper, table.downward, table.upward):
        rows += [j * dim + j, k * dim + k]
        cols += [k * dim + k, j * dim + j]
        values += [down, up]
        outflow[k] += down
        outflow[j] += up
    transfer = sparse.coo_array((values, (rows, cols)), shape=(dim * dim, dim * dim))
    decay = sparse.diags_array(-0.5 * (outflow[:, None] + outflow[None, :]).ravel())
    return sparse.csr_array(transfer.tocsr() + decay)


def assemble_liouvillian(
    hamiltonian: np.ndarray | FockOperator,
    dissipator: RateTable | Sequence[Channel],
) -> LiouvillianMatrix:
    """M = -i[H, ·] plus every dissipative channel.

    `hamiltonian` is either the retained eigenenergies (eigenbasis) or a
    full operator matrix.
    """
    if isinstance(hamiltonian, FockOperator):
        dim, basis = hamiltonian.dim, hamiltonian.basis
        h = sparse.csr_array(hamiltonian.elements)
        identity = sparse.eye_array(dim, format="csr")
        generator = -1j * (sparse.kron(h, identity, format="csr") - sparse.kron(identity, h.T, format="csr"))
    else:
        energies = np.asarray(hamiltonian, dtype=float)
        dim, basis = energies.shape[0], Basis.EIGEN
        generator = sparse.diags_array(-1j * (energies[:, None] - energies[None, :]).ravel())
    generator = sparse.csr_array(generator, dtype=complex)

    if isinstance(dissipator, RateTable):
        if dissipator.dim != dim:
            raise DimensionMismatchError(
                f"Rate table is for dim {dissipator.dim}, Hamiltonian has dim {dim}"
            )
        generator = generator + _transition_term(dissipator)
    else:
        for channel in dissipator:
            if channel.operator.shape != (dim, dim):
                raise DimensionMismatchError(
                    f"Jump operator of shape {channel.operator.shape} does not match dim {dim}"
                )
            generator = generator + channel.rate * _lindblad_term(channel.operator)

    return LiouvillianMatrix(sparse.csr_array(generator), dim, basis)


def _null_vector(M: LiouvillianMatrix) -> np.ndarray:
    if M.size > DENSE_FALLBACK_LIMIT:
        raise SolverError(
            f"Bordered steady-state solve failed and D²={M.size} is too large for the dense fallback"
        )
    eigenvalues, vectors = linalg.eig(M.dense)
    scale = max(1.0, float(np.max(np.abs(eigenvalues))))
    zero = np.nonzero(np.abs(eigenvalues) < NULL_TOL * scale)[0]
    if len(zero) > 1:
        raise NonUniqueSteadyStateError(f"Liouvillian has {len(zero)} zero eigenvalues")
    return vectors[:, np.argmin(np.abs(eigenvalues))]


def steady_state(M: LiouvillianMatrix) -> DensityVector:
    """Null vector of M from the bordered system with row 0 replaced by the trace."""
    bordered = M.matrix.tolil(copy=True)
    bordered[0, :] = M.trace_row()
    b = np.zeros(M.size, dtype=complex)
    b[0] = 1.0
    tolerance = RESIDUAL_TOL * max(1.0, float(np.max(np.abs(M.matrix.data), initial=0.0)))

    solution = None
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", sparse_linalg.MatrixRankWarning)
            solution = sparse_linalg.spsolve(bordered.tocsc(), b)
    except (RuntimeError, sparse_linalg.MatrixRankWarning) as e:
        logger.debug("Bordered solve failed: %s", e)

    def finish(vector: np.ndarray) -> np.ndarray:
        rho = vector.reshape(M.dim, M.dim)
        rho = 0.5 * (rho + rho.conj().T)
        return (rho / np.trace(rho)).ravel()

    if solution is not None and np.all(np.isfinite(solution)):
        candidate = finish(solution)
        if np.linalg.norm(M.matrix @ candidate) < tolerance:
            return DensityVector(candidate, M.dim)
        logger.debug("Bordered solution residual too large, falling back to eigenvectors")

    candidate = finish(_null_vector(M))
    residual = float(np.linalg.norm(M.matrix @ candidate))
    if residual >= tolerance:
        raise SolverError(f"Steady-state residual {residual:.2e} exceeds {tolerance:.0e}")
    return DensityVector(candidate, M.dim)


def propagate(M: LiouvillianMatrix, v0: DensityVector, tau: float) -> DensityVector:
    """v(τ) = e^{Mτ} v(0)."""
    if tau < 0:
        raise InvalidParameterError(f"tau must be >= 0, got {tau}")
    if v0.dim != M.dim:
        raise DimensionMismatchError(f"Vector dim {v0.dim} does not match Liouvillian dim {M.dim}")
    if tau == 0:
        return DensityVector(v0.entries.copy(), v0.dim)
    return DensityVector(sparse_linalg.expm_multiply(tau * M.matrix, v0.entries), M.dim)


def liouvillian_spectrum(M: LiouvillianMatrix) -> np.ndarray:
    """Eigenvalues of M sorted by decreasing real part."""
    if M.size > DENSE_FALLBACK_LIMIT:
        raise SolverError(f"Dense spectrum of a {M.size}x{M.size} Liouvillian is not supported")
    eigenvalues = linalg.eigvals(M.dense)
    return eigenvalues[np.lexsort((eigenvalues.imag, -eigenvalues.real))]
