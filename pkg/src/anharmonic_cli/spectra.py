"""Frequency-resolved one- and two-photon spectra from weakly coupled sensors.

Every sensor moment is a vector w[μ₁ν₁][μ₂ν₂] in the system Liouville space,
produced by one resolvent solve from lower moments:

    (M + z) w = -Σ μᵢ(-iεᵢ T₊) w[μᵢ→0] + νᵢ(iεᵢ T₋) w[νᵢ→0],
    z = Σ (νᵢ - μᵢ) iωᵢ - (μᵢ + νᵢ) Γᵢ/2,

with w[00][00] the steady state. Traces of w[11][00], w[00][11] and
w[11][11] give ⟨n₁⟩, ⟨n₂⟩ and ⟨n₁n₂⟩.
"""

import logging
import threading
import warnings
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from enum import StrEnum
from functools import lru_cache

import numpy as np
from scipy import linalg, signal, sparse

from anharmonic_cli.errors import (
    DimensionMismatchError,
    InvalidParameterError,
    SolverError,
    UndefinedCorrelationError,
)
from anharmonic_cli.fock import Basis, EigenSystem, FockOperator
from anharmonic_cli.lindblad import DensityVector, LiouvillianMatrix

logger = logging.getLogger(__name__)

BACKWARD_ERROR_TOL = 1e-10
IMAGINARY_RESIDUE = 1e-9
FACTOR_CACHE_BYTES = 512 * 1024**2
SINGLE_SENSOR_CACHE = 4096

SensorState = tuple[tuple[int, int], ...]


class Prefactor(StrEnum):
    NONE = "none"
    OMEGA_SQUARED = "omega_squared"


@dataclass(frozen=True)
class SensorParams:
    """A two-level sensor at frequency `omega` with linewidth `gamma`."""

    omega: float
    gamma: float
    epsilon: float = 1.0

    def __post_init__(self) -> None:
        if self.gamma <= 0:
            raise InvalidParameterError(f"Sensor linewidth must be positive, got {self.gamma}")
        if self.epsilon <= 0:
            raise InvalidParameterError(f"Sensor coupling must be positive, got {self.epsilon}")

    def coupling_bound(self, gamma_q: float) -> float:
        """√(Γ γ_Q / 2); the sensor is weakly coupled when ε is far below it."""
        return float(np.sqrt(self.gamma * gamma_q / 2.0))


@dataclass(frozen=True, eq=False)
class ReorderingMatrices:
    """Left multiplication by X⁺ and right multiplication by X⁻ on vectorised ρ."""

    t_plus: sparse.csr_array
    t_minus: sparse.csr_array
    dim: int
    basis: Basis = Basis.EIGEN


@dataclass(frozen=True, eq=False)
class CorrelationMap:
    omega1: np.ndarray
    omega2: np.ndarray
    values: np.ndarray
    s1_row: np.ndarray
    s1_col: np.ndarray
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SpectrumPeak:
    omega: float
    value: float
    lower: int | None = None
    upper: int | None = None
    transition: float | None = None


def build_reordering_matrices(x_plus: FockOperator, dim: int) -> ReorderingMatrices:
    if x_plus.dim != dim:
        raise DimensionMismatchError(f"X⁺ has dim {x_plus.dim}, Liouville space expects {dim}")
    xp = x_plus.elements.copy()
    xp[-1, :] = 0.0
    xm = xp.conj().T
    identity = sparse.eye_array(dim, format="csr")
    return ReorderingMatrices(
        t_plus=sparse.csr_array(sparse.kron(sparse.csr_array(xp), identity, format="csr")),
        t_minus=sparse.csr_array(sparse.kron(identity, sparse.csr_array(xm.T), format="csr")),
        dim=dim,
        basis=x_plus.basis,
    )


class ResolventCache:
    """Solves (M + z)x = -b, keeping LU factors of recently used shifts."""

    def __init__(
        self, matrix: np.ndarray, maxsize: int | None = None, tol: float = BACKWARD_ERROR_TOL
    ) -> None:
        self._matrix = matrix
        self._tol = tol
        self._norm = float(np.linalg.norm(matrix, 1))
        if maxsize is None:
            maxsize = max(8, FACTOR_CACHE_BYTES // (16 * matrix.size))
        self._factor = lru_cache(maxsize=maxsize)(self._factorize)

    def _shifted(self, shift: complex) -> np.ndarray:
        return self._matrix + shift * np.eye(self._matrix.shape[0])

    def _factorize(self, shift: complex) -> tuple[np.ndarray, np.ndarray]:
        with warnings.catch_warnings():
            warnings.simplefilter("error", linalg.LinAlgWarning)
            try:
                return linalg.lu_factor(self._shifted(shift), check_finite=False)
            except linalg.LinAlgWarning as e:
                raise SolverError(f"M + ({shift:.6g}) is singular", condition=float("inf")) from e

    def solve(self, shift: complex, b: np.ndarray) -> np.ndarray:
        x = linalg.lu_solve(self._factor(complex(shift)), -b, check_finite=False)
        residual = self._matrix @ x + shift * x + b
        scale = (self._norm + abs(shift)) * np.linalg.norm(x, 1) + np.linalg.norm(b, 1)
        error = float(np.linalg.norm(residual, 1) / scale) if scale else 0.0
        if error > self._tol:
            condition = float(np.linalg.cond(self._shifted(shift)))
            raise SolverError(
                f"Resolvent solve at shift {shift:.6g} has backward error {error:.2e} (condition {condition:.2e})",
                condition=condition,
            )
        return x

    def cache_info(self):
        return self._factor.cache_info()


def resolvent_apply(M: LiouvillianMatrix, z: complex, b: DensityVector | np.ndarray) -> np.ndarray:
    """x = -(M + z)⁻¹ b."""
    vector = b.entries if isinstance(b, DensityVector) else np.asarray(b, dtype=complex)
    if vector.shape[0] != M.size:
        raise DimensionMismatchError(f"Vector of length {vector.shape[0]} does not match D²={M.size}")
    return ResolventCache(M.dense, maxsize=1).solve(z, vector)


class SensorCorrelator:
    """Leading-order sensor moments for one system.

    Holds its own factorisation cache, so each worker thread needs its own
    instance.
    """

    def __init__(
        self,
        liouvillian: LiouvillianMatrix,
        reordering: ReorderingMatrices,
        steady: DensityVector,
        *,
        cache_size: int | None = None,
    ) -> None:
        if reordering.dim != liouvillian.dim or steady.dim != liouvillian.dim:
            raise DimensionMismatchError(
                f"Liouvillian dim {liouvillian.dim}, reordering dim {reordering.dim}, state dim {steady.dim}"
            )
        if reordering.basis != liouvillian.basis:
            raise DimensionMismatchError(
                f"Reordering matrices are in the {reordering.basis} basis, Liouvillian in {liouvillian.basis}"
            )
        self.dim = liouvillian.dim
        self._resolvent = ResolventCache(liouvillian.dense, maxsize=cache_size)
        self._t_plus = reordering.t_plus
        self._t_minus = reordering.t_minus
        self._steady = steady.entries
        self._single: dict[tuple, np.ndarray] = {}

    def _trace(self, vector: np.ndarray) -> complex:
        return complex(vector[:: self.dim + 1].sum())

    def _moments(self, sensors: Sequence[SensorParams]) -> Callable[[SensorState], np.ndarray]:
        memo: dict[SensorState, np.ndarray] = {}

        def moment(state: SensorState) -> np.ndarray:
            active = [i for i, (mu, nu) in enumerate(state) if mu or nu]
            if not active:
                return self._steady
            key = None
            if len(active) == 1:
                i = active[0]
                key = (state[i], sensors[i].omega, sensors[i].gamma, sensors[i].epsilon)
                if key in self._single:
                    return self._single[key]
            elif state in memo:
                return memo[state]

            shift = 0j
            source = np.zeros(self.dim * self.dim, dtype=complex)
            for i, (sensor, (mu, nu)) in enumerate(zip(sensors, state)):
                shift += (nu - mu) * 1j * sensor.omega - (mu + nu) * sensor.gamma / 2.0
                if mu:
                    lowered = state[:i] + ((0, nu),) + state[i + 1 :]
                    source += -1j * sensor.epsilon * (self._t_plus @ moment(lowered))
                if nu:
                    lowered = state[:i] + ((mu, 0),) + state[i + 1 :]
                    source += 1j * sensor.epsilon * (self._t_minus @ moment(lowered))
            vector = self._resolvent.solve(shift, source)

            if key is not None:
                if len(self._single) >= SINGLE_SENSOR_CACHE:
                    self._single.clear()
                self._single[key] = vector
            else:
                memo[state] = vector
            return vector

        return moment

    def sensor_population(self, sensor: SensorParams) -> float:
        value = self._trace(self._moments([sensor])(((1, 1),)))
        _check_residue(value, "⟨n⟩")
        return value.real

    def one_photon_spectrum(self, sensor: SensorParams, prefactor: Prefactor = Prefactor.NONE) -> float:
        """S(ω) = Γ⟨n⟩/(2πε²), optionally times ω²."""
        value = sensor.gamma * self.sensor_population(sensor) / (2.0 * np.pi * sensor.epsilon**2)
        if prefactor is Prefactor.OMEGA_SQUARED:
            value *= sensor.omega**2
        return value

    def spectrum(
        self,
        omegas: Sequence[float],
        gamma: float,
        prefactor: Prefactor = Prefactor.NONE,
        epsilon: float = 1.0,
    ) -> np.ndarray:
        return np.array([self.one_photon_spectrum(SensorParams(w, gamma, epsilon), prefactor) for w in omegas])

    def two_sensor_moments(self, sensor1: SensorParams, sensor2: SensorParams) -> tuple[float, float, float]:
        moment = self._moments([sensor1, sensor2])
        n1 = self._trace(moment(((1, 1), (0, 0))))
        n2 = self._trace(moment(((0, 0), (1, 1))))
        n12 = self._trace(moment(((1, 1), (1, 1))))
        for name, value in (("⟨n₁⟩", n1), ("⟨n₂⟩", n2), ("⟨n₁n₂⟩", n12)):
            _check_residue(value, name)
        return n1.real, n2.real, n12.real

    def two_photon_correlation(self, sensor1: SensorParams, sensor2: SensorParams) -> float:
        """g(2)(ω₁; ω₂) = ⟨n₁n₂⟩ / (⟨n₁⟩⟨n₂⟩)."""
        n1, n2, n12 = self.two_sensor_moments(sensor1, sensor2)
        if n1 <= 0 or n2 <= 0:
            raise UndefinedCorrelationError(
                f"Sensor spectrum vanishes at ω₁={sensor1.omega:g} or ω₂={sensor2.omega:g}"
            )
        return n12 / (n1 * n2)


def _check_residue(value: complex, name: str) -> None:
    if abs(value.imag) > IMAGINARY_RESIDUE * max(abs(value.real), 1e-300):
        logger.warning("%s has imaginary residue %.2e (real part %.3e)", name, value.imag, value.real)


def one_photon_spectrum(
    M: LiouvillianMatrix,
    reordering: ReorderingMatrices,
    v_ss: DensityVector,
    sensor: SensorParams,
    prefactor: Prefactor = Prefactor.NONE,
) -> float:
    return SensorCorrelator(M, reordering, v_ss, cache_size=4).one_photon_spectrum(sensor, prefactor)


def two_photon_correlation(
    M: LiouvillianMatrix,
    reordering: ReorderingMatrices,
    v_ss: DensityVector,
    sensor1: SensorParams,
    sensor2: SensorParams,
) -> float:
    return SensorCorrelator(M, reordering, v_ss, cache_size=16).two_photon_correlation(sensor1, sensor2)


def _check_grid(grid: Sequence[float], name: str) -> np.ndarray:
    values = np.asarray(grid, dtype=float)
    if values.ndim != 1 or not len(values):
        raise InvalidParameterError(f"{name} must be a non-empty list of frequencies")
    if np.any(np.diff(values) <= 0):
        raise InvalidParameterError(f"{name} must be strictly increasing")
    return values


def correlation_map(
    M: LiouvillianMatrix,
    reordering: ReorderingMatrices,
    v_ss: DensityVector,
    grid1: Sequence[float],
    grid2: Sequence[float],
    gamma1: float,
    gamma2: float,
    *,
    epsilon: float = 1.0,
    eigsys: EigenSystem | None = None,
    threads: int = 1,
    progress: Callable[[], None] | None = None,
) -> CorrelationMap:
    """g(2)(ω₁; ω₂) on a grid, one row of ω₁ per task."""
    omega1 = _check_grid(grid1, "grid1")
    omega2 = _check_grid(grid2, "grid2")
    M.dense  # dense view shared by every worker
    local = threading.local()

    def correlator() -> SensorCorrelator:
        if not hasattr(local, "correlator"):
            local.correlator = SensorCorrelator(M, reordering, v_ss)
        return local.correlator

    def row(i: int) -> np.ndarray:
        engine = correlator()
        s1 = SensorParams(omega1[i], gamma1, epsilon)
        values = np.array(
            [engine.two_photon_correlation(s1, SensorParams(w, gamma2, epsilon)) for w in omega2]
        )
        if progress is not None:
            progress()
        return values

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            futures = [executor.submit(row, i) for i in range(len(omega1))]
            wait(futures)
        rows = [future.result() for future in futures]
    else:
        rows = [row(i) for i in range(len(omega1))]
    values = np.vstack(rows)

    engine = correlator()
    metadata = {
        "gamma1": gamma1,
        "gamma2": gamma2,
        "epsilon": epsilon,
        "min": float(values.min()),
        "max": float(values.max()),
    }
    if eigsys is not None:
        metadata["annotations"] = map_annotations(eigsys)
    return CorrelationMap(
        omega1=omega1,
        omega2=omega2,
        values=values,
        s1_row=engine.spectrum(omega1, gamma1, epsilon=epsilon),
        s1_col=engine.spectrum(omega2, gamma2, epsilon=epsilon),
        metadata=metadata,
    )


def map_annotations(eigsys: EigenSystem, count: int | None = None) -> dict[str, list[dict[str, float]]]:
    """Transition lines, cascade points and leapfrog antidiagonals of a two-photon map."""
    levels = eigsys.keep if count is None else min(count, eigsys.keep)
    e = eigsys.energies
    return {
        "transitions": [
            {"upper": j + 1, "lower": j, "omega": float(e[j + 1] - e[j])} for j in range(levels - 1)
        ],
        "cascade": [
            {"level": j, "omega1": float(e[j + 1] - e[j]), "omega2": float(e[j] - e[j - 1])}
            for j in range(1, levels - 1)
        ],
        "leapfrog": [{"level": j, "omega_sum": float(e[j] - e[j - 2])} for j in range(2, levels)],
    }


def find_spectrum_peaks(
    omegas: Sequence[float],
    values: Sequence[float],
    eigsys: EigenSystem | None = None,
) -> list[SpectrumPeak]:
    """Local maxima of a sampled spectrum, labelled with the nearest coupled transition."""
    omegas = np.asarray(omegas, dtype=float)
    values = np.asarray(values, dtype=float)
    indices, _ = signal.find_peaks(values)
    transitions = []
    if eigsys is not None:
        transitions = [
            (j, k, float(eigsys.delta[k, j]))
            for j, k in eigsys.transitions()
            if abs(eigsys.c_table[j, k]) > 1e-12
        ]

    peaks = []
    for index in indices:
        omega = float(omegas[index])
        if transitions:
            j, k, delta = min(transitions, key=lambda t: abs(t[2] - omega))
            peaks.append(SpectrumPeak(omega, float(values[index]), j, k, delta))
        else:
            peaks.append(SpectrumPeak(omega, float(values[index])))
    return peaks
