"""Brute-force references for the sensor formulas.

`qrf_spectrum` integrates the two-time correlator in the time domain and
`augmented_two_sensor` simulates the system together with two explicit
two-level sensors. Both are slow and meant for small systems.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy import integrate, linalg

from anharmonic_cli.errors import (
    DimensionMismatchError,
    IntegrationError,
    InvalidParameterError,
    MemoryGuardError,
    SensorCouplingError,
)
from anharmonic_cli.fock import FockOperator
from anharmonic_cli.lindblad import (
    Channel,
    DensityVector,
    LiouvillianMatrix,
    RateTable,
    assemble_liouvillian,
    liouvillian_spectrum,
    steady_state,
)
from anharmonic_cli.spectra import SensorParams

logger = logging.getLogger(__name__)

DECAY_TARGET = 1e10
MAX_AUGMENTED_DIM = 8
WEAK_COUPLING_FRACTION = 0.1
SENSOR_POPULATION_LIMIT = 1e-3


@dataclass(frozen=True)
class QrfSpectrum:
    omegas: np.ndarray
    values: np.ndarray
    horizon: float
    error: float


@dataclass(frozen=True, eq=False)
class AugmentedSystem:
    """System ⊗ sensor 1 ⊗ sensor 2 with both sensors as two-level systems."""

    liouvillian: LiouvillianMatrix
    sensors: tuple[SensorParams, SensorParams]
    system_dim: int
    number1: np.ndarray
    number2: np.ndarray


@dataclass(frozen=True)
class SensorMoments:
    n1: float
    n2: float
    n12: float

    @property
    def g2(self) -> float:
        return self.n12 / (self.n1 * self.n2)


@dataclass(frozen=True)
class ExtrapolatedCorrelation:
    g2: float
    g2_raw: float
    couplings: tuple[float, float]


def _integration_horizon(M: LiouvillianMatrix, gamma1: float) -> float:
    eigenvalues = liouvillian_spectrum(M)
    scale = max(1.0, float(np.max(np.abs(eigenvalues))))
    decaying = -eigenvalues.real[np.abs(eigenvalues) > 1e-10 * scale]
    slowest = float(np.min(decaying)) if len(decaying) else 0.0
    if gamma1 <= 0 and slowest <= 1e-12:
        raise IntegrationError("Correlator neither decays nor is damped by the sensor linewidth")
    rates = [r for r in (gamma1, slowest) if r > 1e-12]
    envelope = gamma1 / 2.0 if gamma1 > 0 else slowest
    return max(math.log(DECAY_TARGET) / envelope, 10.0 / min(rates))


def qrf_spectrum(
    M: LiouvillianMatrix,
    x_minus: FockOperator,
    x_plus: FockOperator,
    v_ss: DensityVector,
    omega_grid: Sequence[float],
    gamma1: float,
    *,
    epsrel: float = 1e-10,
) -> QrfSpectrum:
    """S(ω) = (1/π) Re ∫₀^∞ e^{(iω - Γ/2)τ} ⟨X⁻(0) X⁺(τ)⟩ dτ.

    The correlator is Tr[X⁺ e^{Mτ}(ρ X⁻)] with e^{Mτ} from scipy's expm.
    """
    if x_plus.dim != M.dim or x_minus.dim != M.dim or v_ss.dim != M.dim:
        raise DimensionMismatchError("Field operators, state and Liouvillian must share one dimension")
    omegas = np.asarray(omega_grid, dtype=float)
    generator = M.dense
    initial = (v_ss.to_matrix() @ x_minus.elements).ravel()
    readout = x_plus.elements.T.ravel()
    horizon = _integration_horizon(M, gamma1)

    def integrand(tau: float) -> np.ndarray:
        correlator = readout @ (linalg.expm(generator * tau) @ initial)
        return np.exp((1j * omegas - gamma1 / 2.0) * tau) * correlator

    values, error = integrate.quad_vec(integrand, 0.0, horizon, epsabs=1e-14, epsrel=epsrel, limit=20000)
    return QrfSpectrum(omegas=omegas, values=values.real / np.pi, horizon=horizon, error=float(error))


def spectrum_sum_rule(omegas: Sequence[float], spectrum: Sequence[float]) -> float:
    """∫ S(ω) dω, which equals ⟨X⁻X⁺⟩ for a grid covering the whole spectrum."""
    return float(integrate.trapezoid(np.asarray(spectrum, dtype=float), np.asarray(omegas, dtype=float)))


def build_augmented_system(
    hamiltonian: np.ndarray | FockOperator,
    dissipator: RateTable | Sequence[Channel],
    x_plus: FockOperator,
    sensors: tuple[SensorParams, SensorParams],
) -> AugmentedSystem:
    h = hamiltonian.elements if isinstance(hamiltonian, FockOperator) else np.diag(hamiltonian)
    dim = h.shape[0]
    if dim > MAX_AUGMENTED_DIM:
        raise MemoryGuardError(f"Augmented oracle refuses system dim {dim} > {MAX_AUGMENTED_DIM}")
    if x_plus.dim != dim:
        raise DimensionMismatchError(f"X⁺ has dim {x_plus.dim}, system has dim {dim}")

    lowering = np.array([[0.0, 1.0], [0.0, 0.0]])
    qubit = np.eye(2)
    system_identity = np.eye(dim)
    sigma1 = np.kron(system_identity, np.kron(lowering, qubit))
    sigma2 = np.kron(system_identity, np.kron(qubit, lowering))
    xp = np.kron(x_plus.elements, np.eye(4))
    xm = xp.conj().T

    total = np.kron(h, np.eye(4)).astype(complex)
    for sensor, sigma in zip(sensors, (sigma1, sigma2)):
        total += sensor.omega * sigma.T @ sigma
        total += sensor.epsilon * (xp @ sigma.T + xm @ sigma)

    system_channels = dissipator.channels() if isinstance(dissipator, RateTable) else dissipator
    channels = [Channel(np.kron(c.operator, np.eye(4)), c.rate) for c in system_channels]
    channels += [Channel(sigma, sensor.gamma) for sensor, sigma in zip(sensors, (sigma1, sigma2))]

    liouvillian = assemble_liouvillian(FockOperator(total), channels)
    return AugmentedSystem(
        liouvillian=liouvillian,
        sensors=sensors,
        system_dim=dim,
        number1=sigma1.T @ sigma1,
        number2=sigma2.T @ sigma2,
    )


def augmented_two_sensor(
    hamiltonian: np.ndarray | FockOperator,
    dissipator: RateTable | Sequence[Channel],
    x_plus: FockOperator,
    sensors: tuple[SensorParams, SensorParams],
    gamma_q: float,
) -> SensorMoments:
    """Sensor occupations and their product from the full augmented steady state."""
    if gamma_q <= 0:
        raise InvalidParameterError(f"gamma_q must be positive, got {gamma_q}")
    for sensor in sensors:
        bound = WEAK_COUPLING_FRACTION * sensor.coupling_bound(gamma_q)
        if sensor.epsilon > bound * (1.0 + 1e-12):
            raise SensorCouplingError(
                f"Sensor coupling {sensor.epsilon:.3e} exceeds {WEAK_COUPLING_FRACTION}·√(Γγ_Q/2) = {bound:.3e}"
            )

    augmented = build_augmented_system(hamiltonian, dissipator, x_plus, sensors)
    rho = steady_state(augmented.liouvillian).to_matrix()
    n1 = float(np.trace(rho @ augmented.number1).real)
    n2 = float(np.trace(rho @ augmented.number2).real)
    n12 = float(np.trace(rho @ augmented.number1 @ augmented.number2).real)
    if max(n1, n2) > SENSOR_POPULATION_LIMIT:
        logger.warning(
            "Sensor population %.2e exceeds %.0e; back-action is not negligible",
            max(n1, n2),
            SENSOR_POPULATION_LIMIT,
        )
    return SensorMoments(n1=n1, n2=n2, n12=n12)


def extrapolated_two_sensor(
    hamiltonian: np.ndarray | FockOperator,
    dissipator: RateTable | Sequence[Channel],
    x_plus: FockOperator,
    omegas: tuple[float, float],
    gammas: tuple[float, float],
    gamma_q: float,
) -> ExtrapolatedCorrelation:
    """g(2) extrapolated to vanishing sensor coupling.

    Runs the augmented simulation at ε and ε/2, with ε a tenth of the weak-
    coupling bound, and removes the O(ε²) back-action by Richardson
    extrapolation.
    """
    results = []
    couplings = []
    for fraction in (1.0, 0.5):
        sensors = tuple(
            SensorParams(w, g, fraction * WEAK_COUPLING_FRACTION * math.sqrt(g * gamma_q / 2.0))
            for w, g in zip(omegas, gammas)
        )
        results.append(augmented_two_sensor(hamiltonian, dissipator, x_plus, sensors, gamma_q).g2)
        couplings.append(sensors[0].epsilon)
    coarse, fine = results
    return ExtrapolatedCorrelation(
        g2=(4.0 * fine - coarse) / 3.0, g2_raw=coarse, couplings=tuple(couplings)
    )
