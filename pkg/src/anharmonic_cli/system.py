"""Assemble the damped resonator described by a run configuration."""

import logging
from dataclasses import dataclass, replace

from anharmonic_cli.config import ModelSection, RunConfig, TruncationSection
from anharmonic_cli.field import Quadrature, frequency_components
from anharmonic_cli.fock import (
    MIN_WORKING_DIM,
    Basis,
    EigenSystem,
    FockOperator,
    Model,
    ModelSpec,
    attractive_model,
    build_ladder_operators,
    eigensystem,
    working_dim,
)
from anharmonic_cli.lindblad import (
    DensityVector,
    LiouvillianMatrix,
    assemble_liouvillian,
    build_eigenbasis_dissipator,
    build_naive_dissipator,
    steady_state,
)
from anharmonic_cli.spectra import ReorderingMatrices, build_reordering_matrices
from anharmonic_cli.thermal import DensityMatrix, thermal_eigensystem

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ThermalSystem:
    spec: ModelSpec
    eigensystem: EigenSystem
    temperature: float
    gamma_a: float
    dissipator: str
    liouvillian: LiouvillianMatrix
    steady: DensityVector

    @property
    def steady_matrix(self) -> DensityMatrix:
        return self.steady.to_density_matrix(Basis.EIGEN)


def model_spec(model: ModelSection, dim: int = MIN_WORKING_DIM) -> ModelSpec:
    """ModelSpec for a config model section; `attractive` takes U_6 from the circuit mapping."""
    if model.kind == "attractive" and not model.extra_orders:
        return attractive_model(model.U, model.omega_a, dim)
    if model.kind == "kerr":
        return ModelSpec(Model.KERR, model.U, model.omega_a, (), dim)
    kind = Model.SERIES if model.extra_orders else Model.QUARTIC
    return ModelSpec(kind, model.U, model.omega_a, model.extra_orders, dim)


def solve_eigensystem(
    spec: ModelSpec,
    truncation: TruncationSection,
    temperature: float,
    *,
    cap_keep: bool = True,
) -> EigenSystem:
    """Fixed truncation when `keep` is set, otherwise sized by the Boltzmann tail.

    `max_keep` bounds Liouvillian sizes; pass `cap_keep=False` for work that
    never builds one.
    """
    if truncation.keep is not None:
        dim = truncation.dim_work or working_dim(truncation.keep)
        return eigensystem(replace(spec, dim=dim), truncation.keep)
    start = replace(spec, dim=truncation.dim_work or max(spec.dim, MIN_WORKING_DIM))
    return thermal_eigensystem(
        start,
        temperature,
        tail=truncation.tail,
        max_keep=truncation.max_keep if cap_keep else None,
        max_dim=truncation.max_dim,
    )


def prepare_system(
    config: RunConfig, *, U: float | None = None, temperature: float | None = None
) -> ThermalSystem:
    model = config.model if U is None else replace(config.model, U=U)
    T = config.bath.temperature if temperature is None else temperature
    spec = model_spec(model)
    eigsys = solve_eigensystem(spec, config.truncation, T)
    gamma_a = config.bath.gamma_a

    if config.bath.dissipator == "naive":
        dissipator = build_naive_dissipator(gamma_a, T, eigsys.keep, omega_a=spec.omega_a, eigsys=eigsys)
    else:
        dissipator = build_eigenbasis_dissipator(eigsys, gamma_a, T, omega_a=spec.omega_a)
    liouvillian = assemble_liouvillian(eigsys.energies, dissipator)
    logger.info("Assembled %s Liouvillian with %d retained levels", config.bath.dissipator, eigsys.keep)
    return ThermalSystem(
        spec=spec,
        eigensystem=eigsys,
        temperature=T,
        gamma_a=gamma_a,
        dissipator=config.bath.dissipator,
        liouvillian=liouvillian,
        steady=steady_state(liouvillian),
    )


def sensor_field(system: ThermalSystem, config: RunConfig) -> FockOperator:
    """The operator X⁺ the sensors couple to."""
    eigsys = system.eigensystem
    if config.sensors.field == "ladder":
        a, _ = build_ladder_operators(eigsys.dim_work)
        return eigsys.to_eigenbasis(a)
    components = frequency_components(
        eigsys,
        Quadrature(config.sensors.quadrature),
        derivative=config.sensors.derivative,
    )
    return components.plus


def reordering_for(system: ThermalSystem, config: RunConfig) -> ReorderingMatrices:
    return build_reordering_matrices(sensor_field(system, config), system.eigensystem.keep)
