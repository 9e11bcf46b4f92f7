"""Reference checks of the numerical pipeline."""

import math
from collections.abc import Callable
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np
from rich.console import Console

from anharmonic_cli import system
from anharmonic_cli.commands import twophoton
from anharmonic_cli.config import RunConfig, load_config, with_overrides
from anharmonic_cli.errors import AnharmonicError, ValidationFailure
from anharmonic_cli.exporters import write_json
from anharmonic_cli.field import (
    Quadrature,
    first_order_coherence,
    frequency_components,
    g2_delayed,
    g2_zero_delay,
    mean_intensity,
)
from anharmonic_cli.fock import (
    Basis,
    EigenSystem,
    Model,
    ModelSpec,
    attractive_model,
    build_hamiltonian,
    build_ladder_operators,
    check_truncation,
    eigensystem,
)
from anharmonic_cli.formatters import format_summary, format_validation, format_written
from anharmonic_cli.lindblad import (
    DensityVector,
    LiouvillianMatrix,
    RateTable,
    assemble_liouvillian,
    build_eigenbasis_dissipator,
    build_naive_dissipator,
    steady_state,
)
from anharmonic_cli.oracle import extrapolated_two_sensor, qrf_spectrum, spectrum_sum_rule
from anharmonic_cli.spectra import SensorCorrelator, SensorParams, build_reordering_matrices
from anharmonic_cli.thermal import (
    DensityMatrix,
    canonical_state,
    g_n_statistic,
    kerr_high_T_occupation,
    kerr_subpoissonian_boundary,
    kerr_thermal_statistics,
    naive_dim,
    naive_thermal_state,
    thermal_eigensystem,
    trace_distance,
)

console = Console()

WEAK_QUARTIC_MODEL = ModelSpec(Model.QUARTIC, 1e-3)
WEAK_QUARTIC_TEMPERATURE = 0.3
WEAK_QUARTIC_INTENSITY = 0.035
WEAK_QUARTIC_G2 = 1.943
WEAK_QUARTIC_MAP_MIN = 0.063
WEAK_QUARTIC_MAP_MAX = 1572.0
NAIVE_TAIL = 1e-14
SUBPOISSONIAN_TEMPERATURES = (0.1, 0.2, 0.3)
BOUNDED_T_MAX = 1.0
MAP_TOLERANCE = 0.2
QUICK_MAP_POINTS = 15


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    tolerance: float
    passed: bool
    required: bool = True
    detail: str = ""


@dataclass(frozen=True, eq=False)
class _OpenSystem:
    eigsys: EigenSystem
    rates: RateTable
    liouvillian: LiouvillianMatrix
    steady: DensityVector


def _open_system(spec: ModelSpec, T: float, gamma_a: float, keep: int | None = None) -> _OpenSystem:
    eigsys = thermal_eigensystem(spec, T) if keep is None else eigensystem(spec, keep)
    rates = build_eigenbasis_dissipator(eigsys, gamma_a, T, omega_a=spec.omega_a)
    liouvillian = assemble_liouvillian(eigsys.energies, rates)
    return _OpenSystem(eigsys, rates, liouvillian, steady_state(liouvillian))


def _at_most(
    name: str, measured: float, tolerance: float, *, required: bool = True, detail: str = ""
) -> CheckResult:
    return CheckResult(name, float(measured), tolerance, bool(measured <= tolerance), required, detail)


def check_truncation_convergence(config: RunConfig) -> CheckResult:
    spec = system.model_spec(config.model)
    eigsys = system.solve_eigensystem(spec, config.truncation, config.bath.temperature)
    report = check_truncation(replace(spec, dim=eigsys.dim_work), eigsys.keep)
    return _at_most(
        "truncation-convergence",
        report.max_change,
        1e-8,
        detail=f"keep={eigsys.keep}, dim {report.dim} -> {report.doubled_dim}",
    )


def acceptance_grid(quick: bool, t_max: float = math.exp(2)) -> list[tuple[float, float]]:
    """(U, T) pairs spanning U in [e⁻⁵, e²] and T in [0.1, t_max]."""
    points = 2 if quick else 5
    couplings = np.geomspace(math.exp(-5), math.exp(2), points)
    temperatures = np.geomspace(0.1, t_max, points)
    return [(float(U), float(T)) for U in couplings for T in temperatures]


def check_steady_canonical(quick: bool) -> CheckResult:
    """Eigenbasis steady state against the canonical ensemble over a Kerr grid."""
    worst, largest = 0.0, 0
    for U, T in acceptance_grid(quick):
        open_system = _open_system(ModelSpec(Model.KERR, U), T, 1e-2)
        steady = open_system.steady.to_density_matrix(Basis.EIGEN)
        worst = max(worst, trace_distance(steady, canonical_state(open_system.eigsys, T)))
        largest = max(largest, open_system.eigsys.keep)
    return _at_most("steady-state-canonical", worst, 1e-8, detail=f"largest keep {largest}")


def check_naive_pathology(quick: bool) -> list[CheckResult]:
    """The bare-mode dissipator relaxes to the Bose-Einstein state whatever U is."""
    worst_distance, worst_g2 = 0.0, 0.0
    for U, T in acceptance_grid(quick):
        dim = naive_dim(1.0, T, NAIVE_TAIL)
        a, _ = build_ladder_operators(dim)
        hamiltonian = build_hamiltonian(ModelSpec(Model.KERR, U, dim=dim))
        liouvillian = assemble_liouvillian(hamiltonian, build_naive_dissipator(1e-2, T, dim))
        steady = steady_state(liouvillian).to_density_matrix(Basis.FOCK)
        worst_distance = max(worst_distance, trace_distance(steady, naive_thermal_state(1.0, T, dim)))
        worst_g2 = max(worst_g2, abs(g_n_statistic(steady, a, 2) - 2.0))
    return [
        _at_most("naive-steady-state", worst_distance, 1e-8),
        _at_most("naive-g2", worst_g2, 1e-9),
    ]


def check_g2_bounded(quick: bool) -> CheckResult:
    """Repulsive Kerr and Ẋ-field g(2)(0) stay within [0, 2] for T up to ω_a.

    Hotter Ẋ-field states exceed 2 and are left out of the grid.
    """
    values = []
    for U, T in acceptance_grid(quick, BOUNDED_T_MAX):
        values.append(kerr_thermal_statistics(1.0, U, T).g2)
        eigsys = thermal_eigensystem(ModelSpec(Model.QUARTIC, U), T)
        components = frequency_components(eigsys, Quadrature.X)
        values.append(g2_zero_delay(canonical_state(eigsys, T), components))
    excess = max(max(values) - 2.0, -min(values), 0.0)
    span = f"range [{min(values):.4g}, {max(values):.4g}]"
    return _at_most("repulsive-g2-bounded", excess, 1e-6, detail=f"T <= {BOUNDED_T_MAX:g}, {span}")


def check_siegert_relation() -> CheckResult:
    """g(2)(τ) = 1 + |g(1)(τ)|² for thermal light from a damped harmonic mode."""
    T, gamma_a = 0.5, 0.1
    eigsys = thermal_eigensystem(ModelSpec(Model.KERR, 0.0), T)
    channels = build_naive_dissipator(gamma_a, T, eigsys.keep, eigsys=eigsys)
    liouvillian = assemble_liouvillian(eigsys.energies, channels)
    steady = steady_state(liouvillian)
    components = frequency_components(eigsys, Quadrature.X, derivative=False)
    worst = 0.0
    for tau in (0.0, 2.0, 10.0, 30.0):
        g1 = first_order_coherence(liouvillian, steady, components, tau)
        g2 = g2_delayed(liouvillian, steady, components, tau)
        worst = max(worst, abs(g2 - 1.0 - abs(g1) ** 2))
    return _at_most("siegert-relation", worst, 1e-6)


def _qrf_variants() -> list[tuple[str, ModelSpec]]:
    return [
        ("kerr-weak", ModelSpec(Model.KERR, 1e-3)),
        ("kerr-strong", ModelSpec(Model.KERR, 0.1)),
        ("quartic-weak", ModelSpec(Model.QUARTIC, 1e-3)),
        ("quartic-strong", ModelSpec(Model.QUARTIC, 0.1)),
        ("attractive", attractive_model(-0.02)),
    ]


def check_spectrum_against_qrf(quick: bool) -> CheckResult:
    """Sensor spectrum against direct time integration of the correlator."""
    variants = _qrf_variants()[1:2] if quick else _qrf_variants()
    gamma1 = 0.1
    worst = 0.0
    for _, spec in variants:
        open_system = _open_system(spec, 0.5, 0.05, keep=5)
        eigsys = open_system.eigsys
        x_plus = frequency_components(eigsys, Quadrature.X, derivative=False).plus
        neighbours = np.diag(eigsys.delta, k=-1)
        omegas = np.linspace(neighbours.min() - 0.3, neighbours.max() + 0.3, 6 if quick else 20)
        correlator = SensorCorrelator(
            open_system.liouvillian, build_reordering_matrices(x_plus, eigsys.keep), open_system.steady
        )
        semi_analytic = correlator.spectrum(omegas, gamma1)
        reference = qrf_spectrum(
            open_system.liouvillian, x_plus.dag(), x_plus, open_system.steady, omegas, gamma1
        ).values
        worst = max(worst, float(np.max(np.abs(semi_analytic - reference)) / np.max(np.abs(reference))))
    return _at_most("spectrum-vs-time-integral", worst, 1e-6, detail=f"{len(variants)} Hamiltonians")


def check_sum_rule() -> CheckResult:
    """The spectrum integrates to ⟨X⁻X⁺⟩."""
    open_system = _open_system(ModelSpec(Model.KERR, 0.2), 0.5, 0.01, keep=5)
    eigsys = open_system.eigsys
    components = frequency_components(eigsys, Quadrature.X, derivative=False)
    correlator = SensorCorrelator(
        open_system.liouvillian, build_reordering_matrices(components.plus, eigsys.keep), open_system.steady
    )
    omegas = np.linspace(-4.0, 6.0, 10001)
    total = spectrum_sum_rule(omegas, correlator.spectrum(omegas, 0.02))
    intensity = mean_intensity(open_system.steady, components)
    return _at_most("spectrum-sum-rule", abs(total - intensity) / intensity, 1e-2)


def check_two_sensor_against_augmented(quick: bool) -> CheckResult:
    """Sensor-hierarchy g(2) against an explicit two-sensor simulation."""
    gamma_a, gamma = 0.05, 0.1
    open_system = _open_system(ModelSpec(Model.KERR, 0.2), 1.0, gamma_a, keep=4)
    eigsys = open_system.eigsys
    x_plus = frequency_components(eigsys, Quadrature.X, derivative=False).plus
    correlator = SensorCorrelator(
        open_system.liouvillian, build_reordering_matrices(x_plus, eigsys.keep), open_system.steady
    )
    d10, d21, d32 = (float(eigsys.delta[j + 1, j]) for j in range(3))
    leapfrog = 0.5 * float(eigsys.delta[2, 0])
    points = [
        (d10, d10), (d10, d21), (d21, d10), (d21, d21), (d21, d32),
        (d32, d21), (d10, d32), (leapfrog, leapfrog), (d10, leapfrog), (d32, d32),
    ]
    if quick:
        points = points[:3]
    worst = 0.0
    for omega1, omega2 in points:
        hierarchy = correlator.two_photon_correlation(SensorParams(omega1, gamma), SensorParams(omega2, gamma))
        reference = extrapolated_two_sensor(
            eigsys.energies, open_system.rates, x_plus, (omega1, omega2), (gamma, gamma), gamma_a
        ).g2
        worst = max(worst, abs(hierarchy - reference) / reference)
    return _at_most("two-sensor-vs-augmented", worst, 1e-2, detail=f"{len(points)} frequency pairs")


def _weak_quartic_state() -> tuple[EigenSystem, DensityMatrix]:
    eigsys = thermal_eigensystem(WEAK_QUARTIC_MODEL, WEAK_QUARTIC_TEMPERATURE)
    return eigsys, canonical_state(eigsys, WEAK_QUARTIC_TEMPERATURE)


def check_weak_quartic_statistics() -> list[CheckResult]:
    eigsys, rho = _weak_quartic_state()
    intensity = mean_intensity(rho, frequency_components(eigsys, Quadrature.X, derivative=False))
    g2 = g2_zero_delay(rho, frequency_components(eigsys, Quadrature.X))
    return [
        _at_most(
            "weak-quartic-intensity",
            abs(intensity - WEAK_QUARTIC_INTENSITY),
            0.002,
            detail=f"<X-X+> = {intensity:.5f}",
        ),
        _at_most(
            "weak-quartic-g2-derivative", abs(g2 - WEAK_QUARTIC_G2), 0.01, detail=f"g2 = {g2:.5f}"
        ),
    ]


def weak_quartic_window(eigsys: EigenSystem) -> tuple[float, float]:
    """Frequencies framing the three lowest transitions, half a line spacing either side."""
    d10, d21, d32 = (float(eigsys.delta[j + 1, j]) for j in range(3))
    margin = 0.5 * (d21 - d10)
    return d10 - margin, d32 + margin


def check_weak_quartic_map(
    config: RunConfig, points: int, *, required: bool = True
) -> list[CheckResult]:
    """Extremes of the two-photon map against the reference colour scale."""
    eigsys, _ = _weak_quartic_state()
    omega_min, omega_max = weak_quartic_window(eigsys)
    reference = replace(
        config,
        model=replace(config.model, kind="quartic", U=1e-3, extra_orders=()),
        bath=replace(
            config.bath,
            gamma_a=1e-4,
            temperature=WEAK_QUARTIC_TEMPERATURE,
            dissipator="eigenbasis",
        ),
        sensors=replace(
            config.sensors,
            gamma1=5e-4,
            gamma2=5e-4,
            omega_min=omega_min,
            omega_max=omega_max,
            field="eigen",
            quadrature="X",
            derivative=False,
        ),
        truncation=replace(config.truncation, keep=None, dim_work=None),
    )
    cmap = twophoton.compute_map(reference, points=points)
    low, high = cmap.metadata["min"], cmap.metadata["max"]
    grid = f"{points}x{points} on [{omega_min:.4f}, {omega_max:.4f}]"
    return [
        _at_most(
            "weak-quartic-map-min",
            abs(low - WEAK_QUARTIC_MAP_MIN) / WEAK_QUARTIC_MAP_MIN,
            MAP_TOLERANCE,
            required=required,
            detail=f"min {low:.4g}, {grid}",
        ),
        _at_most(
            "weak-quartic-map-max",
            abs(high - WEAK_QUARTIC_MAP_MAX) / WEAK_QUARTIC_MAP_MAX,
            MAP_TOLERANCE,
            required=required,
            detail=f"max {high:.4g}, {grid}",
        ),
    ]


def check_kerr_limits() -> list[CheckResult]:
    T, U = math.exp(10), math.exp(-3)
    statistics = kerr_thermal_statistics(1.0, U, T)
    closed_form = kerr_high_T_occupation(1.0, U, T)
    deviations = []
    for temperature in SUBPOISSONIAN_TEMPERATURES:
        boundary = kerr_subpoissonian_boundary(1.0, temperature)
        g2 = kerr_thermal_statistics(1.0, boundary.u_threshold, temperature).g2
        deviations.append(abs(g2 - 1.0))
    return [
        _at_most(
            "kerr-high-T-g2",
            abs(statistics.g2 - math.pi / 2) / (math.pi / 2),
            0.02,
            detail=f"g2 = {statistics.g2:.5f}",
        ),
        _at_most(
            "kerr-high-T-occupation",
            abs(closed_form - statistics.mean_occupation) / statistics.mean_occupation,
            0.01,
        ),
        _at_most(
            "subpoissonian-boundary",
            max(deviations),
            0.05,
            detail=f"T in {SUBPOISSONIAN_TEMPERATURES}",
        ),
    ]


def check_attractive_statistics() -> list[CheckResult]:
    results = []
    cases = (("attractive-bunching", -0.01, True), ("attractive-antibunching", -0.08, False))
    for name, U, bunched in cases:
        eigsys = thermal_eigensystem(attractive_model(U), 0.1)
        g2 = g2_zero_delay(canonical_state(eigsys, 0.1), frequency_components(eigsys, Quadrature.X))
        threshold = 2.0 if bunched else 1.0
        passed = g2 > threshold if bunched else g2 < threshold
        results.append(CheckResult(name, g2, threshold, passed, True, f"U = {U:g}, T = 0.1"))
    return results


def run_checks(
    config: RunConfig, progress: Callable[[str], None] | None = None
) -> list[CheckResult]:
    quick = config.validate.quick
    steps: list[tuple[str, Callable[[], CheckResult | list[CheckResult]]]] = [
        ("truncation", lambda: check_truncation_convergence(config)),
        ("steady state", lambda: check_steady_canonical(quick)),
        ("naive dissipator", lambda: check_naive_pathology(quick)),
        ("boundedness", lambda: check_g2_bounded(quick)),
        ("Siegert relation", check_siegert_relation),
        ("spectrum", lambda: check_spectrum_against_qrf(quick)),
        ("sum rule", check_sum_rule),
        ("two sensors", lambda: check_two_sensor_against_augmented(quick)),
        ("weak quartic statistics", check_weak_quartic_statistics),
        (
            "weak quartic map",
            lambda: (
                check_weak_quartic_map(config, QUICK_MAP_POINTS, required=False)
                if quick
                else check_weak_quartic_map(config, config.validate.map_points)
            ),
        ),
        ("Kerr limits", check_kerr_limits),
        ("attractive model", check_attractive_statistics),
    ]
    results: list[CheckResult] = []
    for label, step in steps:
        if progress is not None:
            progress(label)
        outcome = step()
        results.extend(outcome if isinstance(outcome, list) else [outcome])
    return results


def run(
    config_path: Path | None = None,
    out: Path | None = None,
    threads: int | None = None,
    seedless: bool = True,
) -> None:
    """Run every check, write the report and fail if a required check fails."""
    try:
        config = with_overrides(load_config(config_path), out=out, threads=threads)
        with console.status("Validating...") as status:
            checks = run_checks(config, progress=lambda label: status.update(f"Validating: {label}"))

        report = {"checks": [asdict(check) for check in checks]}
        path = Path(config.output.directory) / "validation.json"
        write_json(path, report, config, seedless=seedless)
        format_validation(checks)
        failed = [check.name for check in checks if check.required and not check.passed]
        format_summary("Validation", {"checks": len(checks), "failed": len(failed)})
        format_written([path])
        if failed:
            raise ValidationFailure(f"Required checks failed: {', '.join(failed)}")
    except AnharmonicError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise SystemExit(e.exit_code)
