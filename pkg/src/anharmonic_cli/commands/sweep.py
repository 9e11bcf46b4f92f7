"""Zero-delay photon statistics over a (U, T) grid."""

from concurrent.futures import ThreadPoolExecutor
from collections.abc import Callable
from dataclasses import replace
from pathlib import Path

import numpy as np
import pandas as pd
from rich.console import Console
from rich.progress import Progress

from anharmonic_cli import system
from anharmonic_cli.config import RunConfig, load_config, with_overrides
from anharmonic_cli.errors import AnharmonicError
from anharmonic_cli.exporters import write_json, write_table
from anharmonic_cli.field import Quadrature, frequency_components, g2_zero_delay
from anharmonic_cli.fock import build_ladder_operators
from anharmonic_cli.formatters import format_summary, format_written
from anharmonic_cli.thermal import (
    canonical_state,
    g_n_statistic,
    kerr_continuum_g2,
    kerr_low_occupation_g2,
    kerr_thermal_statistics,
    naive_dim,
    naive_thermal_state,
)

console = Console()


def axis(low: float, high: float, points: int, scale: str) -> np.ndarray:
    if points == 1:
        return np.array([low])
    if scale == "log":
        return np.geomspace(low, high, points)
    return np.linspace(low, high, points)


def g2_point(config: RunConfig, observable: str, U: float, T: float) -> float:
    """g(2)(0) of one sweep observable; U is the magnitude for `attractive`."""
    omega_a = config.model.omega_a
    tail = config.truncation.tail
    match observable:
        case "kerr":
            return kerr_thermal_statistics(omega_a, U, T, tail=tail).g2
        case "kerr-low-T":
            return kerr_low_occupation_g2(omega_a, U, T)
        case "kerr-continuum":
            return kerr_continuum_g2(omega_a, U, T)
        case "naive":
            dim = naive_dim(omega_a, T, tail)
            a, _ = build_ladder_operators(dim)
            return g_n_statistic(naive_thermal_state(omega_a, T, dim, tail=tail), a, 2)

    if observable == "attractive":
        model = replace(config.model, kind="attractive", U=-U, extra_orders=())
    else:
        model = replace(config.model, kind="quartic", U=U)
    eigsys = system.solve_eigensystem(system.model_spec(model), config.truncation, T, cap_keep=False)
    fixed = config.truncation.keep is not None
    rho = canonical_state(eigsys, T, tail=None if fixed else tail)
    quadrature = Quadrature.P if observable == "pdot" else Quadrature.X
    return g2_zero_delay(rho, frequency_components(eigsys, quadrature))


def sweep_frame(config: RunConfig, progress: Callable[[], None] | None = None) -> pd.DataFrame:
    """One row per grid point, U outer and T inner."""
    sweep = config.sweep
    u_axis = axis(sweep.u_min, sweep.u_max, sweep.u_points, sweep.u_scale)
    t_axis = axis(sweep.t_min, sweep.t_max, sweep.t_points, sweep.t_scale)
    points = [(u, t) for u in u_axis for t in t_axis]

    def evaluate(point: tuple[float, float]) -> float:
        value = g2_point(config, sweep.observable, *point)
        if progress is not None:
            progress()
        return value

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as executor:
            values = list(executor.map(evaluate, points))
    else:
        values = [evaluate(point) for point in points]

    return pd.DataFrame(
        {
            "U": [u for u, _ in points],
            "T": [t for _, t in points],
            "g2": values,
        }
    )


def run(
    config_path: Path | None = None,
    out: Path | None = None,
    threads: int | None = None,
    seedless: bool = True,
) -> None:
    """Run the g(2) sweep and write its table."""
    try:
        config = with_overrides(load_config(config_path), out=out, threads=threads)
        sweep = config.sweep
        with Progress(console=console, transient=True) as bar:
            task = bar.add_task(f"Sweeping {sweep.observable}", total=sweep.u_points * sweep.t_points)
            frame = sweep_frame(config, progress=lambda: bar.advance(task))

        directory = Path(config.output.directory)
        name = f"sweep_{sweep.observable}"
        summary = {
            "observable": sweep.observable,
            "points": len(frame),
            "g2_min": float(frame["g2"].min()),
            "g2_max": float(frame["g2"].max()),
        }
        paths = [
            write_table(directory / f"{name}.csv", frame, config),
            write_json(directory / f"{name}.json", summary, config, seedless=seedless),
        ]
        format_summary("g(2) sweep", summary)
        format_written(paths)
    except AnharmonicError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise SystemExit(e.exit_code)
