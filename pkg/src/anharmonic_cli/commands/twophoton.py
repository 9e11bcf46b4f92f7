"""Frequency-resolved two-photon correlation map."""

from collections.abc import Callable
from pathlib import Path

import numpy as np
from rich.console import Console
from rich.progress import Progress

from anharmonic_cli import system
from anharmonic_cli.config import RunConfig, load_config, with_overrides
from anharmonic_cli.errors import AnharmonicError
from anharmonic_cli.exporters import map_frame, write_json, write_table
from anharmonic_cli.formatters import format_summary, format_written
from anharmonic_cli.spectra import CorrelationMap, correlation_map

console = Console()


def compute_map(
    config: RunConfig,
    progress: Callable[[], None] | None = None,
    points: int | None = None,
) -> CorrelationMap:
    thermal = system.prepare_system(config)
    sensors = config.sensors
    grid = np.linspace(sensors.omega_min, sensors.omega_max, points or sensors.points)
    return correlation_map(
        thermal.liouvillian,
        system.reordering_for(thermal, config),
        thermal.steady,
        grid,
        grid,
        sensors.gamma1,
        sensors.gamma2,
        eigsys=thermal.eigensystem,
        threads=config.threads,
        progress=progress,
    )


def run(
    config_path: Path | None = None,
    out: Path | None = None,
    threads: int | None = None,
    seedless: bool = True,
) -> None:
    """Compute g(2)(ω₁; ω₂) and write the map with its annotations."""
    try:
        config = with_overrides(load_config(config_path), out=out, threads=threads)
        with Progress(console=console, transient=True) as bar:
            task = bar.add_task("Two-photon map", total=config.sensors.points)
            cmap = compute_map(config, progress=lambda: bar.advance(task))

        directory = Path(config.output.directory)
        paths = [
            write_table(directory / "two_photon_map.csv", map_frame(cmap), config),
            write_json(directory / "two_photon_map.json", cmap.metadata, config, seedless=seedless),
        ]
        format_summary(
            "Two-photon map",
            {
                "points": cmap.values.size,
                "g2_min": cmap.metadata["min"],
                "g2_max": cmap.metadata["max"],
            },
        )
        format_written(paths)
    except AnharmonicError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise SystemExit(e.exit_code)
