"""Lowest eigenenergies against the nonlinearity, for both signs of U."""

from pathlib import Path

import numpy as np
import pandas as pd
from rich.console import Console

from anharmonic_cli.config import RunConfig, load_config, with_overrides
from anharmonic_cli.errors import AnharmonicError
from anharmonic_cli.exporters import write_json, write_table
from anharmonic_cli.fock import Model, ModelSpec, attractive_model, eigensystem, working_dim
from anharmonic_cli.formatters import format_levels, format_written

console = Console()


def level_spec(branch: str, magnitude: float, omega_a: float, dim: int) -> ModelSpec:
    if magnitude == 0.0:
        return ModelSpec(Model.QUARTIC, 0.0, omega_a, (), dim)
    if branch == "attractive":
        return attractive_model(-magnitude, omega_a, dim)
    return ModelSpec(Model.QUARTIC, magnitude, omega_a, (), dim)


def levels_frame(config: RunConfig) -> pd.DataFrame:
    levels = config.levels
    branches = ("repulsive", "attractive") if levels.branch == "both" else (levels.branch,)
    dim = config.truncation.dim_work or 2 * working_dim(levels.count)
    magnitudes = np.linspace(levels.u_min, levels.u_max, levels.u_points)

    rows = []
    for branch in branches:
        sign = -1.0 if branch == "attractive" else 1.0
        for magnitude in magnitudes:
            spec = level_spec(branch, float(magnitude), config.model.omega_a, dim)
            energies = eigensystem(spec, levels.count).energies
            row = {"branch": branch, "U": sign * float(magnitude)}
            row.update({f"e{j}": float(e) for j, e in enumerate(energies)})
            rows.append(row)
    return pd.DataFrame(rows)


def run(
    config_path: Path | None = None,
    out: Path | None = None,
    threads: int | None = None,
    seedless: bool = True,
) -> None:
    """Tabulate the level fan and write it."""
    try:
        config = with_overrides(load_config(config_path), out=out, threads=threads)
        frame = levels_frame(config)
        directory = Path(config.output.directory)
        summary = {
            "branches": sorted(set(frame["branch"])),
            "rows": len(frame),
            "count": config.levels.count,
        }
        paths = [
            write_table(directory / "levels.csv", frame, config),
            write_json(directory / "levels.json", summary, config, seedless=seedless),
        ]
        format_levels(frame)
        format_written(paths)
    except AnharmonicError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise SystemExit(e.exit_code)
