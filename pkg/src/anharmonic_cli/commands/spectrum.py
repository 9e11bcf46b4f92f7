"""One-photon emission spectrum seen by a frequency-tunable sensor."""

from pathlib import Path

import numpy as np
import pandas as pd
from rich.console import Console

from anharmonic_cli import system
from anharmonic_cli.config import RunConfig, load_config, with_overrides
from anharmonic_cli.errors import AnharmonicError
from anharmonic_cli.exporters import peaks_frame, write_json, write_table
from anharmonic_cli.field import Quadrature, frequency_components, g2_zero_delay, mean_intensity
from anharmonic_cli.formatters import format_peaks, format_summary, format_written
from anharmonic_cli.spectra import SensorCorrelator, SpectrumPeak, find_spectrum_peaks

console = Console()


def spectrum_frame(config: RunConfig) -> tuple[pd.DataFrame, list[SpectrumPeak], dict]:
    """Raw and ω²-weighted spectrum on the sensor grid, its peaks and a summary."""
    thermal = system.prepare_system(config)
    sensors = config.sensors
    correlator = SensorCorrelator(thermal.liouvillian, system.reordering_for(thermal, config), thermal.steady)
    omegas = np.linspace(sensors.omega_min, sensors.omega_max, sensors.points)
    raw = correlator.spectrum(omegas, sensors.gamma1)
    weighted = raw * omegas**2
    frame = pd.DataFrame({"omega": omegas, "s1_raw": raw, "s1_omega2": weighted})

    shown = weighted if sensors.prefactor == "omega_squared" else raw
    peaks = find_spectrum_peaks(omegas, shown, thermal.eigensystem)

    quadrature = Quadrature(sensors.quadrature)
    field = frequency_components(thermal.eigensystem, quadrature, derivative=False)
    derivative = frequency_components(thermal.eigensystem, quadrature)
    summary = {
        "keep": thermal.eigensystem.keep,
        "dim_work": thermal.eigensystem.dim_work,
        "intensity": mean_intensity(thermal.steady, field),
        "g2_derivative": g2_zero_delay(thermal.steady, derivative),
        "gamma1": sensors.gamma1,
    }
    return frame, peaks, summary


def run(
    config_path: Path | None = None,
    out: Path | None = None,
    threads: int | None = None,
    seedless: bool = True,
) -> None:
    """Compute the spectrum and write it with its peak table."""
    try:
        config = with_overrides(load_config(config_path), out=out, threads=threads)
        with console.status("Solving sensor spectrum..."):
            frame, peaks, summary = spectrum_frame(config)

        directory = Path(config.output.directory)
        paths = [
            write_table(directory / "spectrum.csv", frame, config),
            write_table(directory / "spectrum_peaks.csv", peaks_frame(peaks), config),
            write_json(directory / "spectrum.json", summary, config, seedless=seedless),
        ]
        format_summary("Spectrum", summary)
        format_peaks(peaks)
        format_written(paths)
    except AnharmonicError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise SystemExit(e.exit_code)
