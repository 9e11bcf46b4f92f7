"""Rich formatters for run results."""

from collections.abc import Sequence
from pathlib import Path
from typing import Any

import pandas as pd
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from anharmonic_cli.spectra import SpectrumPeak

console = Console()


def format_number(value: float) -> str:
    return f"{value:.6g}"


def format_summary(title: str, values: dict[str, Any]) -> None:
    """Print key/value pairs in a panel."""
    lines = []
    for key, value in values.items():
        shown = format_number(value) if isinstance(value, float) else str(value)
        lines.append(f"[bold]{key}:[/bold] {shown}")
    console.print(Panel("\n".join(lines), title=title, border_style="cyan"))


def format_levels(frame: pd.DataFrame) -> None:
    if frame.empty:
        console.print("[yellow]No levels computed.[/yellow]")
        return

    table = Table(title="Energy Levels", show_header=True, header_style="bold cyan")
    for column in frame.columns:
        table.add_column(column, justify="right" if column != "branch" else "left")
    for row in frame.itertuples(index=False):
        table.add_row(*(format_number(v) if isinstance(v, float) else str(v) for v in row))
    console.print(table)


def format_peaks(peaks: Sequence[SpectrumPeak]) -> None:
    if not peaks:
        console.print("[yellow]No spectral peaks found.[/yellow]")
        return

    table = Table(title="Spectral Peaks", show_header=True, header_style="bold cyan")
    table.add_column("ω", justify="right")
    table.add_column("S(ω)", justify="right")
    table.add_column("Transition", style="dim")
    table.add_column("Δ", justify="right", style="dim")
    for peak in peaks:
        label = f"{peak.upper} → {peak.lower}" if peak.upper is not None else "-"
        delta = format_number(peak.transition) if peak.transition is not None else "-"
        table.add_row(format_number(peak.omega), format_number(peak.value), label, delta)
    console.print(table)


def format_validation(checks: Sequence[Any]) -> None:
    """Print one row per validation check."""
    if not checks:
        console.print("[yellow]No checks run.[/yellow]")
        return

    table = Table(title="Validation", show_header=True, header_style="bold cyan")
    table.add_column("Check", style="bold")
    table.add_column("Measured", justify="right")
    table.add_column("Tolerance", justify="right")
    table.add_column("Result")
    for check in checks:
        if check.passed:
            result = "[green]✓ pass[/green]"
        elif check.required:
            result = "[red]✗ fail[/red]"
        else:
            result = "[yellow]! off[/yellow]"
        table.add_row(check.name, format_number(check.measured), format_number(check.tolerance), result)
    console.print(table)


def format_written(paths: Sequence[Path]) -> None:
    for path in paths:
        console.print(f"[green]✓[/green] Wrote {path}")
