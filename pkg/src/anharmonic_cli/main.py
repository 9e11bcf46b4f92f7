"""Anharmonic CLI main entry point."""

import logging
import os
from pathlib import Path
from typing import Annotated, Optional

import typer
from rich.console import Console
from rich.logging import RichHandler

from anharmonic_cli.commands import levels, spectrum, sweep, twophoton, validate

app = typer.Typer(
    name="anharmonic",
    help="Photon statistics and spectra of a thermal anharmonic resonator",
    no_args_is_help=True,
)

ConfigOption = Annotated[
    Optional[Path], typer.Option("--config", "-c", help="TOML run configuration")
]
OutOption = Annotated[Optional[Path], typer.Option("--out", "-o", help="Output directory")]
ThreadsOption = Annotated[Optional[int], typer.Option("--threads", "-j", help="Worker threads")]
SeedlessOption = Annotated[
    bool, typer.Option("--seedless", help="Assert the run draws no random numbers; recorded in provenance")
]
VerboseOption = Annotated[bool, typer.Option("--verbose", "-v", help="Log solver progress")]


def configure_logging(verbose: bool) -> None:
    level = "INFO" if verbose else os.environ.get("ANHARMONIC_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


@app.command("sweep-g2")
def sweep_cmd(
    config: ConfigOption = None,
    out: OutOption = None,
    threads: ThreadsOption = None,
    seedless: SeedlessOption = False,
    verbose: VerboseOption = False,
) -> None:
    """Sweep g(2)(0) over the (U, T) grid."""
    configure_logging(verbose)
    sweep.run(config, out, threads, seedless)


@app.command("spectrum")
def spectrum_cmd(
    config: ConfigOption = None,
    out: OutOption = None,
    threads: ThreadsOption = None,
    seedless: SeedlessOption = False,
    verbose: VerboseOption = False,
) -> None:
    """Compute the one-photon sensor spectrum."""
    configure_logging(verbose)
    spectrum.run(config, out, threads, seedless)


@app.command("two-photon-map")
def two_photon_cmd(
    config: ConfigOption = None,
    out: OutOption = None,
    threads: ThreadsOption = None,
    seedless: SeedlessOption = False,
    verbose: VerboseOption = False,
) -> None:
    """Compute the frequency-resolved g(2) map."""
    configure_logging(verbose)
    twophoton.run(config, out, threads, seedless)


@app.command("levels")
def levels_cmd(
    config: ConfigOption = None,
    out: OutOption = None,
    seedless: SeedlessOption = False,
    verbose: VerboseOption = False,
) -> None:
    """Tabulate the lowest eigenenergies against U."""
    configure_logging(verbose)
    levels.run(config, out, None, seedless)


@app.command("validate")
def validate_cmd(
    config: ConfigOption = None,
    out: OutOption = None,
    threads: ThreadsOption = None,
    seedless: SeedlessOption = False,
    verbose: VerboseOption = False,
) -> None:
    """Run the reference checks; exits 3 when a required check fails."""
    configure_logging(verbose)
    validate.run(config, out, threads, seedless)


if __name__ == "__main__":
    app()
