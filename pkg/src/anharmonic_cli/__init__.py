"""anharmonic-cli - Thermal emission spectra of a nonlinear resonator."""

__version__ = "0.1.0"
