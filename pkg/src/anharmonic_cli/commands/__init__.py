"""anharmonic-cli commands."""
