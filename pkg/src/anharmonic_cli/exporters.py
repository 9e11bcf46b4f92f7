"""Write result tables and JSON documents with their provenance header."""

import hashlib
import json
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from anharmonic_cli import __version__
from anharmonic_cli.config import RunConfig
from anharmonic_cli.spectra import CorrelationMap, SpectrumPeak

FLOAT_FORMAT = "%.15e"

CONVENTIONS = {
    "quadrature_scale": "X0 = P0 = 1",
    "spectrum": "S(w) = (1/pi) Re int_0^inf exp((i w - Gamma/2) t) <X-(0) X+(t)> dt",
    "vectorization": "row-major, <j|rho|k> at j*D + k",
}


def _default(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Cannot serialise {type(value).__name__}")


def _dumps(payload: Any, **kwargs) -> str:
    return json.dumps(payload, sort_keys=True, default=_default, **kwargs)


def content_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def provenance(config: RunConfig, seedless: bool = True) -> dict[str, Any]:
    return {
        "config": config.to_dict(),
        "conventions": CONVENTIONS,
        "seedless": seedless,
        "version": __version__,
    }


def write_table(path: Path, frame: pd.DataFrame, config: RunConfig) -> Path:
    """CSV with `# config:` and `# sha256:` comment lines above the body."""
    body = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    header = f"# config: {_dumps(config.to_dict())}\n# sha256: {content_hash(body)}\n"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(header + body, encoding="utf-8")
    return path


def write_json(path: Path, payload: dict[str, Any], config: RunConfig, *, seedless: bool = True) -> Path:
    data = _dumps(payload, indent=2)
    document = {"provenance": provenance(config, seedless), "sha256": content_hash(data), "data": payload}
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_dumps(document, indent=2) + "\n", encoding="utf-8")
    return path


def read_table(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def peaks_frame(peaks: list[SpectrumPeak]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "omega": p.omega,
                "value": p.value,
                "lower": -1 if p.lower is None else p.lower,
                "upper": -1 if p.upper is None else p.upper,
                "transition": np.nan if p.transition is None else p.transition,
            }
            for p in peaks
        ],
        columns=["omega", "value", "lower", "upper", "transition"],
    )


def map_frame(cmap: CorrelationMap) -> pd.DataFrame:
    """Long-format table with one row per (ω₁, ω₂)."""
    omega1, omega2 = np.meshgrid(cmap.omega1, cmap.omega2, indexing="ij")
    return pd.DataFrame(
        {
            "omega1": omega1.ravel(),
            "omega2": omega2.ravel(),
            "g2": cmap.values.ravel(),
            "s1_omega1": np.repeat(cmap.s1_row, len(cmap.omega2)),
            "s1_omega2": np.tile(cmap.s1_col, len(cmap.omega1)),
        }
    )
