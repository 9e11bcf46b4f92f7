"""Run configuration: TOML file, environment defaults and validation."""

import os
import tomllib
import types
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, get_args, get_origin, get_type_hints

from dotenv import load_dotenv

from anharmonic_cli.errors import ConfigError

load_dotenv()

MODEL_KINDS = ("kerr", "quartic", "series", "attractive")
DISSIPATORS = ("eigenbasis", "naive")
FIELDS = ("eigen", "ladder")
QUADRATURES = ("X", "P")
PREFACTORS = ("none", "omega_squared")
OBSERVABLES = ("kerr", "kerr-low-T", "kerr-continuum", "naive", "xdot", "pdot", "attractive")
SCALES = ("log", "linear")
BRANCHES = ("repulsive", "attractive", "both")


@dataclass(frozen=True)
class ModelSection:
    kind: str = "quartic"
    omega_a: float = 1.0
    U: float = 1e-3
    extra_orders: tuple[tuple[int, float], ...] = ()


@dataclass(frozen=True)
class TruncationSection:
    keep: int | None = None
    dim_work: int | None = None
    max_keep: int = 30
    tail: float = 1e-12
    max_dim: int = 1280


@dataclass(frozen=True)
class BathSection:
    gamma_a: float = 1e-4
    temperature: float = 0.3
    dissipator: str = "eigenbasis"


@dataclass(frozen=True)
class SensorSection:
    gamma1: float = 5e-4
    gamma2: float = 5e-4
    omega_min: float = 1.0
    omega_max: float = 1.06
    points: int = 60
    field: str = "eigen"
    quadrature: str = "X"
    derivative: bool = False
    prefactor: str = "omega_squared"


@dataclass(frozen=True)
class SweepSection:
    observable: str = "kerr"
    u_min: float = 0.006737946999085467
    u_max: float = 7.38905609893065
    u_points: int = 40
    u_scale: str = "log"
    t_min: float = 0.049787068367863944
    t_max: float = 20.085536923187668
    t_points: int = 40
    t_scale: str = "log"


@dataclass(frozen=True)
class LevelsSection:
    u_min: float = 0.0
    u_max: float = 0.1
    u_points: int = 21
    count: int = 8
    branch: str = "both"


@dataclass(frozen=True)
class ValidateSection:
    quick: bool = False
    map_points: int = 60


@dataclass(frozen=True)
class OutputSection:
    directory: str = "results"


@dataclass(frozen=True)
class RunConfig:
    model: ModelSection = field(default_factory=ModelSection)
    truncation: TruncationSection = field(default_factory=TruncationSection)
    bath: BathSection = field(default_factory=BathSection)
    sensors: SensorSection = field(default_factory=SensorSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    levels: LevelsSection = field(default_factory=LevelsSection)
    validate: ValidateSection = field(default_factory=ValidateSection)
    output: OutputSection = field(default_factory=OutputSection)
    threads: int = 1

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        hints = get_type_hints(cls)
        kwargs: dict[str, Any] = {}
        for key, value in data.items():
            if key not in hints:
                raise ConfigError(f"Unknown config key '{key}'")
            section = hints[key]
            if isinstance(section, type) and hasattr(section, "__dataclass_fields__"):
                if not isinstance(value, dict):
                    raise ConfigError(f"'{key}' must be a table")
                kwargs[key] = _build_section(section, value, key)
            else:
                kwargs[key] = _coerce(value, section, key)
        config = cls(**kwargs)
        validate_config(config)
        return config


def _build_section(cls: type, data: dict[str, Any], prefix: str) -> Any:
    hints = get_type_hints(cls)
    values = {}
    for key, value in data.items():
        path = f"{prefix}.{key}"
        if key not in hints:
            raise ConfigError(f"Unknown config key '{path}'")
        values[key] = _coerce(value, hints[key], path)
    return cls(**values)


def _coerce(value: Any, hint: Any, path: str) -> Any:
    origin = get_origin(hint)
    if origin is types.UnionType:
        if value is None:
            return None
        (inner,) = [arg for arg in get_args(hint) if arg is not type(None)]
        return _coerce(value, inner, path)
    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"'{path}' must be a list of [order, coefficient] pairs")
        pairs = []
        for item in value:
            if not isinstance(item, (list, tuple)) or len(item) != 2:
                raise ConfigError(f"'{path}' entries must be [order, coefficient] pairs")
            pairs.append((_coerce(item[0], int, path), _coerce(item[1], float, path)))
        return tuple(pairs)
    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"'{path}' must be true or false, got {value!r}")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"'{path}' must be an integer, got {value!r}")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"'{path}' must be a number, got {value!r}")
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(f"'{path}' must be a string, got {value!r}")
        return value
    raise ConfigError(f"Unsupported type for '{path}'")


def _require(condition: bool, path: str, message: str) -> None:
    if not condition:
        raise ConfigError(f"'{path}' {message}")


def _choice(value: str, choices: tuple[str, ...], path: str) -> None:
    _require(value in choices, path, f"must be one of {', '.join(choices)}, got '{value}'")


def validate_config(config: RunConfig) -> None:
    """Range and choice checks; raises ConfigError naming the offending field."""
    model, truncation, bath = config.model, config.truncation, config.bath
    sensors, sweep, levels = config.sensors, config.sweep, config.levels

    _choice(model.kind, MODEL_KINDS, "model.kind")
    _require(model.omega_a > 0, "model.omega_a", "must be positive")
    if model.kind == "attractive":
        _require(model.U < 0, "model.U", "must be negative for the attractive model")
    for order, _ in model.extra_orders:
        _require(
            order >= 6 and order % 2 == 0,
            "model.extra_orders",
            f"orders must be even and >= 6, got {order}",
        )

    if truncation.keep is not None:
        _require(truncation.keep >= 2, "truncation.keep", "must be >= 2")
    if truncation.dim_work is not None:
        _require(truncation.dim_work >= 2, "truncation.dim_work", "must be >= 2")
        if truncation.keep is not None:
            _require(
                truncation.keep <= truncation.dim_work,
                "truncation.keep",
                "must not exceed truncation.dim_work",
            )
    _require(truncation.max_keep >= 2, "truncation.max_keep", "must be >= 2")
    _require(0 < truncation.tail < 1, "truncation.tail", "must lie in (0, 1)")
    _require(truncation.max_dim >= 8, "truncation.max_dim", "must be >= 8")

    _require(bath.gamma_a > 0, "bath.gamma_a", "must be positive")
    _require(bath.temperature > 0, "bath.temperature", "must be positive")
    _choice(bath.dissipator, DISSIPATORS, "bath.dissipator")

    _require(sensors.gamma1 > 0, "sensors.gamma1", "must be positive")
    _require(sensors.gamma2 > 0, "sensors.gamma2", "must be positive")
    _require(sensors.omega_max > sensors.omega_min, "sensors.omega_max", "must exceed sensors.omega_min")
    _require(sensors.points >= 1, "sensors.points", "must be >= 1")
    _choice(sensors.field, FIELDS, "sensors.field")
    _choice(sensors.quadrature, QUADRATURES, "sensors.quadrature")
    _choice(sensors.prefactor, PREFACTORS, "sensors.prefactor")

    _choice(sweep.observable, OBSERVABLES, "sweep.observable")
    for axis in ("u", "t"):
        low, high = getattr(sweep, f"{axis}_min"), getattr(sweep, f"{axis}_max")
        _require(low > 0, f"sweep.{axis}_min", "must be positive")
        _require(high >= low, f"sweep.{axis}_max", f"must be >= sweep.{axis}_min")
        _require(getattr(sweep, f"{axis}_points") >= 1, f"sweep.{axis}_points", "must be >= 1")
        _choice(getattr(sweep, f"{axis}_scale"), SCALES, f"sweep.{axis}_scale")

    _require(levels.u_min >= 0, "levels.u_min", "must be >= 0 (the branch sets the sign)")
    _require(levels.u_max >= levels.u_min, "levels.u_max", "must be >= levels.u_min")
    _require(levels.u_points >= 1, "levels.u_points", "must be >= 1")
    _require(levels.count >= 2, "levels.count", "must be >= 2")
    _choice(levels.branch, BRANCHES, "levels.branch")

    _require(config.validate.map_points >= 3, "validate.map_points", "must be >= 3")
    _require(config.threads >= 1, "threads", "must be >= 1")


def _env_defaults() -> dict[str, Any]:
    defaults: dict[str, Any] = {}
    out = os.environ.get("ANHARMONIC_OUT")
    if out:
        defaults["output"] = {"directory": out}
    threads = os.environ.get("ANHARMONIC_THREADS")
    if threads:
        try:
            defaults["threads"] = int(threads)
        except ValueError as e:
            raise ConfigError(f"ANHARMONIC_THREADS must be an integer, got '{threads}'") from e
    return defaults


def load_config(path: Path | None = None) -> RunConfig:
    """Read a TOML run configuration; environment fills keys the file leaves out."""
    data: dict[str, Any] = {}
    if path is not None:
        if not path.is_file():
            raise ConfigError(f"Config file not found: {path}")
        try:
            with path.open("rb") as handle:
                data = tomllib.load(handle)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"{path}: {e}") from e

    for key, value in _env_defaults().items():
        if isinstance(value, dict):
            section = data.setdefault(key, {})
            for inner, inner_value in value.items():
                section.setdefault(inner, inner_value)
        else:
            data.setdefault(key, value)
    return RunConfig.from_dict(data)


def with_overrides(config: RunConfig, *, out: Path | None = None, threads: int | None = None) -> RunConfig:
    """Apply command-line flags on top of a loaded configuration."""
    if out is not None:
        config = replace(config, output=OutputSection(directory=str(out)))
    if threads is not None:
        config = replace(config, threads=threads)
    validate_config(config)
    return config
