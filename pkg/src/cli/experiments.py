"""Experiment presets, the run configuration model and its text/file loaders."""

from __future__ import annotations

import importlib.util
import json
import logging
import re
import sys
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from fields import GridSpec
from utils.config_validator import (
    ConfigValidationError,
    validate_config,
    validate_positive_integer,
    validate_power_of_two,
)

LOGGER = logging.getLogger("bilinpdo.cli")

TEXT_FORMATS = (".cfg", ".conf", ".txt")
SUPPORTED_FORMATS = (*TEXT_FORMATS, ".json", ".toml", ".yaml", ".yml")
GRID_KEYS = ("n", "T", "N")
_KEY_PATTERN = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class ExperimentName(str, Enum):
    LP_CHECK = "lp-check"
    UNIFORM_CHECK = "uniform-check"
    SPLIT_CHECK = "split-check"
    NORM = "norm"
    APPLY = "apply"
    DECOMPOSE_CHECK = "decompose-check"
    RATIO_PROBE = "ratio-probe"
    SHARPNESS = "sharpness"


@dataclass(frozen=True)
class ExperimentPreset:
    """Defaults and accepted keys of one experiment.

    ``variants`` hold extra defaults selected by the value of ``variant_key``.
    """

    name: ExperimentName
    summary: str
    params: Mapping[str, Any]
    grid: Mapping[str, int] = field(default_factory=dict)
    variant_key: str | None = None
    variants: Mapping[str, Mapping[str, Any]] = field(default_factory=dict)

    @property
    def keys(self) -> frozenset[str]:
        names = set(self.params)
        for extra in self.variants.values():
            names.update(extra)
        return frozenset(names)

    def accepted_keys(self, params: Mapping[str, Any]) -> frozenset[str]:
        """Base keys plus those of the variant ``params`` selects."""
        if self.variant_key is None:
            return self.keys
        variant = params.get(self.variant_key, self.params.get(self.variant_key))
        return frozenset({*self.params, *self.variants.get(str(variant), {})})


PRESETS: dict[ExperimentName, ExperimentPreset] = {
    preset.name: preset
    for preset in (
        ExperimentPreset(
            ExperimentName.LP_CHECK,
            "Littlewood-Paley partition residual |sum psi_k - 1|",
            {"K": 6, "points": 10_000, "sharpness": 1.0},
        ),
        ExperimentPreset(
            ExperimentName.UNIFORM_CHECK,
            "unit-cube pair identity sum kappa chi = 1 with side conditions",
            {"points": 10_000, "span": 20.0},
        ),
        ExperimentPreset(
            ExperimentName.SPLIT_CHECK,
            "three-term shell split residual and support boxes",
            {"j_max": 6, "samples": 256, "K": 10},
        ),
        ExperimentPreset(
            ExperimentName.NORM,
            "one function-space norm of a sampled input",
            {
                "space": "besov",
                "input": "gaussian",
                "p": 2.0,
                "q": 2.0,
                "s": 0.5,
                "width": 1.0,
            },
            {"T": 16, "N": 128},
        ),
        ExperimentPreset(
            ExperimentName.APPLY,
            "T_sigma(f, g) against the direct double-sum oracle",
            {"symbol": "shell", "j": 2, "rho": 0.0},
        ),
        ExperimentPreset(
            ExperimentName.DECOMPOSE_CHECK,
            "routed dual-form parts against the direct pairing",
            {"j0": 5, "rho": 0.0, "j_low": 1},
            {"N": 256},
        ),
        ExperimentPreset(
            ExperimentName.RATIO_PROBE,
            "output/input norm ratios over random band-limited pairs",
            {
                "j": 3,
                "rho": 0.0,
                "in_f": "L2",
                "in_g": "L2",
                "out": "h1",
                "trials": 50,
            },
        ),
        ExperimentPreset(
            ExperimentName.SHARPNESS,
            "sharpness family sweep with fitted slope",
            {"family": "eps_s12"},
            variant_key="family",
            variants={
                "eps_s12": {
                    "s1": 0.5,
                    "s2": 0.5,
                    "p": 2.0,
                    "q": 2.0,
                    "r": 1.0,
                    "lo": 6,
                    "hi": 10,
                },
                "wainger": {"a": 0.5, "b": 0.925, "p": 4.0, "lo": 3, "hi": 10},
                "s0": {
                    "a1": 0.5,
                    "a2": 0.5,
                    "b1": 0.7,
                    "b2": 0.7,
                    "m": -0.4,
                    "s0": 0.0,
                    "r": 1.0,
                    "check": 1,
                    "lo": 4,
                    "hi": 10,
                },
                "dilation": {
                    "m": -0.25,
                    "mp": -0.5,
                    "rho": 0.5,
                    "s": 0.5,
                    "lo": 1,
                    "hi": 4,
                },
            },
        ),
    )
}


class GridSettings(BaseModel):
    """Grid ``(n, T, N)`` of an experiment run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = Field(1, ge=1, le=2, description="Spatial dimension")
    T: int = Field(8, ge=1, description="Period of the box [-T/2, T/2)^n")
    N: int = Field(64, ge=8, description="Samples per axis")

    @field_validator("N")
    @classmethod
    def _power_of_two(cls, value: int) -> int:
        if value & (value - 1):
            raise ValueError(f"N must be a power of two, got: {value}")
        return value

    def spec(self) -> GridSpec:
        return GridSpec(self.n, self.T, self.N)


class ExperimentConfig(BaseModel):
    """A fully resolved experiment run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    experiment: ExperimentName
    grid: GridSettings = Field(default_factory=GridSettings)
    params: dict[str, Any] = Field(default_factory=dict)
    seed: int = Field(0, ge=0)
    output_dir: Path = Path("results")

    @model_validator(mode="after")
    def _known_params(self) -> "ExperimentConfig":
        accepted = PRESETS[self.experiment].accepted_keys(self.params)
        unknown = sorted(set(self.params) - accepted)
        if unknown:
            raise ValueError(
                f"unknown parameter(s) for {self.experiment.value}: "
                f"{', '.join(unknown)}; accepted: {', '.join(sorted(accepted))}"
            )
        return self

    @property
    def preset(self) -> ExperimentPreset:
        return PRESETS[self.experiment]


def coerce_value(raw: str) -> Any:
    """Interpret a text value as int, then float, then boolean, else string."""
    text = raw.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    return text


def _parse_assignment(
    line: str, source: str, line_no: int, sep_hint: str = "key = value"
) -> tuple[str, Any] | None:
    stripped = line.split("#", 1)[0]
    if not stripped.strip():
        return None
    indent = len(stripped) - len(stripped.lstrip())
    if "=" not in stripped:
        raise ConfigValidationError(
            f"{source}:{line_no}:{indent + 1}: expected '{sep_hint}'"
        )
    key_part, value_part = stripped.split("=", 1)
    key = key_part.strip()
    equals_col = len(key_part) + 1
    if not key:
        raise ConfigValidationError(f"{source}:{line_no}:{equals_col}: missing key")
    if not _KEY_PATTERN.fullmatch(key):
        raise ConfigValidationError(
            f"{source}:{line_no}:{indent + 1}: invalid key {key!r}"
        )
    if not value_part.strip():
        raise ConfigValidationError(
            f"{source}:{line_no}:{equals_col + 1}: missing value for {key}"
        )
    return key, coerce_value(value_part)


def parse_key_values(text: str, source: str = "<text>") -> dict[str, Any]:
    """Parse flat ``key = value`` lines; ``#`` starts a comment.

    Errors report ``source:line:column``.
    """
    values: dict[str, Any] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        parsed = _parse_assignment(line, source, line_no)
        if parsed is None:
            continue
        key, value = parsed
        if key in values:
            column = len(line) - len(line.lstrip()) + 1
            raise ConfigValidationError(
                f"{source}:{line_no}:{column}: duplicate key {key}"
            )
        values[key] = value
    return values


def parse_overrides(items: Iterable[str]) -> dict[str, Any]:
    """Parse ``key=value`` command-line arguments; later ones win."""
    values: dict[str, Any] = {}
    for index, item in enumerate(items, start=1):
        parsed = _parse_assignment(item, "<command line>", index, "key=value")
        if parsed is None:
            raise ConfigValidationError(
                f"<command line>:{index}:1: empty override {item!r}"
            )
        key, value = parsed
        values[key] = value
    return values


def load_config_file(config_path: Path) -> dict[str, Any]:
    if not config_path.exists():
        raise FileNotFoundError(
            f"Config file not found: {config_path}. Ensure the path is readable."
        )
    suffix = config_path.suffix.lower()
    if suffix not in SUPPORTED_FORMATS:
        supported = ", ".join(SUPPORTED_FORMATS)
        raise ConfigValidationError(
            f"Unsupported config format '{suffix}'. Supported formats: {supported}."
        )
    text = config_path.read_text(encoding="utf-8")
    if suffix in TEXT_FORMATS:
        return parse_key_values(text, str(config_path))
    try:
        if suffix == ".json":
            data = json.loads(text)
        elif suffix == ".toml":
            data = load_toml(text)
        else:
            data = load_yaml(text)
    except json.JSONDecodeError as exc:
        raise ConfigValidationError(
            f"{config_path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}"
        ) from exc
    except (ConfigValidationError, RuntimeError):
        raise
    except Exception as exc:
        raise ConfigValidationError(
            f"Failed to parse config file {config_path}: {exc}"
        ) from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigValidationError(
            f"Config file {config_path} must contain a mapping at the top level."
        )
    return _flatten(data)


def load_toml(text: str) -> dict[str, Any]:
    if sys.version_info >= (3, 11):
        import tomllib  # type: ignore[attr-defined]

        return tomllib.loads(text)
    if importlib.util.find_spec("tomli") is None:
        raise RuntimeError(
            "TOML config parsing requires Python 3.11+ or the 'tomli' package."
        )
    import tomli  # type: ignore[import-not-found]

    return tomli.loads(text)


def load_yaml(text: str) -> Any:
    if importlib.util.find_spec("yaml") is None:
        raise RuntimeError(
            "YAML config parsing requires PyYAML. Install it with 'pip install pyyaml'."
        )
    import yaml  # type: ignore[import-not-found]

    return yaml.safe_load(text)


def _flatten(data: Mapping[str, Any]) -> dict[str, Any]:
    """Lift nested ``grid`` and ``params`` tables to the top level."""
    flat: dict[str, Any] = {}
    for key, value in data.items():
        if key in ("grid", "params") and isinstance(value, Mapping):
            flat.update(value)
        else:
            flat[key] = value
    return flat


def build_config(
    experiment: str,
    *,
    config_path: Path | None = None,
    overrides: Iterable[str] = (),
    seed: int | None = None,
    output_dir: Path | None = None,
) -> ExperimentConfig:
    """Merge preset defaults, a config file and overrides (later wins)."""
    try:
        name = ExperimentName(experiment)
    except ValueError as exc:
        choices = ", ".join(e.value for e in ExperimentName)
        raise ConfigValidationError(
            f"experiment must be one of [{choices}], got: {experiment}"
        ) from exc
    preset = PRESETS[name]
    layers = [load_config_file(config_path)] if config_path else []
    layers.append(parse_overrides(overrides))

    run: dict[str, Any] = {}
    for layer in layers:
        run.update(layer)
    declared = run.pop("experiment", name.value)
    if declared != name.value:
        raise ConfigValidationError(
            f"config declares experiment {declared!r} but {name.value!r} was requested"
        )
    if seed is not None:
        run["seed"] = seed
    if output_dir is not None:
        run["out"] = str(output_dir)

    grid = {**preset.grid, **{k: run.pop(k) for k in GRID_KEYS if k in run}}
    validate_power_of_two(grid, "N", required=False)
    run_seed = run.pop("seed", 0)
    validate_positive_integer({"seed": run_seed}, "seed", minimum=0)
    out = Path(str(run.pop("out", "results"))).expanduser()

    params = dict(preset.params)
    if preset.variant_key:
        variant = run.get(preset.variant_key, params.get(preset.variant_key))
        params.update(preset.variants.get(str(variant), {}))
    params.update(run)

    try:
        config = ExperimentConfig(
            experiment=name,
            grid=GridSettings(**grid),
            params=params,
            seed=run_seed,
            output_dir=out,
        )
    except ValidationError as exc:
        raise ConfigValidationError(_validation_message(exc)) from exc
    validate_config(dict(config.params), name.value)
    LOGGER.debug("Resolved %s config: %s", name.value, config.model_dump())
    return config


def _validation_message(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        where = ".".join(str(p) for p in error.get("loc", ())) or "config"
        parts.append(f"{where}: {error.get('msg', 'invalid value')}")
    return "; ".join(parts)


def describe_experiments() -> list[str]:
    """One line per experiment: name, summary and accepted keys."""
    lines = []
    for preset in PRESETS.values():
        keys = ", ".join(sorted(preset.keys | set(GRID_KEYS)))
        lines.append(f"{preset.name.value}: {preset.summary} [{keys}]")
    return lines
