"""Configuration validation utilities for bilinpdo experiments."""

from __future__ import annotations

import math
from typing import Any


class ConfigValidationError(ValueError):
    """Raised when configuration validation fails."""


def _number(config: dict[str, Any], field: str) -> float:
    value = config[field]
    if isinstance(value, bool):
        raise ConfigValidationError(f"{field} must be a valid number, got: {value}")
    try:
        return float(value)
    except (ValueError, TypeError) as exc:
        raise ConfigValidationError(
            f"{field} must be a valid number, got: {value}"
        ) from exc


def _present(config: dict[str, Any], field: str, required: bool) -> bool:
    if field in config:
        return True
    if required:
        raise ConfigValidationError(f"Missing required field: {field}")
    return False


def validate_positive_number(
    config: dict[str, Any], field: str, *, required: bool = True
) -> None:
    """Validate that a field is a positive finite number."""
    if not _present(config, field, required):
        return
    value = _number(config, field)
    if not math.isfinite(value) or value <= 0:
        raise ConfigValidationError(f"{field} must be positive, got: {value}")


def validate_number_range(
    config: dict[str, Any],
    field: str,
    low: float,
    high: float,
    *,
    required: bool = True,
    closed_high: bool = False,
) -> None:
    """Validate ``low <= value < high`` (``<= high`` with ``closed_high``)."""
    if not _present(config, field, required):
        return
    value = _number(config, field)
    upper_ok = value <= high if closed_high else value < high
    if not (low <= value and upper_ok):
        bracket = "]" if closed_high else ")"
        raise ConfigValidationError(
            f"{field} must lie in [{low:g}, {high:g}{bracket}, got: {value}"
        )


def validate_exponent(
    config: dict[str, Any], field: str, *, required: bool = True
) -> None:
    """Validate a Lebesgue exponent in ``[1, inf]``."""
    if not _present(config, field, required):
        return
    value = _number(config, field)
    if math.isnan(value) or value < 1:
        raise ConfigValidationError(f"{field} must lie in [1, inf], got: {value}")


def validate_real(config: dict[str, Any], field: str, *, required: bool = True) -> None:
    if not _present(config, field, required):
        return
    value = _number(config, field)
    if not math.isfinite(value):
        raise ConfigValidationError(f"{field} must be finite, got: {value}")


def validate_positive_integer(
    config: dict[str, Any], field: str, *, required: bool = True, minimum: int = 1
) -> None:
    """Validate that a field is an integer no smaller than ``minimum``."""
    if not _present(config, field, required):
        return

    value = config[field]
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigValidationError(
            f"{field} must be an integer, got: {type(value).__name__}"
        )

    if value < minimum:
        raise ConfigValidationError(f"{field} must be >= {minimum}, got: {value}")


def validate_power_of_two(
    config: dict[str, Any], field: str, *, required: bool = True, minimum: int = 8
) -> None:
    """Validate a sample count: an integer power of two, at least ``minimum``."""
    validate_positive_integer(config, field, required=required, minimum=minimum)
    if field in config and config[field] & (config[field] - 1):
        raise ConfigValidationError(
            f"{field} must be a power of two, got: {config[field]}"
        )


def validate_choice(
    config: dict[str, Any], field: str, choices: set[str], *, required: bool = True
) -> None:
    """Validate that a field is one of the allowed choices."""
    if not _present(config, field, required):
        return

    value = config[field]
    if not isinstance(value, str):
        raise ConfigValidationError(
            f"{field} must be a string, got: {type(value).__name__}"
        )

    if value not in choices:
        choices_str = ", ".join(sorted(choices))
        raise ConfigValidationError(
            f"{field} must be one of [{choices_str}], got: {value}"
        )


def validate_lp_check(config: dict[str, Any]) -> None:
    validate_positive_integer(config, "K", minimum=1)
    validate_positive_integer(config, "points", minimum=1)
    validate_number_range(config, "sharpness", 1.0, math.inf)


def validate_uniform_check(config: dict[str, Any]) -> None:
    validate_positive_integer(config, "points", minimum=1)
    validate_positive_number(config, "span")


def validate_split_check(config: dict[str, Any]) -> None:
    validate_positive_integer(config, "j_max", minimum=1)
    validate_positive_integer(config, "samples", minimum=16)
    validate_positive_integer(config, "K", minimum=2)
    if config["K"] < config["j_max"] + 2:
        raise ConfigValidationError(
            f"K must be >= j_max + 2, got: K={config['K']}, j_max={config['j_max']}"
        )


def validate_norm(config: dict[str, Any]) -> None:
    validate_choice(
        config, "space", {"lp", "ul2", "besov", "sobolev", "h1", "bmo", "BMO"}
    )
    validate_choice(config, "input", {"gaussian", "random"})
    validate_exponent(config, "p")
    validate_exponent(config, "q")
    validate_real(config, "s")
    validate_positive_number(config, "width")


def validate_apply(config: dict[str, Any]) -> None:
    validate_choice(config, "symbol", {"one", "separable", "shell"})
    validate_positive_integer(config, "j", minimum=0)
    validate_number_range(config, "rho", 0.0, 1.0)


def validate_decompose_check(config: dict[str, Any]) -> None:
    validate_positive_integer(config, "j0", minimum=0)
    validate_positive_integer(config, "j_low", minimum=1)
    validate_number_range(config, "rho", 0.0, 1.0)


def validate_ratio_probe(config: dict[str, Any]) -> None:
    validate_positive_integer(config, "j", minimum=0)
    validate_number_range(config, "rho", 0.0, 1.0)
    validate_choice(config, "in_f", {"L2", "bmo"})
    validate_choice(config, "in_g", {"L2", "bmo"})
    validate_choice(config, "out", {"h1", "L2", "L1"})
    validate_positive_integer(config, "trials", minimum=1)


def validate_sharpness(config: dict[str, Any]) -> None:
    validate_choice(config, "family", {"eps_s12", "wainger", "s0", "dilation"})
    family = config["family"]
    validate_positive_integer(config, "lo", minimum=0)
    validate_positive_integer(config, "hi", minimum=0)
    if config["hi"] - config["lo"] < 3:
        raise ConfigValidationError(
            f"hi - lo must be >= 3 for a slope fit, got: lo={config['lo']}, "
            f"hi={config['hi']}"
        )
    for field in ("p", "q", "r"):
        validate_exponent(config, field, required=False)
    if family == "eps_s12":
        validate_number_range(config, "s1", 0.0, 0.5, closed_high=True)
        validate_real(config, "s2")
    elif family == "wainger":
        validate_number_range(config, "a", 0.0, 1.0)
        validate_real(config, "b")
    elif family == "s0":
        for field in ("a1", "a2"):
            validate_number_range(config, field, 0.0, 1.0)
        for field in ("b1", "b2", "m", "s0"):
            validate_real(config, field)
        validate_positive_integer(config, "check", minimum=1)
    else:
        validate_number_range(config, "rho", 0.0, 1.0)
        for field in ("m", "mp", "s"):
            validate_real(config, field)
        if config["rho"] == 0.0:
            raise ConfigValidationError("rho must be positive for the dilation family")


EXPERIMENT_VALIDATORS = {
    "lp-check": validate_lp_check,
    "uniform-check": validate_uniform_check,
    "split-check": validate_split_check,
    "norm": validate_norm,
    "apply": validate_apply,
    "decompose-check": validate_decompose_check,
    "ratio-probe": validate_ratio_probe,
    "sharpness": validate_sharpness,
}


def validate_config(config: dict[str, Any], experiment: str | None = None) -> None:
    """
    Validate the parameters of one experiment.

    Args:
        config: Parameter dictionary (preset defaults already merged)
        experiment: Experiment name (e.g., 'lp-check', 'sharpness')

    Raises:
        ConfigValidationError: If the parameters are invalid
    """
    if not isinstance(config, dict):
        raise ConfigValidationError("Configuration must be a dictionary")

    if experiment is None:
        return
    validator = EXPERIMENT_VALIDATORS.get(experiment)
    if validator is None:
        choices_str = ", ".join(sorted(EXPERIMENT_VALIDATORS))
        raise ConfigValidationError(
            f"experiment must be one of [{choices_str}], got: {experiment}"
        )
    validator(config)
