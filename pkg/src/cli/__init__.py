"""Command-line experiments, reports and the acceptance suite."""

from __future__ import annotations


def describe() -> str:
    return (
        "bilinpdo CLI: preset experiments with key=value overrides, "
        "CSV/SVG reports and a selftest."
    )


cli_describe = describe

__all__ = ["cli_describe", "describe"]
