"""Tests for validators, slope fits, compensated sums, threads and logging."""

from __future__ import annotations

import json
import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from utils.config_validator import (
    ConfigValidationError,
    validate_choice,
    validate_config,
    validate_exponent,
    validate_number_range,
    validate_positive_integer,
    validate_power_of_two,
)
from utils.errors import DegenerateFitError, ToleranceFailure
from utils.logging_config import LogContext, StructuredFormatter, setup_logging
from utils.slopes import fit_line, fit_loglog, fit_semilog
from utils.summation import stable_norm, stable_sum
from utils.threads import THREADS_ENV, parallel_map, worker_count


def test_validate_positive_integer_messages():
    """Missing, non-integer and too small values are reported by field name."""
    with pytest.raises(ConfigValidationError, match="Missing required field: K"):
        validate_positive_integer({}, "K")
    with pytest.raises(ConfigValidationError, match="K must be an integer"):
        validate_positive_integer({"K": 2.5}, "K")
    with pytest.raises(ConfigValidationError, match="K must be an integer"):
        validate_positive_integer({"K": True}, "K")
    with pytest.raises(ConfigValidationError, match="K must be >= 1"):
        validate_positive_integer({"K": 0}, "K")
    validate_positive_integer({}, "K", required=False)


def test_validate_power_of_two():
    """Sample counts must be powers of two no smaller than eight."""
    validate_power_of_two({"N": 64}, "N")
    with pytest.raises(ConfigValidationError, match="power of two"):
        validate_power_of_two({"N": 48}, "N")
    with pytest.raises(ConfigValidationError, match="N must be >= 8"):
        validate_power_of_two({"N": 4}, "N")


def test_validate_choice_and_ranges():
    """Choices list the accepted values; ranges honour the closed upper end."""
    with pytest.raises(ConfigValidationError, match=r"must be one of \[a, b\]"):
        validate_choice({"x": "c"}, "x", {"a", "b"})
    validate_number_range({"s1": 0.5}, "s1", 0.0, 0.5, closed_high=True)
    with pytest.raises(ConfigValidationError, match=r"must lie in \[0, 1\)"):
        validate_number_range({"rho": 1.0}, "rho", 0.0, 1.0)
    validate_exponent({"p": math.inf}, "p")
    with pytest.raises(ConfigValidationError, match=r"\[1, inf\]"):
        validate_exponent({"p": 0.5}, "p")


def test_validate_config_dispatch():
    """Experiments are validated by name; unknown names are rejected."""
    validate_config({"K": 6, "points": 100, "sharpness": 1.0}, "lp-check")
    with pytest.raises(ConfigValidationError, match="K must be >= j_max \\+ 2"):
        validate_config({"j_max": 6, "samples": 64, "K": 7}, "split-check")
    with pytest.raises(ConfigValidationError, match="experiment must be one of"):
        validate_config({}, "nope")
    with pytest.raises(ConfigValidationError, match="must be a dictionary"):
        validate_config([], "lp-check")  # type: ignore[arg-type]


def test_validate_sharpness_family_rules():
    """Sweeps need at least four levels; dilation needs a positive rho."""
    base = {"family": "eps_s12", "s1": 0.25, "s2": 0.5, "lo": 6, "hi": 8}
    with pytest.raises(ConfigValidationError, match="hi - lo must be >= 3"):
        validate_config(base, "sharpness")
    dilation = {
        "family": "dilation",
        "m": -0.25,
        "mp": -0.5,
        "rho": 0.0,
        "s": 0.5,
        "lo": 1,
        "hi": 4,
    }
    with pytest.raises(ConfigValidationError, match="rho must be positive"):
        validate_config(dilation, "sharpness")


def test_fit_loglog_recovers_power_law():
    """A pure power law y = 3 x^-1.5 fits with slope -1.5 and no residual."""
    x = [2.0**k for k in range(1, 8)]
    y = [3.0 * v**-1.5 for v in x]
    fit = fit_loglog(x, y)
    assert fit.slope == pytest.approx(-1.5)
    assert fit.intercept == pytest.approx(math.log2(3.0))
    assert fit.residual == pytest.approx(0.0, abs=1e-12)
    assert fit.points == 7


def test_fit_semilog_slope():
    """log2 of 2^(0.5 x) against x has slope 0.5."""
    x = [1.0, 2.0, 3.0, 4.0]
    fit = fit_semilog(x, [2.0 ** (0.5 * v) for v in x])
    assert fit.slope == pytest.approx(0.5)


def test_fit_degenerate_inputs():
    """Too few points, repeated x and non-positive data are rejected."""
    with pytest.raises(DegenerateFitError, match="at least 3 points"):
        fit_line([1.0, 2.0], [1.0, 2.0], min_points=3)
    with pytest.raises(DegenerateFitError, match="distinct x"):
        fit_line([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(DegenerateFitError, match="positive data"):
        fit_loglog([1.0, 2.0], [0.0, 1.0])
    with pytest.raises(DegenerateFitError, match="equal length"):
        fit_line([1.0, 2.0, 3.0], [1.0, 2.0])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=40), st.randoms())
def test_stable_sum_is_order_independent(values, rnd):
    """Exactly rounded sums do not depend on the summation order."""
    shuffled = list(values)
    rnd.shuffle(shuffled)
    assert stable_sum(values) == stable_sum(shuffled)


def test_stable_sum_cancellation():
    """Catastrophic cancellation is resolved exactly."""
    values = np.array([1e16, 1.0, -1e16, 1j])
    assert stable_sum(values) == complex(1.0, 1.0)


def test_stable_norm_matches_definition():
    """Discrete p-norms with a cell weight; p = inf is the max modulus."""
    values = np.array([3.0, -4.0])
    assert stable_norm(values, 2.0) == pytest.approx(5.0)
    assert stable_norm(values, 1.0, cell=0.5) == pytest.approx(3.5)
    assert stable_norm(values, math.inf) == 4.0
    assert stable_norm(np.zeros(3), 2.0) == 0.0
    assert stable_norm(np.array([1e200, 1e200]), 4.0) == pytest.approx(
        1e200 * 2.0**0.25
    )


def test_worker_count_reads_environment(monkeypatch, caplog):
    """The thread cap falls back to one on missing or invalid values."""
    monkeypatch.delenv(THREADS_ENV, raising=False)
    assert worker_count() == 1
    monkeypatch.setenv(THREADS_ENV, "4")
    assert worker_count() == 4
    monkeypatch.setenv(THREADS_ENV, "zero")
    with caplog.at_level(logging.WARNING, logger="bilinpdo.threads"):
        assert worker_count() == 1
    assert "non-integer" in caplog.text
    monkeypatch.setenv(THREADS_ENV, "-2")
    assert worker_count() == 1


def test_parallel_map_keeps_order(monkeypatch):
    """Results come back in submission order whatever the worker count."""
    items = list(range(32))
    monkeypatch.setenv(THREADS_ENV, "1")
    serial = parallel_map(lambda v: v * v, items)
    monkeypatch.setenv(THREADS_ENV, "4")
    threaded = parallel_map(lambda v: v * v, items)
    assert serial == threaded == [v * v for v in items]
    assert parallel_map(lambda v: v, []) == []


def test_tolerance_failure_carries_row():
    """The offending row travels with the exception as a copy."""
    row = {"k": 3, "residual": 2e-12}
    exc = ToleranceFailure("residual too large", row=row)
    row["k"] = 4
    assert exc.row == {"k": 3, "residual": 2e-12}
    assert ToleranceFailure("no row").row == {}


def test_log_context_nests_and_restores(caplog):
    """Nested contexts stack their fields and restore the factory on exit."""
    logger = logging.getLogger("bilinpdo.test")
    factory = logging.getLogRecordFactory()
    with caplog.at_level(logging.INFO, logger="bilinpdo.test"):
        with LogContext(experiment="decompose-check"):
            with LogContext(j=5):
                logger.info("inner")
            logger.info("outer")
    assert logging.getLogRecordFactory() is factory
    inner, outer = caplog.records[-2:]
    assert inner.experiment == "decompose-check"
    assert inner.j == 5
    assert outer.experiment == "decompose-check"
    assert not hasattr(outer, "j")


def test_structured_formatter_emits_context_fields():
    """JSON records carry the message and extra context keys."""
    record = logging.LogRecord(
        "bilinpdo.cli", logging.INFO, __file__, 1, "ran %s", ("lp-check",), None
    )
    record.experiment = "lp-check"
    payload = json.loads(StructuredFormatter().format(record))
    assert payload["message"] == "ran lp-check"
    assert payload["level"] == "INFO"
    assert payload["experiment"] == "lp-check"


def test_setup_logging_writes_file(tmp_path):
    """A log file receives records at the configured level."""
    log_file = tmp_path / "logs" / "run.log"
    setup_logging("INFO", structured=True, log_file=str(log_file))
    try:
        logging.getLogger("bilinpdo.test").info("hello")
        for handler in logging.getLogger().handlers:
            handler.flush()
        line = log_file.read_text(encoding="utf-8").strip().splitlines()[-1]
        assert json.loads(line)["message"] == "hello"
    finally:
        setup_logging("WARNING")
