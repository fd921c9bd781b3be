"""Tests for the bilinpdo command line: config layering, reports and exit codes."""

from __future__ import annotations

import csv
import json

import pytest

from cli.experiments import (
    ExperimentName,
    build_config,
    coerce_value,
    describe_experiments,
    parse_key_values,
    parse_overrides,
)
from cli import runners
from cli.main import build_parser, main
from cli.report import PlotSeries, format_value, render_svg, table_columns
from cli.selftest import CRITERIA, MODULES, select
from utils.config_validator import ConfigValidationError
from utils.slopes import fit_loglog


def _read_csv(path):
    with path.open(newline="", encoding="utf-8") as handle:
        return list(csv.reader(handle))


def test_coerce_value_order():
    """Text values become int, then float, then bool, else stay strings."""
    assert coerce_value(" 6 ") == 6
    assert isinstance(coerce_value("6"), int)
    assert coerce_value("0.25") == 0.25
    assert coerce_value("1e-3") == 1e-3
    assert coerce_value("TRUE") is True
    assert coerce_value("false") is False
    assert coerce_value("eps_s12") == "eps_s12"


def test_parse_key_values_comments_and_blank_lines():
    """Comments and blank lines are skipped; values are coerced."""
    text = "# lp run\nK = 6\n\nsharpness = 1.5  # steeper ramp\n"
    assert parse_key_values(text, "run.cfg") == {"K": 6, "sharpness": 1.5}


@pytest.mark.parametrize(
    ("text", "message"),
    [
        ("K = 6\nbogus line", r"run.cfg:2:1: expected 'key = value'"),
        ("  = 5", r"run.cfg:1:3: missing key"),
        ("K =", r"run.cfg:1:4: missing value for K"),
        ("1K = 5", r"run.cfg:1:1: invalid key '1K'"),
        ("K = 6\n  K = 7", r"run.cfg:2:3: duplicate key K"),
    ],
)
def test_parse_key_values_reports_line_and_column(text, message):
    """Parse errors name the source, line and column."""
    with pytest.raises(ConfigValidationError, match=message):
        parse_key_values(text, "run.cfg")


def test_parse_overrides_later_wins():
    """Repeated command-line keys keep the last value."""
    assert parse_overrides(["K=4", "K=5", "n=2"]) == {"K": 5, "n": 2}
    with pytest.raises(ConfigValidationError, match="<command line>:2:1"):
        parse_overrides(["K=4", "K"])


def test_build_config_applies_preset_and_grid_keys():
    """Presets fill the defaults; n, T and N go to the grid."""
    config = build_config("decompose-check", overrides=["j0=3", "T=16"])
    assert config.experiment is ExperimentName.DECOMPOSE_CHECK
    assert config.params == {"j0": 3, "rho": 0.0, "j_low": 1}
    assert (config.grid.n, config.grid.T, config.grid.N) == (1, 16, 256)
    assert config.seed == 0


def test_build_config_rejects_unknown_keys():
    """A misspelt key is an error listing the accepted keys."""
    with pytest.raises(ConfigValidationError, match="unknown parameter.*kk"):
        build_config("lp-check", overrides=["kk=3"])


def test_build_config_rejects_bad_grid_and_experiment():
    """Grid sizes must be powers of two and experiment names must exist."""
    with pytest.raises(ConfigValidationError, match="power of two"):
        build_config("lp-check", overrides=["N=48"])
    with pytest.raises(ConfigValidationError, match="experiment must be one of"):
        build_config("nope")
    with pytest.raises(ConfigValidationError, match="less than or equal to 2"):
        build_config("lp-check", overrides=["n=3"])


def test_build_config_sharpness_variant_defaults():
    """The sharpness family selects its own default parameters."""
    config = build_config("sharpness", overrides=["family=wainger"])
    assert config.params["a"] == 0.5
    assert config.params["b"] == 0.925
    assert "s1" not in config.params
    with pytest.raises(ConfigValidationError, match="unknown parameter.*zeta"):
        build_config("sharpness", overrides=["family=wainger", "zeta=0.25"])


@pytest.mark.parametrize(
    ("family", "foreign"),
    [
        ("wainger", "s1=0.25"),
        ("wainger", "s0=9"),
        ("s0", "mp=-0.5"),
        ("eps_s12", "a=0.5"),
    ],
)
def test_build_config_rejects_other_family_keys(family, foreign):
    """Keys of another sharpness family are unknown for the chosen one."""
    name = foreign.split("=")[0]
    with pytest.raises(ConfigValidationError, match=f"unknown parameter.*{name}"):
        build_config("sharpness", overrides=[f"family={family}", foreign])


def test_build_config_accepts_own_family_keys():
    config = build_config("sharpness", overrides=["family=s0", "s0=0.5", "check=2"])
    assert config.params["s0"] == 0.5
    assert config.params["check"] == 2


def test_config_file_layers(tmp_path):
    """File values sit between the preset and command-line overrides."""
    path = tmp_path / "lp.cfg"
    path.write_text("K = 4\npoints = 50\nseed = 3\n", encoding="utf-8")
    config = build_config(
        "lp-check", config_path=path, overrides=["K=5"], seed=9, output_dir=tmp_path
    )
    assert config.params["K"] == 5
    assert config.params["points"] == 50
    assert config.seed == 9
    assert config.output_dir == tmp_path


def test_structured_config_files(tmp_path):
    """JSON, TOML and YAML files may nest grid and params tables."""
    json_path = tmp_path / "run.json"
    json_path.write_text(
        json.dumps({"experiment": "lp-check", "grid": {"n": 2}, "params": {"K": 3}}),
        encoding="utf-8",
    )
    toml_path = tmp_path / "run.toml"
    toml_path.write_text("[grid]\nn = 2\n[params]\nK = 3\n", encoding="utf-8")
    yaml_path = tmp_path / "run.yaml"
    yaml_path.write_text("grid:\n  n: 2\nparams:\n  K: 3\n", encoding="utf-8")
    for path in (json_path, toml_path, yaml_path):
        config = build_config("lp-check", config_path=path)
        assert config.grid.n == 2
        assert config.params["K"] == 3


def test_config_file_errors(tmp_path):
    """Broken, mismatched or missing files are configuration errors."""
    broken = tmp_path / "broken.json"
    broken.write_text('{"K": 3,\n  oops}', encoding="utf-8")
    with pytest.raises(ConfigValidationError, match=r"broken.json:2:3: invalid JSON"):
        build_config("lp-check", config_path=broken)
    other = tmp_path / "other.json"
    other.write_text(json.dumps({"experiment": "norm"}), encoding="utf-8")
    with pytest.raises(ConfigValidationError, match="declares experiment"):
        build_config("lp-check", config_path=other)
    with pytest.raises(FileNotFoundError, match="Config file not found"):
        build_config("lp-check", config_path=tmp_path / "missing.cfg")
    ini = tmp_path / "run.ini"
    ini.write_text("K = 3\n", encoding="utf-8")
    with pytest.raises(ConfigValidationError, match="Unsupported config format"):
        build_config("lp-check", config_path=ini)


def test_report_columns_and_values():
    """Provenance columns go last; floats keep full precision."""
    rows = [{"k": 1, "T": 32, "value": 0.1}, {"k": 2, "extra": True}]
    assert table_columns(rows) == ["k", "value", "extra", "n", "T", "N", "truncation"]
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value(True) == "true"
    assert format_value(3) == "3"


def test_render_svg_annotates_slope():
    """The plot carries one point per sample and the fitted slope."""
    x = [2.0**-k for k in range(4, 9)]
    y = [v**-0.25 for v in x]
    svg = render_svg(PlotSeries(x, y, "eps_s12", "eps", fit=fit_loglog(x, y)))
    assert svg.startswith("<svg")
    assert svg.count("<circle") == 5
    assert "slope = -0.2500" in svg
    with pytest.raises(ValueError, match="at least one point"):
        render_svg(PlotSeries([], [], "empty", "x"))


def test_lp_check_run_writes_csv(tmp_path, capsys):
    """A passing run prints the summary and writes results.csv with provenance."""
    code = main(["lp-check", "K=4", "points=500", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert out.startswith("PASS lp-check: max partition residual")
    rows = _read_csv(tmp_path / "results.csv")
    assert rows[0] == [
        "k_last",
        "radius",
        "residual",
        "passed",
        "n",
        "T",
        "N",
        "truncation",
    ]
    assert len(rows) == 6
    assert rows[1][-4:] == ["1", "8", "64", "none"]


def test_same_seed_gives_identical_csv(tmp_path):
    """Re-running with the same config and seed reproduces the bytes."""
    first = tmp_path / "first"
    second = tmp_path / "second"
    args = ["uniform-check", "points=300", "--seed", "11"]
    assert main([*args, "--out", str(first)]) == 0
    assert main([*args, "--out", str(second)]) == 0
    assert (first / "results.csv").read_bytes() == (
        second / "results.csv"
    ).read_bytes()


def test_usage_errors_exit_one(tmp_path, capsys):
    """Bad overrides and unknown subcommands are usage errors."""
    assert main(["lp-check", "kk=3", "--out", str(tmp_path)]) == 1
    assert "unknown parameter" in capsys.readouterr().err
    assert main(["lp-check", "K", "--out", str(tmp_path)]) == 1
    assert main(["no-such-experiment"]) == 1
    assert main(["selftest", "--filter", "nowhere"]) == 1
    assert not (tmp_path / "results.csv").exists()


def test_apply_oracle_guard_is_usage_error(tmp_path):
    """Grids too large for the direct oracle are rejected up front."""
    assert main(["apply", "N=1024", "--out", str(tmp_path)]) == 1


def test_tolerance_failure_exits_two(tmp_path, capsys, monkeypatch):
    """A missed tolerance exits 2 and prints the offending row."""
    monkeypatch.setattr(runners, "PARTITION_TOL", -1.0)
    code = main(["lp-check", "K=2", "points=50", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 2
    assert out.startswith("FAIL lp-check")
    assert "offending row: k_last=0, radius=" in out
    assert (tmp_path / "results.csv").exists()


def test_sharpness_run_emits_plot(tmp_path, capsys):
    """Sweeps write a CSV with ratio column and an annotated SVG."""
    code = main(["sharpness", "s1=0.25", "lo=5", "hi=8", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code in (0, 2)
    assert "eps_s12 slope" in out
    header = _read_csv(tmp_path / "results.csv")[0]
    assert "ratio" in header
    assert header[-4:] == ["n", "T", "N", "truncation"]
    assert "slope = " in (tmp_path / "plot.svg").read_text(encoding="utf-8")


def test_sharpness_s0_run_checks_sampled_row(tmp_path, capsys):
    """The s0 run leads with the sampled check row, then the closed-form sweep."""
    args = ["sharpness", "family=s0", "lo=4", "hi=7", "--out", str(tmp_path)]
    assert main(args) == 0
    assert "s0 sampled vs closed form at t=0.5" in capsys.readouterr().out
    rows = _read_csv(tmp_path / "results.csv")
    side = rows[0].index("side")
    assert [row[side] for row in rows[1:]] == ["sampled"] + ["closed"] * 4
    assert rows[1][-4:] == ["1", "0.5", "65", "K_cut=17"]


def test_rows_report_their_own_truncation(tmp_path):
    """Ratio rows past the Nyquist box say so; decomposition rows stay exact."""
    ratio_out = tmp_path / "ratio"
    args = ["ratio-probe", "j=5", "trials=3", "--out", str(ratio_out)]
    assert main(args) == 0
    rows = _read_csv(ratio_out / "results.csv")
    assert rows[0][-1] == "truncation"
    assert {row[-1] for row in rows[1:]} == {"truncated"}

    split_out = tmp_path / "split"
    assert main(["decompose-check", "j0=3", "T=16", "--out", str(split_out)]) == 0
    rows = _read_csv(split_out / "results.csv")
    assert {row[-1] for row in rows[1:]} == {"none"}


def test_selftest_filter_selects_module(capsys):
    """Filtering runs only the chosen module's criteria."""
    assert [c.number for c in select("field_core")] == [1]
    assert len(select()) == len(CRITERIA) == 12
    assert {c.module for c in CRITERIA} <= set(MODULES)
    assert main(["selftest", "--filter=field_core"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 1
    assert lines[0].startswith("PASS [ 1] field_core/")


def test_selftest_injected_fault_fails(capsys):
    """A corrupted split profile makes the split criterion fail."""
    code = main(
        ["selftest", "--filter", "partitions", "--inject-fault", "split-profile"]
    )
    lines = capsys.readouterr().out.strip().splitlines()
    assert code == 2
    split_lines = [line for line in lines if "split" in line]
    assert split_lines and all(line.startswith("FAIL") for line in split_lines)


def test_describe_lists_packages_and_experiments(capsys):
    """``describe`` prints package summaries and every experiment's keys."""
    assert main(["describe"]) == 0
    out = capsys.readouterr().out
    assert "fields:" in out
    for name in ExperimentName:
        assert f"{name.value}:" in out
    lp_line = next(line for line in describe_experiments() if line.startswith("lp-"))
    assert "sharpness" in lp_line


def test_parser_has_every_experiment():
    """Each experiment is a subcommand taking key=value overrides."""
    parser = build_parser()
    args = parser.parse_args(["norm", "space=h1", "--seed", "2"])
    assert args.experiment == "norm"
    assert args.overrides == ["space=h1"]
    assert args.seed == 2
