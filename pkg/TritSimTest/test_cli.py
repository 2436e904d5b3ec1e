# test_cli.py
import csv
import io
import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from TritSim.cli import ExitCode, cli

STDLIB_DIR = Path(__file__).resolve().parents[1] / "stdlib"


@pytest.fixture
def runner():
    return CliRunner()


def rows_of(text):
    return list(csv.reader(io.StringIO(text)))


def test_truth_buffer_not(runner):
    result = runner.invoke(cli, ["truth", str(STDLIB_DIR / "buffer_not.tnet")])
    assert result.exit_code == ExitCode.OK, result.output
    rows = rows_of(result.stdout)
    assert rows[0] == ["S", "IN", "OUT"]
    assert rows[1:] == [
        ["0", "0", "0"], ["0", "1", "1"], ["0", "2", "2"],
        ["1", "0", "Z"], ["1", "1", "Z"], ["1", "2", "Z"],
        ["2", "0", "2"], ["2", "1", "1"], ["2", "2", "0"],
    ]


def test_truth_selects_cell_and_writes_json(runner, tmp_path):
    out = tmp_path / "pti.json"
    result = runner.invoke(
        cli, ["truth", str(STDLIB_DIR / "buffer_not.tnet"), "PTI", "--format", "json", "--out", str(out)]
    )
    assert result.exit_code == ExitCode.OK, result.output
    document = json.loads(out.read_text())
    assert document["version"] == 1
    assert document["config"]["tolerance"] == 0.05
    assert [row["outputs"]["OUT"] for row in document["rows"]] == ["2", "2", "0"]


def test_truth_missing_file(runner, tmp_path):
    result = runner.invoke(cli, ["truth", str(tmp_path / "absent.tnet")])
    assert result.exit_code == ExitCode.PARSE


def test_truth_parse_error(runner, tmp_path):
    path = tmp_path / "bad.tnet"
    path.write_text(".subckt A X\nM1 X X VDD P (9,0)\n.ends\n.top A\n")
    result = runner.invoke(cli, ["truth", str(path)])
    assert result.exit_code == ExitCode.PARSE
    assert "line 2" in result.output


def test_truth_enumeration_cap(runner, tmp_path):
    path = tmp_path / "wide.tnet"
    path.write_text(".subckt WIDE A B C D E F G\n.ends\n.top WIDE\n")
    result = runner.invoke(cli, ["truth", str(path)])
    assert result.exit_code == ExitCode.SOLVE
    assert "enumeration cap" in result.output


@pytest.mark.parametrize("name", ["and_nand", "alu2"])
def test_check_library_cells(runner, name):
    result = runner.invoke(cli, ["check", name])
    assert result.exit_code == ExitCode.OK, result.output
    assert "0 mismatches" in result.stdout


def test_check_corrupted_netlist(runner, tmp_path):
    text = (STDLIB_DIR / "buffer_not.tnet").read_text()
    path = tmp_path / "corrupt.tnet"
    path.write_text(text.replace("M3 OUT PIN Y N", "M3 OUT NIN Y N"))
    result = runner.invoke(cli, ["check", "buffer_not", "--netlist", str(path)])
    assert result.exit_code == ExitCode.MISMATCH
    lines = result.stdout.splitlines()
    assert lines[1] == "  S,IN=0,1: expected 1, got 2"


def test_check_unknown_cell(runner):
    result = runner.invoke(cli, ["check", "xor"])
    assert result.exit_code == ExitCode.USAGE


def test_vtc_inverter_staircase(runner):
    result = runner.invoke(cli, ["vtc", "buffer_not", "--pin", "IN", "--fix", "S=2", "--steps", "1000"])
    assert result.exit_code == ExitCode.OK, result.output
    rows = rows_of(result.stdout)
    assert rows[0] == ["v_in", "v_out"]
    points = [(float(v_in), float(v_out)) for v_in, v_out in rows[1:]]
    assert len(points) == 1000
    assert points[0] == (0.0, 0.9)
    assert points[-1] == (0.9, 0.0)
    outputs = [v for _, v in points]
    assert all(later <= earlier for earlier, later in zip(outputs, outputs[1:]))
    assert sorted(set(outputs)) == [0.0, 0.45, 0.9]


def test_vtc_buffer_defaults_to_free_pin(runner):
    result = runner.invoke(cli, ["vtc", "buffer_not", "--fix", "S=0", "--steps", "50"])
    assert result.exit_code == ExitCode.OK, result.output
    outputs = [float(v_out) for _, v_out in rows_of(result.stdout)[1:]]
    assert outputs[0] == 0.0 and outputs[-1] == 0.9
    assert outputs == sorted(outputs)


@pytest.mark.parametrize(
    "args",
    [
        ["vtc", "buffer_not", "--pin", "IN", "--fix", "S=0", "--steps", "1"],
        ["vtc", "buffer_not", "--fix", "S=3"],
        ["vtc", "and_nand", "--fix", "S=0"],
        ["mc", "--trials", "0"],
        ["alu", "3", "0", "0", "0", "0"],
        ["alu", "1", "0", "0", "0", "2"],
        ["power"],
    ],
)
def test_usage_errors(runner, args):
    assert runner.invoke(cli, args).exit_code == ExitCode.USAGE


def test_mc_report_is_reproducible(runner, tmp_path):
    reports = []
    out = tmp_path / "mc.json"
    for _ in range(2):
        result = runner.invoke(cli, ["mc", "--trials", "200", "--seed", "42", "--format", "json", "--out", str(out)])
        assert result.exit_code == ExitCode.OK, result.output
        reports.append(out.read_bytes())
    assert reports[0] == reports[1]
    document = json.loads(reports[0])
    assert document["report"]["failures"] == 0
    assert document["report"]["trials"] == 200
    assert document["report"]["sigma_fraction"] == 0.05
    assert document["config"]["seed"] == 42


def test_mc_wide_spread_reports_failures(runner, tmp_path):
    out = tmp_path / "wide.csv"
    result = runner.invoke(cli, ["mc", "buffer_not", "--trials", "20", "--sigma", "0.25", "--out", str(out)])
    assert result.exit_code == ExitCode.OK
    rows = rows_of(out.read_text())
    assert rows[0] == ["cell", "trials", "failing_trials", "failing_inputs"]
    assert rows[1][0] == "buffer_not"
    assert int(rows[1][2]) > 0


def test_power_buffer_not(runner, tmp_path):
    out = tmp_path / "power.csv"
    result = runner.invoke(cli, ["power", "buffer_not", "--out", str(out)])
    assert result.exit_code == ExitCode.OK
    rows = rows_of(out.read_text())
    assert rows[0] == ["S", "IN", "OUT", "paths"]
    for s, value, output, paths in rows[1:]:
        if s == "1":
            assert output == "Z" and paths == "0"
        if (s, value) == ("0", "1"):
            assert int(paths) >= 1


def test_power_alu2_logic_unit_quiet(runner, tmp_path):
    out = tmp_path / "power.json"
    result = runner.invoke(cli, ["power", "alu2", "--format", "json", "--out", str(out)])
    assert result.exit_code == ExitCode.OK
    document = json.loads(out.read_text())
    arithmetic = [row for row in document["rows"] if row["inputs"][0] == "1"]
    assert len(arithmetic) == 3 * 9 * 2
    assert all(row["logic_paths"] == 0 for row in arithmetic)
    assert document["summary"]["hz_rows"] == 0


@pytest.mark.parametrize("design", ["1", "2", "behavioral"])
def test_alu_not_row(runner, design):
    result = runner.invoke(cli, ["alu", "2", "0", "1", "0", "0", "--design", design])
    assert result.exit_code == ExitCode.OK, result.output
    assert rows_of(result.stdout) == [["operation", "out", "cout"], ["not", "1", "Z"]]


def test_alu_subtract_row(runner):
    outputs = set()
    for design in ("1", "2", "behavioral"):
        result = runner.invoke(cli, ["alu", "1", "2", "2", "1", "0", "--design", design, "--format", "json"])
        document = json.loads(result.stdout)
        outputs.add((document["operation"], document["out"], document["cout"]))
    assert outputs == {("subtract", "2", "0")}


def test_emit_regenerates_library(runner, tmp_path):
    result = runner.invoke(cli, ["emit", "--out", str(tmp_path)])
    assert result.exit_code == ExitCode.OK, result.output
    emitted = sorted(path.name for path in tmp_path.glob("*.tnet"))
    assert emitted == sorted(path.name for path in STDLIB_DIR.glob("*.tnet"))
    for path in tmp_path.glob("*.tnet"):
        assert path.read_text() == (STDLIB_DIR / path.name).read_text()
