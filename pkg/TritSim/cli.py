"""
cli.py

Command-line front end.

    python -m TritSim truth stdlib/buffer_not.tnet
    python -m TritSim check alu2
    python -m TritSim vtc buffer_not --pin IN --fix S=2
    python -m TritSim mc --trials 1000 --seed 42
    python -m TritSim power alu2 --format json
    python -m TritSim alu 2 0 1 0 0
    python -m TritSim emit --out stdlib

Exit codes: 0 success, 1 parse/file error, 2 solve error, 3 oracle mismatch,
64 usage error. Results go to stdout (or --out), logs to stderr.
"""

import csv
import io
import json
import logging
import sys
from enum import IntEnum
from pathlib import Path
from typing import Literal, Optional

import click
from pydantic import BaseModel, Field

from TritSim import config
from TritSim.core import OPERATION_NAMES, symbol
from TritSim.device import DiameterPerturbation
from TritSim.netlist import NetlistError, elaborate, emit_netlist, parse_netlist
from TritSim.sim import (
    SolveConfig,
    SolveError,
    compare_table,
    monte_carlo,
    solve,
    static_power_proxy,
    truth_table,
    vtc_sweep,
)
from TritSim.stdlib import CELL_NAMES, GATE_NAMES, UnknownCellError, get_cell

logger = logging.getLogger(__name__)

REPORT_VERSION = 1


class ExitCode(IntEnum):
    OK = 0
    PARSE = 1
    SOLVE = 2
    MISMATCH = 3
    USAGE = 64


class RunConfig(BaseModel):
    """Everything that determines a command's output, echoed into JSON reports."""

    vdd: Optional[float] = Field(None, gt=0)
    tolerance: float = Field(config.DEFAULT_LEVEL_TOLERANCE, gt=0, lt=0.25)
    iterations: int = Field(config.DEFAULT_MAX_ITERATIONS, ge=1)
    output_format: Literal["csv", "json"] = "csv"
    out: Optional[Path] = None
    seed: int = Field(config.DEFAULT_SEED, ge=0)
    steps: int = Field(config.DEFAULT_VTC_STEPS, ge=2)
    trials: int = Field(config.DEFAULT_MC_TRIALS, ge=1)
    sigma: float = Field(config.DEFAULT_MC_SIGMA, ge=0)
    truncation: float = Field(config.DEFAULT_MC_TRUNCATION, gt=0)

    def solve_config(self, circuit_vdd: float) -> SolveConfig:
        return SolveConfig(
            vdd=self.vdd or circuit_vdd,
            max_iterations=self.iterations,
            level_tolerance=self.tolerance,
        )


class TritSimGroup(click.Group):
    """click group that maps library errors onto the stable exit codes."""

    def main(self, *args, **kwargs):
        kwargs["standalone_mode"] = False
        try:
            code = super().main(*args, **kwargs)
        except click.UsageError as err:
            err.show()
            sys.exit(ExitCode.USAGE)
        except click.ClickException as err:
            err.show()
            sys.exit(err.exit_code)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(ExitCode.PARSE)
        except (OSError, NetlistError) as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(ExitCode.PARSE)
        except SolveError as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(ExitCode.SOLVE)
        sys.exit(int(code or ExitCode.OK))


def common_options(command):
    options = [
        click.option("--vdd", type=click.FloatRange(min=0, min_open=True), default=None,
                     help="Supply voltage; defaults to the netlist's .supply."),
        click.option("--tolerance", type=click.FloatRange(0, 0.25, min_open=True, max_open=True),
                     default=config.DEFAULT_LEVEL_TOLERANCE, show_default=True,
                     help="Level band half-width as a fraction of VDD."),
        click.option("--iterations", type=click.IntRange(min=1),
                     default=config.DEFAULT_MAX_ITERATIONS, show_default=True,
                     help="Solver iteration limit."),
        click.option("--format", "output_format", type=click.Choice(["csv", "json"]),
                     default="csv", show_default=True),
        click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None,
                     help="Write the result to a file instead of stdout."),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _emit(text: str, run: RunConfig):
    if run.out is None:
        click.echo(text, nl=False)
    else:
        run.out.write_text(text)
        logger.info(f"Wrote {run.out}")


def _json(command: str, run: RunConfig, **payload) -> str:
    document = {
        "version": REPORT_VERSION,
        "command": command,
        "config": run.model_dump(mode="json"),
        **payload,
    }
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def _csv(header, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _cell(name):
    try:
        return get_cell(name)
    except UnknownCellError as err:
        raise click.BadParameter(str(err), param_hint="CELL") from None


def _load(path: Path, cell: Optional[str]):
    netlist = parse_netlist(path.read_text(encoding="utf-8"))
    if cell is not None:
        netlist = netlist.with_top(cell)
    circuit = elaborate(netlist)
    logger.info(f"Loaded {path}: cell {circuit.name}, {len(circuit.devices)} devices, {len(circuit.macros)} macros")
    return circuit


def _table_text(command, circuit, rows, run):
    """rows: (input tuple, output tuple, extra columns dict)."""
    if run.output_format == "json":
        return _json(
            command,
            run,
            cell=circuit.name,
            rows=[
                {
                    "inputs": {n: symbol(v) for n, v in zip(circuit.inputs, ins)},
                    "outputs": {n: symbol(v) for n, v in zip(circuit.outputs, outs)},
                    **extra,
                }
                for ins, outs, extra in rows
            ],
        )
    extra_columns = list(rows[0][2]) if rows else []
    return _csv(
        list(circuit.inputs) + list(circuit.outputs) + extra_columns,
        [[symbol(v) for v in ins + outs] + [extra[c] for c in extra_columns] for ins, outs, extra in rows],
    )


@click.group(cls=TritSimGroup)
@click.option("--log-level", default=config.LOG_LEVEL, show_default=True, help="Logging level for stderr.")
def cli(log_level):
    """Switch-level simulator and cell library for ternary CNFET logic."""
    config.configure_logging(log_level)


@cli.command()
@click.argument("netlist_path", type=click.Path(dir_okay=False, path_type=Path))
@click.argument("cell", required=False)
@common_options
def truth(netlist_path, cell, **options):
    """Print the exhaustive truth table of a netlist's top cell (or CELL)."""
    run = RunConfig(**options)
    circuit = _load(netlist_path, cell)
    table = truth_table(circuit, run.solve_config(circuit.vdd))
    _emit(_table_text("truth", circuit, [(ins, outs, {}) for ins, outs in table.items()], run), run)
    return ExitCode.OK


@cli.command()
@click.argument("cell_name")
@click.option("--netlist", "netlist_path", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Check this netlist against the cell's oracle instead of the library netlist.")
@common_options
def check(cell_name, netlist_path, **options):
    """Compare a cell's switch-level behaviour with its behavioural oracle."""
    run = RunConfig(**options)
    entry = _cell(cell_name)
    circuit = entry.circuit if netlist_path is None else _load(netlist_path, None)
    if (circuit.inputs, circuit.outputs) != (entry.inputs, entry.outputs):
        raise NetlistError(
            f"ports of {circuit.name} ({', '.join(circuit.ports)}) do not match cell {entry.name}"
        )
    expected = entry.expected_table()
    mismatches = compare_table(circuit, expected, run.solve_config(circuit.vdd))

    def describe(values):
        return ",".join(symbol(v) for v in values)

    if run.output_format == "json":
        text = _json(
            "check",
            run,
            cell=entry.name,
            rows=len(expected),
            mismatches=[
                {
                    "inputs": describe(m.inputs),
                    "expected": describe(m.expected),
                    "actual": None if m.actual is None else describe(m.actual),
                    "error": m.error,
                }
                for m in mismatches
            ],
        )
    else:
        lines = [f"{entry.name}: {len(expected)} rows, {len(mismatches)} mismatches"]
        for m in mismatches:
            got = m.error if m.actual is None else describe(m.actual)
            lines.append(
                f"  {','.join(entry.inputs)}={describe(m.inputs)}: expected {describe(m.expected)}, got {got}"
            )
        text = "\n".join(lines) + "\n"
    _emit(text, run)
    if mismatches:
        logger.warning(f"{entry.name}: {len(mismatches)} of {len(expected)} rows disagree with the oracle")
        return ExitCode.MISMATCH
    return ExitCode.OK


def _parse_fixed(ctx, param, values):
    fixed = {}
    for item in values:
        node, sep, level = item.partition("=")
        if not sep or level not in ("0", "1", "2"):
            raise click.BadParameter(f"expected NODE=TRIT, got {item!r}")
        fixed[node] = int(level)
    return fixed


@cli.command()
@click.argument("cell_name")
@click.option("--pin", default=None, help="Input to sweep; defaults to the only input not fixed.")
@click.option("--fix", "fixed", multiple=True, callback=_parse_fixed, help="Hold an input: NODE=TRIT.")
@click.option("--steps", type=click.IntRange(min=2), default=config.DEFAULT_VTC_STEPS, show_default=True)
@common_options
def vtc(cell_name, pin, fixed, steps, **options):
    """Sweep one input from 0 to VDD and print v_in,v_out."""
    run = RunConfig(steps=steps, **options)
    entry = _cell(cell_name)
    circuit = entry.circuit
    if pin is None:
        free = [node for node in circuit.inputs if node not in fixed]
        if len(free) != 1:
            raise click.BadParameter(f"choose one of {', '.join(free)}", param_hint="--pin")
        pin = free[0]
    if pin not in circuit.inputs:
        raise click.BadParameter(f"{pin} is not an input of {entry.name}", param_hint="--pin")
    points = vtc_sweep(circuit, pin, fixed, run.steps, run.solve_config(circuit.vdd))

    def fmt(v):
        return "Z" if v is None else f"{v:.6f}"

    if run.output_format == "json":
        text = _json("vtc", run, cell=entry.name, pin=pin, fixed=fixed,
                     points=[[p.v_in, p.v_out] for p in points])
    else:
        text = _csv(["v_in", "v_out"], [[fmt(p.v_in), fmt(p.v_out)] for p in points])
    _emit(text, run)
    return ExitCode.OK


@cli.command()
@click.argument("cell_names", nargs=-1)
@click.option("--trials", type=click.IntRange(min=1), default=config.DEFAULT_MC_TRIALS, show_default=True)
@click.option("--sigma", type=click.FloatRange(min=0), default=config.DEFAULT_MC_SIGMA, show_default=True,
              help="Standard deviation as a fraction of nominal diameter.")
@click.option("--truncation", type=click.FloatRange(min=0, min_open=True),
              default=config.DEFAULT_MC_TRUNCATION, show_default=True, help="Clamp draws at this many sigmas.")
@click.option("--seed", type=click.IntRange(min=0), default=config.DEFAULT_SEED, show_default=True)
@common_options
def mc(cell_names, trials, sigma, truncation, seed, **options):
    """Monte-Carlo diameter variation against the oracles (default: the three gates)."""
    run = RunConfig(trials=trials, sigma=sigma, truncation=truncation, seed=seed, **options)
    entries = [_cell(name) for name in (cell_names or GATE_NAMES)]
    cfg = run.solve_config(entries[0].circuit.vdd)
    report = monte_carlo(
        [entry.check() for entry in entries],
        DiameterPerturbation(run.sigma, run.truncation),
        run.trials,
        run.seed,
        cfg,
    )
    if run.output_format == "json":
        text = _json("mc", run, report=report.model_dump())
    else:
        text = _csv(
            ["cell", "trials", "failing_trials", "failing_inputs"],
            [
                [name, report.trials, count, len(report.failing_inputs[name])]
                for name, count in report.cell_failures.items()
            ],
        )
    _emit(text, run)
    click.echo(f"{report.failures} of {report.trials} trials failed", err=True)
    return ExitCode.OK


@cli.command()
@click.argument("cell_name")
@common_options
def power(cell_name, **options):
    """Static-power proxy (conducting VDD-GND paths) for every input row."""
    run = RunConfig(**options)
    entry = _cell(cell_name)
    circuit = entry.circuit
    cfg = run.solve_config(circuit.vdd)
    rows = []
    summary = {"hz_rows": 0, "hz_rows_with_paths": 0, "active_rows": 0, "active_rows_with_paths": 0}
    for row in entry.input_rows():
        result = solve(circuit, dict(zip(circuit.inputs, row)), cfg)
        outputs = result.output_tuple()
        paths = static_power_proxy(result)
        extra = {"paths": paths}
        for unit, instances in entry.units.items():
            extra[f"{unit}_paths"] = result.static_paths(instances)
        rows.append((row, outputs, extra))
        kind = "hz_rows" if all(symbol(v) == "Z" for v in outputs) else "active_rows"
        summary[kind] += 1
        if paths:
            summary[f"{kind}_with_paths"] += 1
    if run.output_format == "json":
        text = _json("power", run, cell=entry.name, summary=summary, rows=[
            {"inputs": [symbol(v) for v in ins], "outputs": [symbol(v) for v in outs], **extra}
            for ins, outs, extra in rows
        ])
    else:
        text = _table_text("power", circuit, rows, run)
    _emit(text, run)
    click.echo(
        f"HZ rows: {summary['hz_rows']} ({summary['hz_rows_with_paths']} with static paths); "
        f"active rows: {summary['active_rows']} ({summary['active_rows_with_paths']} with static paths)",
        err=True,
    )
    return ExitCode.OK


TRIT = click.IntRange(0, 2)


@cli.command()
@click.argument("s0", type=TRIT)
@click.argument("s1", type=TRIT)
@click.argument("a", type=TRIT)
@click.argument("b", type=TRIT)
@click.argument("cin", type=click.IntRange(0, 1))
@click.option("--design", type=click.Choice(["1", "2", "behavioral"]), default="behavioral", show_default=True)
@common_options
def alu(s0, s1, a, b, cin, design, **options):
    """Evaluate the one-trit ALU; S0 S1 select the operation, CIN is 0 or 1."""
    run = RunConfig(**options)
    if design == "behavioral":
        entry = _cell("alu2")
        out, cout = entry.oracle(s0, s1, a, b, cin)
    else:
        entry = _cell(f"alu{design}")
        circuit = entry.circuit
        result = solve(circuit, dict(zip(circuit.inputs, (s0, s1, a, b, cin))), run.solve_config(circuit.vdd))
        out, cout = result.output_tuple()
    operation = OPERATION_NAMES[(s0, s1)]
    if run.output_format == "json":
        text = _json("alu", run, design=design, operation=operation, out=symbol(out), cout=symbol(cout))
    else:
        text = _csv(["operation", "out", "cout"], [[operation, symbol(out), symbol(cout)]])
    _emit(text, run)
    return ExitCode.OK


@cli.command()
@click.argument("cell_names", nargs=-1)
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), required=True,
              help="Directory to write <cell>.tnet files into.")
def emit(cell_names, out_dir):
    """Write library cells in the netlist grammar."""
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in cell_names or CELL_NAMES:
        path = out_dir / f"{name}.tnet"
        path.write_text(emit_netlist(_cell(name).netlist), encoding="utf-8")
        logger.info(f"Wrote {path}")
    return ExitCode.OK


def main():
    cli(prog_name="tritsim")


if __name__ == "__main__":
    main()
