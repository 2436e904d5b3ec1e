"""
simservice.py

HTTP front end over the TritSim library.

Responsibilities:
  1. List the standard cells and their ports.
  2. Serve truth tables, oracle checks and static-power figures per cell.
  3. Evaluate the one-trit ALU (either structural design or the behavioural model).
  4. Parse and elaborate netlist text posted by clients, reporting syntax
     errors with their line and column.
"""

import logging
import os
import sys

from flask import Flask, jsonify, request
from werkzeug.exceptions import HTTPException

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from TritSim import config  # noqa: E402
from TritSim.core import OPERATION_NAMES, TernaryValueError, symbol, trit  # noqa: E402
from TritSim.netlist import NetlistError, elaborate, parse_netlist, validate  # noqa: E402
from TritSim.sim import SolveConfig, SolveError, compare_table, solve, truth_table  # noqa: E402
from TritSim.stdlib import CELL_NAMES, UnknownCellError, get_cell  # noqa: E402

app = Flask(__name__)
logger = logging.getLogger(__name__)


def _solve_config(vdd):
    """SolveConfig from the optional ?vdd= query parameter."""
    value = request.args.get("vdd")
    if value is None:
        return SolveConfig(vdd=vdd)
    return SolveConfig(vdd=float(value))


def _row(names, values):
    return {name: symbol(value) for name, value in zip(names, values)}


@app.errorhandler(UnknownCellError)
def unknown_cell(e):
    return jsonify({"error": str(e)}), 404


@app.errorhandler(SolveError)
def solve_failed(e):
    app.logger.error(f"Solve failed: {e}")
    return jsonify({"error": str(e), "kind": type(e).__name__}), 400


@app.errorhandler(Exception)
def unexpected_error(e):
    if isinstance(e, HTTPException):
        return e
    app.logger.error(f"Unexpected error: {e}")
    return jsonify({"error": "internal error"}), 500


@app.route('/cells', methods=['GET'])
def list_cells():
    cells = []
    for name in CELL_NAMES:
        entry = get_cell(name)
        cells.append({
            "name": name,
            "inputs": list(entry.inputs),
            "outputs": list(entry.outputs),
            "devices": len(entry.circuit.devices),
            "macros": len(entry.circuit.macros),
        })
    return jsonify({"cells": cells}), 200


@app.route('/truth/<cell>', methods=['GET'])
def truth(cell):
    """
    Exhaustive truth table of a library cell.
    Query Parameter:
      - vdd (float, optional): supply voltage, defaults to the cell's supply.
    """
    entry = get_cell(cell)
    try:
        cfg = _solve_config(entry.circuit.vdd)
    except ValueError as e:
        return jsonify({"error": f"invalid vdd: {e}"}), 400
    table = truth_table(entry.circuit, cfg, entry.domains)
    rows = [
        {"inputs": _row(entry.inputs, ins), "outputs": _row(entry.outputs, outs)}
        for ins, outs in table.items()
    ]
    return jsonify({"cell": cell, "vdd": cfg.vdd, "rows": rows}), 200


@app.route('/check/<cell>', methods=['GET'])
def check(cell):
    entry = get_cell(cell)
    try:
        cfg = _solve_config(entry.circuit.vdd)
    except ValueError as e:
        return jsonify({"error": f"invalid vdd: {e}"}), 400
    expected = entry.expected_table()
    mismatches = compare_table(entry.circuit, expected, cfg)
    return jsonify({
        "cell": cell,
        "vdd": cfg.vdd,
        "rows": len(expected),
        "passed": not mismatches,
        "mismatches": [
            {
                "inputs": _row(entry.inputs, m.inputs),
                "expected": _row(entry.outputs, m.expected),
                "actual": None if m.actual is None else _row(entry.outputs, m.actual),
                "error": m.error,
            }
            for m in mismatches
        ],
    }), 200


@app.route('/power/<cell>', methods=['GET'])
def power(cell):
    """Static-path count per input row, with a per-unit breakdown where the cell defines units."""
    entry = get_cell(cell)
    cfg = SolveConfig(vdd=entry.circuit.vdd)
    rows = []
    for row in entry.input_rows():
        result = solve(entry.circuit, dict(zip(entry.inputs, row)), cfg)
        rows.append({
            "inputs": _row(entry.inputs, row),
            "outputs": _row(entry.outputs, result.output_tuple()),
            "paths": result.static_path_count,
            "units": {unit: result.static_paths(instances) for unit, instances in entry.units.items()},
        })
    return jsonify({"cell": cell, "rows": rows}), 200


@app.route('/alu', methods=['POST'])
def alu():
    """
    Evaluate the ALU.
    Expected JSON Input:
      { "s0": 2, "s1": 0, "a": 1, "b": 0, "cin": 0, "design": "behavioral" }
    design is one of "1", "2", "behavioral" (default).
    """
    data = request.get_json(silent=True)
    fields = ("s0", "s1", "a", "b", "cin")
    if not data or any(name not in data for name in fields):
        return jsonify({"error": "JSON payload with s0, s1, a, b and cin required."}), 400
    design = str(data.get("design", "behavioral"))
    if design not in ("1", "2", "behavioral"):
        return jsonify({"error": f"unknown design '{design}'"}), 400
    try:
        s0, s1, a, b, cin = (trit(data[name]) for name in fields)
    except TernaryValueError as e:
        return jsonify({"error": str(e)}), 400
    if cin == 2:
        return jsonify({"error": "carry-in must be 0 or 1"}), 400

    if design == "behavioral":
        out, cout = get_cell("alu2").oracle(s0, s1, a, b, cin)
    else:
        entry = get_cell(f"alu{design}")
        result = solve(entry.circuit, dict(zip(entry.inputs, (s0, s1, a, b, cin))), SolveConfig(vdd=entry.circuit.vdd))
        out, cout = result.output_tuple()
    return jsonify({
        "design": design,
        "operation": OPERATION_NAMES[(int(s0), int(s1))],
        "out": symbol(out),
        "cout": symbol(cout),
    }), 200


@app.route('/parse', methods=['POST'])
def parse():
    """
    Parse and elaborate netlist text.
    Expected JSON Input:
      { "text": "<netlist>" }
    """
    data = request.get_json(silent=True)
    if not data or "text" not in data:
        return jsonify({'error': 'JSON payload with "text" required.'}), 400
    try:
        netlist = parse_netlist(data["text"])
        circuit = elaborate(netlist)
    except NetlistError as e:
        return jsonify({"error": e.message, "line": e.line, "column": e.column}), 400
    return jsonify({
        "top": circuit.name,
        "vdd": circuit.vdd,
        "cells": [sub.name for sub in netlist.subcircuits],
        "inputs": list(circuit.inputs),
        "outputs": list(circuit.outputs),
        "devices": len(circuit.devices),
        "macros": len(circuit.macros),
        "diagnostics": [
            {"kind": d.kind, "node": d.node, "message": d.message} for d in validate(circuit)
        ],
    }), 200


def main():
    config.configure_logging()
    logger.info(f"Starting simulation service on {config.SIM_SERVICE_HOST}:{config.SIM_SERVICE_PORT}")
    # For production, consider:
    #   gunicorn simservice:app -b 0.0.0.0:5010
    app.run(host=config.SIM_SERVICE_HOST, port=config.SIM_SERVICE_PORT)


if __name__ == '__main__':
    main()
