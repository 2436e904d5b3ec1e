"""
sim.py

Switch-level steady-state solver and the analyses built on it.

Responsibilities:
  1. solve(): iterate device conduction and rail reachability to a fixpoint,
     evaluating behavioural macros as ideal drivers.
  2. truth_table() / compare_table(): exhaustive enumeration against oracles.
  3. vtc_sweep(): staircase transfer characteristics.
  4. monte_carlo(): diameter variation runs with pre-split seeds.
  5. resolve_bus() and the static-power proxy (rail-to-rail conducting paths).
"""

import itertools
import json
import logging
from collections import defaultdict
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import Callable, Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from TritSim.config import (
    DEFAULT_LEVEL_TOLERANCE,
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_VDD,
    DEFAULT_VTC_STEPS,
)
from TritSim.core import HZ, TRITS, Trit, TritHZ, control_signals, trit
from TritSim.device import DeviceKind, DiameterPerturbation, device_conducts, perturb_diameter
from TritSim.netlist import GND, RAILS, VDD, FlatCircuit

logger = logging.getLogger(__name__)

MAX_TRUTH_INPUTS = 6


# --- Errors ---

class SolveError(Exception):
    """Base class for simulation failures. truth_table() attaches input_tuple."""

    input_tuple = None

    def __str__(self):
        message = super().__str__()
        if self.input_tuple is not None:
            row = ",".join(str(int(v)) if v is not HZ else "Z" for v in self.input_tuple)
            return f"{message} (inputs {row})"
        return message


class OscillationError(SolveError):
    pass


class ContentionError(SolveError):
    def __init__(self, message, nodes=(), result=None):
        super().__init__(message)
        self.nodes = tuple(nodes)
        self.result = result


class InvalidLevelError(SolveError):
    pass


class HighImpedanceInputError(SolveError):
    pass


class EnumerationCapError(SolveError):
    pass


# --- Configuration and results ---

class SolveConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    vdd: float = Field(DEFAULT_VDD, gt=0)
    max_iterations: int = Field(DEFAULT_MAX_ITERATIONS, ge=1)
    level_tolerance: float = Field(DEFAULT_LEVEL_TOLERANCE, gt=0, lt=0.25)
    strict_hz_inputs: bool = True


class Drive(str, Enum):
    DRIVEN = "driven"
    FLOATING = "floating"
    CONTENTION = "contention"


class NodeState(NamedTuple):
    voltage: Optional[float]
    drive: Drive


@dataclass(frozen=True)
class SolveResult:
    circuit: FlatCircuit
    config: SolveConfig
    nodes: Dict[str, NodeState]
    iterations: int
    conducting: Tuple[int, ...]
    ideal_nodes: frozenset

    @cached_property
    def outputs(self) -> Dict[str, TritHZ]:
        classified = {}
        for node in self.circuit.outputs:
            state = self.nodes[node]
            classified[node] = HZ if state.voltage is None else classify_voltage(state.voltage, self.config)
        return classified

    def output_tuple(self) -> Tuple[TritHZ, ...]:
        return tuple(self.outputs[node] for node in self.circuit.outputs)

    @cached_property
    def static_path_count(self) -> int:
        return self.static_paths()

    def static_paths(self, instances: Optional[Iterable[str]] = None) -> int:
        """
        Count simple VDD-to-GND paths through conducting devices.

        Args:
            instances: when given, only paths that use at least one device of
                these top-level instances are counted.
        """
        devices = self.circuit.devices
        wanted = None if instances is None else set(self.circuit.devices_of(instances))
        graph = nx.MultiGraph()
        graph.add_nodes_from(RAILS)
        for index in self.conducting:
            dev = devices[index]
            if dev.drain == dev.source or dev.drain in self.ideal_nodes or dev.source in self.ideal_nodes:
                continue
            graph.add_edge(dev.drain, dev.source, key=index)
        count = 0
        for path in nx.all_simple_edge_paths(graph, VDD, GND):
            if wanted is None or any(key in wanted for _, _, key in path):
                count += 1
        return count


def static_power_proxy(result: SolveResult) -> int:
    """Number of rail-to-rail conducting paths; 0 means no static current."""
    return result.static_path_count


def level_voltage(value, vdd: float) -> float:
    return int(trit(value)) * vdd / 2


def classify_voltage(v: float, cfg: SolveConfig) -> Trit:
    levels = (0.0, cfg.vdd / 2, cfg.vdd)
    nearest = min(range(3), key=lambda i: abs(v - levels[i]))
    if abs(v - levels[nearest]) <= cfg.level_tolerance * cfg.vdd:
        return Trit(nearest)
    raise InvalidLevelError(f"{v:.4f} V is outside every level band at VDD={cfg.vdd} V")


# --- Bus resolution ---

def _resolve(values, absent):
    """(value, conflict) for a set of drivers where `absent` marks a non-driver."""
    driven = {v for v in values if v is not absent}
    if not driven:
        return absent, False
    if len(driven) == 1:
        return driven.pop(), False
    return absent, True


def resolve_bus(drivers: Sequence[TritHZ]) -> TritHZ:
    value, conflict = _resolve(drivers, HZ)
    if conflict:
        levels = sorted(int(v) for v in set(drivers) - {HZ})
        raise ContentionError(f"bus contention between levels {levels}")
    return value if value is HZ else trit(value)


# --- Behavioural macros ---

def _tfa(pins):
    if None in pins:
        return None
    carry, total = divmod(sum(int(p) for p in pins), 3)
    return Trit(total), Trit(carry)


def _binbuf(pins):
    if pins[0] is None:
        return None
    return (Trit.ONE if pins[0] == Trit.TWO else Trit.ZERO,)


def _ctrl(column):
    def model(pins):
        if None in pins:
            return None
        return (control_signals(*pins)[column],)
    return model


def _mux3(pins):
    select = pins[0]
    if select is None or pins[1 + select] is None:
        return None
    return (pins[1 + select],)


MACRO_MODELS: Dict[str, Callable] = {
    "TFA": _tfa,
    "BINBUF": _binbuf,
    "CTRL1": _ctrl(0),
    "CTRL2": _ctrl(1),
    "CTRL3": _ctrl(2),
    "CTRL4": _ctrl(3),
    "MUX3": _mux3,
}


# --- Solver ---

def _evaluate_macros(circuit, state, fixed, cfg):
    driven: Dict[str, float] = {}
    conflicts = set()
    pending = []
    faults = []
    for macro in circuit.macros:
        pins = []
        for node in macro.inputs:
            voltage = state.get(node)
            if voltage is None:
                pins.append(None)
                continue
            try:
                pins.append(classify_voltage(voltage, cfg))
            except InvalidLevelError as err:
                faults.append(f"macro {macro.name} input {node}: {err}")
                pins.append(None)
        values = MACRO_MODELS[macro.function](pins)
        if values is None:
            pending.append(macro)
            continue
        for node, value in zip(macro.outputs, values):
            voltage = level_voltage(value, cfg.vdd)
            previous = fixed.get(node, driven.get(node))
            if previous is not None and previous != voltage:
                conflicts.add(node)
            else:
                driven[node] = voltage
    for node in conflicts:
        driven.pop(node, None)
    return driven, conflicts, pending, faults


def _conducting(circuit, state, vdd) -> List[int]:
    on = []
    for index, dev in enumerate(circuit.devices):
        v_gate = state.get(dev.gate)
        if v_gate is None:
            continue
        v_rail = 0.0 if dev.kind == DeviceKind.N else vdd
        if device_conducts(dev.params, v_gate, v_rail):
            on.append(index)
    return on


def _merge(tags, vdd):
    """Combine the (voltage, from_rail) sources reaching one node."""
    if not tags:
        return None, False
    levels = {voltage for voltage, _ in tags}
    if len(levels) == 1:
        return levels.pop(), False
    if levels == {0.0, vdd} and all(rail for _, rail in tags):
        return vdd / 2, False
    return None, True


def _walk(start, adjacency, sources, allowed=None):
    """Source tags reachable from `start` without passing through another source."""
    tags = set()
    seen = {start}
    stack = [start]
    while stack:
        node = stack.pop()
        for neighbour, index in adjacency.get(node, ()):
            if allowed is not None and index not in allowed:
                continue
            if neighbour in seen:
                continue
            seen.add(neighbour)
            if neighbour in sources:
                tags.add((sources[neighbour], neighbour in RAILS))
            else:
                stack.append(neighbour)
    return tags


def _propagate(circuit, on, sources, vdd):
    adjacency = defaultdict(list)
    for index in on:
        dev = circuit.devices[index]
        if dev.drain != dev.source:
            adjacency[dev.drain].append((dev.source, index))
            adjacency[dev.source].append((dev.drain, index))

    reach = defaultdict(set)
    for source, voltage in sources.items():
        tag = (voltage, source in RAILS)
        seen = {source}
        stack = [source]
        while stack:
            node = stack.pop()
            for neighbour, _ in adjacency.get(node, ()):
                if neighbour in seen or neighbour in sources:
                    continue
                seen.add(neighbour)
                reach[neighbour].add(tag)
                stack.append(neighbour)

    state = dict(sources)
    contention = set()
    for node, tags in reach.items():
        voltage, conflict = _merge(tags, vdd)
        if conflict:
            contention.add(node)
        else:
            state[node] = voltage

    on_set = set(on)
    for node, groups in circuit.bus_groups.items():
        if node in sources:
            continue
        values = []
        for group in groups:
            voltage, conflict = _merge(_walk(node, adjacency, sources, on_set.intersection(group)), vdd)
            if conflict:
                break
            values.append(voltage)
        else:
            voltage, conflict = _resolve(values, None)
        state.pop(node, None)
        contention.discard(node)
        if conflict:
            contention.add(node)
        elif voltage is not None:
            state[node] = voltage
    return state, contention


def solve_voltages(f: FlatCircuit, voltages: Mapping[str, Optional[float]], cfg: SolveConfig) -> SolveResult:
    """Solve with raw input voltages; None leaves an input floating."""
    unknown = set(voltages) - set(f.inputs)
    if unknown:
        raise SolveError(f"not inputs of {f.name}: {', '.join(sorted(unknown))}")
    fixed: Dict[str, float] = {VDD: cfg.vdd, GND: 0.0}
    for node in f.inputs:
        if node not in voltages:
            raise SolveError(f"input {node} of {f.name} is not assigned")
        if voltages[node] is not None:
            fixed[node] = float(voltages[node])

    state: Dict[str, float] = dict(fixed)
    contention = set()
    for iteration in range(1, cfg.max_iterations + 1):
        driven, conflicts, pending, faults = _evaluate_macros(f, state, fixed, cfg)
        sources = {**fixed, **driven}
        on = _conducting(f, state, cfg.vdd)
        new_state, new_contention = _propagate(f, on, sources, cfg.vdd)
        new_contention |= conflicts
        if new_state == state and new_contention == contention:
            break
        state, contention = new_state, new_contention
    else:
        raise OscillationError(f"{f.name} did not settle within {cfg.max_iterations} iterations")

    nodes = {}
    for node in f.nodes:
        if node in contention:
            nodes[node] = NodeState(None, Drive.CONTENTION)
        elif node in state:
            nodes[node] = NodeState(state[node], Drive.DRIVEN)
        else:
            nodes[node] = NodeState(None, Drive.FLOATING)
    result = SolveResult(
        circuit=f,
        config=cfg,
        nodes=nodes,
        iterations=iteration,
        conducting=tuple(on),
        ideal_nodes=frozenset(sources) - set(RAILS),
    )
    logger.debug(f"{f.name} settled after {iteration} iterations")

    if contention:
        raise ContentionError(f"contention on {', '.join(sorted(contention))}", sorted(contention), result)
    if faults:
        raise InvalidLevelError(faults[0])
    if cfg.strict_hz_inputs:
        for dev in f.devices:
            if dev.gate not in state:
                raise HighImpedanceInputError(f"floating node {dev.gate} drives the gate of {dev.name}")
        for macro in pending:
            floating = [node for node in macro.inputs if node not in state]
            raise HighImpedanceInputError(
                f"floating node {', '.join(floating)} drives macro {macro.name} ({macro.function})"
            )
    return result


def solve(f: FlatCircuit, inputs: Mapping[str, TritHZ], cfg: SolveConfig) -> SolveResult:
    """Solve with trit-valued inputs; HZ leaves an input undriven."""
    voltages = {
        node: None if value is HZ else level_voltage(value, cfg.vdd)
        for node, value in inputs.items()
    }
    return solve_voltages(f, voltages, cfg)


# --- Truth tables ---

def _input_axes(f: FlatCircuit, domains: Optional[Mapping[str, Sequence[int]]]):
    if len(f.inputs) > MAX_TRUTH_INPUTS:
        raise EnumerationCapError(
            f"{f.name} has {len(f.inputs)} ternary inputs; the enumeration cap is {MAX_TRUTH_INPUTS}"
        )
    domains = domains or {}
    return [tuple(trit(v) for v in domains.get(node, TRITS)) for node in f.inputs]


def truth_table(
    f: FlatCircuit,
    cfg: SolveConfig,
    domains: Optional[Mapping[str, Sequence[int]]] = None,
) -> Dict[Tuple[Trit, ...], Tuple[TritHZ, ...]]:
    """Exhaustive table over the inputs (each restricted by `domains` when given)."""
    table = {}
    for row in itertools.product(*_input_axes(f, domains)):
        try:
            table[row] = solve(f, dict(zip(f.inputs, row)), cfg).output_tuple()
        except SolveError as err:
            err.input_tuple = row
            raise
    return table


@dataclass(frozen=True)
class Mismatch:
    inputs: Tuple[Trit, ...]
    expected: Tuple[TritHZ, ...]
    actual: Optional[Tuple[TritHZ, ...]]
    error: Optional[str] = None


def compare_table(
    f: FlatCircuit,
    expected: Mapping[Tuple[Trit, ...], Tuple[TritHZ, ...]],
    cfg: SolveConfig,
) -> List[Mismatch]:
    """Solve every row of an expected table; solve errors count as mismatches."""
    mismatches = []
    for row, want in expected.items():
        try:
            got = solve(f, dict(zip(f.inputs, row)), cfg).output_tuple()
        except SolveError as err:
            mismatches.append(Mismatch(tuple(row), tuple(want), None, str(err)))
            continue
        if got != tuple(want):
            mismatches.append(Mismatch(tuple(row), tuple(want), got))
    return mismatches


@dataclass(frozen=True)
class OracleCheck:
    """A flat circuit paired with the table its behavioural oracle produces."""

    name: str
    circuit: FlatCircuit
    expected: Mapping[Tuple[Trit, ...], Tuple[TritHZ, ...]]


def supply_sweep(check: OracleCheck, vdds: Iterable[float], cfg: SolveConfig) -> Dict[float, List[Mismatch]]:
    return {
        vdd: compare_table(check.circuit, check.expected, cfg.model_copy(update={"vdd": vdd}))
        for vdd in vdds
    }


# --- Transfer characteristics ---

class VtcPoint(NamedTuple):
    v_in: float
    v_out: Optional[float]


def vtc_sweep(
    f: FlatCircuit,
    pin: str,
    fixed: Mapping[str, int],
    steps: int = DEFAULT_VTC_STEPS,
    cfg: Optional[SolveConfig] = None,
    output: Optional[str] = None,
) -> List[VtcPoint]:
    """Sweep `pin` uniformly over 0..VDD with the other inputs held at trit levels."""
    cfg = cfg or SolveConfig(vdd=f.vdd)
    if steps < 2:
        raise ValueError(f"a sweep needs at least 2 steps, got {steps}")
    if pin not in f.inputs:
        raise ValueError(f"{pin} is not an input of {f.name}")
    output = output or f.outputs[0]
    base = {node: level_voltage(value, cfg.vdd) for node, value in fixed.items()}
    points = []
    for v_in in np.linspace(0.0, cfg.vdd, steps):
        result = solve_voltages(f, {**base, pin: float(v_in)}, cfg)
        points.append(VtcPoint(float(v_in), result.nodes[output].voltage))
    return points


# --- Monte Carlo ---

class McReport(BaseModel):
    version: int = 1
    trials: int = Field(ge=1)
    failures: int = Field(ge=0)
    seed: int
    sigma_fraction: float
    truncation: float
    vdd: float
    cell_failures: Dict[str, int]
    failing_inputs: Dict[str, List[List[int]]]

    @model_validator(mode="after")
    def _failures_bounded(self):
        if self.failures > self.trials:
            raise ValueError("failures cannot exceed trials")
        return self

    def to_json(self) -> str:
        return json.dumps(self.model_dump(), sort_keys=True, indent=2)


def perturb_circuit(f: FlatCircuit, pert: DiameterPerturbation, draws: Sequence[float]) -> FlatCircuit:
    """Copy of `f` with every device diameter scaled by its own draw."""
    devices = tuple(
        replace(dev, params=dev.params.with_diameter(perturb_diameter(dev.params.diameter, pert, float(draw))))
        for dev, draw in zip(f.devices, draws)
    )
    return replace(f, devices=devices)


def monte_carlo(
    checks: Sequence[OracleCheck],
    pert: DiameterPerturbation,
    trials: int,
    seed: int,
    cfg: SolveConfig,
) -> McReport:
    """
    Re-run every check with independently perturbed diameters per trial.

    Each trial owns a child of SeedSequence(seed) and draws one standard normal
    per device, cell by cell in the given order, so a trial's outcome does not
    depend on which other trials run or in what order.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    logger.info(
        f"Monte Carlo: {trials} trials, sigma {pert.sigma_fraction:.3f}, "
        f"truncation {pert.truncation}, seed {seed}, VDD {cfg.vdd} V"
    )
    cell_failures = {check.name: 0 for check in checks}
    failing = {check.name: set() for check in checks}
    failures = 0
    for trial, child in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        rng = np.random.default_rng(child)
        trial_failed = False
        for check in checks:
            draws = rng.standard_normal(len(check.circuit.devices))
            mismatches = compare_table(perturb_circuit(check.circuit, pert, draws), check.expected, cfg)
            if mismatches:
                trial_failed = True
                cell_failures[check.name] += 1
                failing[check.name].update(tuple(int(v) for v in m.inputs) for m in mismatches)
        if trial_failed:
            failures += 1
            logger.warning(f"trial {trial} failed")
    report = McReport(
        trials=trials,
        failures=failures,
        seed=seed,
        sigma_fraction=pert.sigma_fraction,
        truncation=pert.truncation,
        vdd=cfg.vdd,
        cell_failures=cell_failures,
        failing_inputs={name: [list(row) for row in sorted(rows)] for name, rows in failing.items()},
    )
    logger.info(f"Monte Carlo finished: {failures}/{trials} failing trials")
    return report
