"""
netlist.py

Hierarchical netlist model, text grammar, parser, emitter and elaboration.

Grammar (one statement per line, '#' starts a comment):

    .supply <volts>                      once, before any cell (default 0.9)
    .subckt <name> <port>...             open a cell
    M<id> <drain> <gate> <source> <P|N> (<n>,<m>)
    X<id> <cell> <node>...               instance, positional port binding
    B<id> <function> <node>...           behavioural macro, inputs then outputs
    .ends                                close the cell
    .top <name>                          top cell

VDD and GND are global rails and may be used inside any cell.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Tuple

import networkx as nx
from pyparsing import (
    Group,
    Keyword,
    ParseException,
    Regex,
    ZeroOrMore,
    one_of,
)

from TritSim.config import DEFAULT_VDD
from TritSim.device import Chirality, CnfetParams, DeviceError, DeviceKind

logger = logging.getLogger(__name__)

VDD = "VDD"
GND = "GND"
RAILS = (VDD, GND)

# function -> (input count, output count)
MACRO_PINS = {
    "TFA": (3, 2),
    "BINBUF": (1, 1),
    "CTRL1": (2, 1),
    "CTRL2": (2, 1),
    "CTRL3": (2, 1),
    "CTRL4": (2, 1),
    "MUX3": (4, 1),
}


class NetlistError(Exception):
    """Netlist problem with an optional source position (1-based line and column)."""

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(str(self))

    def __str__(self):
        if self.line is None:
            return self.message
        if self.column is None:
            return f"line {self.line}: {self.message}"
        return f"line {self.line}, column {self.column}: {self.message}"


class NetlistSyntaxError(NetlistError):
    pass


class ElaborationError(NetlistError):
    pass


# --- Data model ---

@dataclass(frozen=True)
class DeviceStatement:
    name: str
    kind: DeviceKind
    drain: str
    gate: str
    source: str
    chirality: Chirality
    line: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class InstanceStatement:
    name: str
    cell: str
    nodes: Tuple[str, ...]
    line: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class MacroStatement:
    name: str
    function: str
    nodes: Tuple[str, ...]
    line: int = field(default=0, compare=False, repr=False)

    @property
    def inputs(self) -> Tuple[str, ...]:
        return self.nodes[:MACRO_PINS[self.function][0]]

    @property
    def outputs(self) -> Tuple[str, ...]:
        return self.nodes[MACRO_PINS[self.function][0]:]


@dataclass(frozen=True)
class Subcircuit:
    name: str
    ports: Tuple[str, ...]
    devices: Tuple[DeviceStatement, ...] = ()
    instances: Tuple[InstanceStatement, ...] = ()
    macros: Tuple[MacroStatement, ...] = ()
    line: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class Netlist:
    subcircuits: Tuple[Subcircuit, ...]
    top: str
    vdd: float = DEFAULT_VDD

    def cell(self, name: str) -> Subcircuit:
        for sub in self.subcircuits:
            if sub.name == name:
                return sub
        raise ElaborationError(f"unknown cell '{name}'")

    def with_top(self, name: str) -> "Netlist":
        self.cell(name)
        return Netlist(self.subcircuits, name, self.vdd)


@dataclass(frozen=True)
class FlatDevice:
    name: str
    drain: str
    gate: str
    source: str
    params: CnfetParams

    @property
    def kind(self) -> DeviceKind:
        return self.params.kind


@dataclass(frozen=True)
class FlatMacro:
    name: str
    function: str
    inputs: Tuple[str, ...]
    outputs: Tuple[str, ...]


@dataclass(frozen=True)
class FlatCircuit:
    name: str
    vdd: float
    ports: Tuple[str, ...]
    inputs: Tuple[str, ...]
    outputs: Tuple[str, ...]
    nodes: Tuple[str, ...]
    devices: Tuple[FlatDevice, ...]
    macros: Tuple[FlatMacro, ...]

    @cached_property
    def macro_outputs(self) -> frozenset:
        return frozenset(node for macro in self.macros for node in macro.outputs)

    @cached_property
    def bus_groups(self) -> Dict[str, Tuple[Tuple[int, ...], ...]]:
        """
        Nets driven through channels by more than one instance of the cell that
        defines them. Maps each such net to its driver groups: every device
        index under one driving instance (or the devices placed directly in
        the defining cell).
        """
        def head(index, scope):
            name = self.devices[index].name
            relative = name[len(scope) + 1:] if scope else name
            first, dot, _ = relative.partition(".")
            return first if dot else ""

        touching = defaultdict(set)
        for index, dev in enumerate(self.devices):
            for node in (dev.drain, dev.source):
                if node not in RAILS:
                    touching[node].add(index)
        buses = {}
        for node, indices in touching.items():
            scope = node.rpartition(".")[0]
            heads = {head(index, scope) for index in indices}
            if len(heads) < 2:
                continue
            in_scope = [
                i for i, dev in enumerate(self.devices)
                if not scope or dev.name.startswith(scope + ".")
            ]
            buses[node] = tuple(
                tuple(i for i in in_scope if head(i, scope) == key) for key in sorted(heads)
            )
        return buses

    def devices_of(self, instances: Iterable[str]) -> List[int]:
        """Indices of devices that live under any of the given instance paths."""
        prefixes = tuple(f"{name}." for name in instances)
        return [i for i, dev in enumerate(self.devices) if dev.name.startswith(prefixes)]


# --- Grammar ---

_IDENT = Regex(r"[A-Za-z_][A-Za-z0-9_]*").set_name("identifier")
_VOLTS = Regex(r"\d+(\.\d*)?([eE][-+]?\d+)?|\.\d+([eE][-+]?\d+)?").set_name("voltage")
_CHIRALITY = Regex(r"\(\s*(?P<n>\d+)\s*,\s*(?P<m>\d+)\s*\)").set_name("chirality pair (n,m)")

_SUPPLY = Keyword(".supply") + _VOLTS("volts")
_SUBCKT = Keyword(".subckt") + _IDENT("name") + Group(ZeroOrMore(_IDENT))("ports")
_ENDS = Keyword(".ends")
_TOP = Keyword(".top") + _IDENT("name")
_DEVICE = (
    Regex(r"M[A-Za-z0-9_]+")("name")
    + _IDENT("drain")
    + _IDENT("gate")
    + _IDENT("source")
    + one_of("P N", as_keyword=True)("kind")
    + _CHIRALITY("chirality")
)
_INSTANCE = Regex(r"X[A-Za-z0-9_]+")("name") + _IDENT("cell") + Group(ZeroOrMore(_IDENT))("nodes")
_MACRO = Regex(r"B[A-Za-z0-9_]+")("name") + _IDENT("function") + Group(ZeroOrMore(_IDENT))("nodes")

_STATEMENTS = {
    ".supply": _SUPPLY,
    ".subckt": _SUBCKT,
    ".ends": _ENDS,
    ".top": _TOP,
    "M": _DEVICE,
    "X": _INSTANCE,
    "B": _MACRO,
}


def _statement_kind(text: str) -> Optional[str]:
    head = text.split()[0]
    if head.startswith("."):
        return head if head in _STATEMENTS else None
    return head[0] if head[0] in "MXB" else None


class _CellBuilder:
    def __init__(self, name, ports, line):
        self.name = name
        self.ports = ports
        self.line = line
        self.devices = []
        self.instances = []
        self.macros = []
        self.names = set()

    def claim(self, name, line, column):
        if name in self.names:
            raise NetlistSyntaxError(f"duplicate statement name '{name}' in cell '{self.name}'", line, column)
        self.names.add(name)

    def build(self) -> Subcircuit:
        return Subcircuit(
            self.name,
            self.ports,
            tuple(self.devices),
            tuple(self.instances),
            tuple(self.macros),
            line=self.line,
        )


def parse_netlist(text: str) -> Netlist:
    """Parse netlist text. Raises NetlistError with line/column on any problem."""
    cells: List[Subcircuit] = []
    seen = set()
    current: Optional[_CellBuilder] = None
    vdd = None
    top = None
    top_line = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        column = len(line) - len(line.lstrip()) + 1
        kind = _statement_kind(line)
        if kind is None:
            raise NetlistSyntaxError(f"unknown statement '{line.split()[0]}'", lineno, column)
        try:
            tokens = _STATEMENTS[kind].parse_string(line, parse_all=True)
        except ParseException as err:
            raise NetlistSyntaxError(err.msg, lineno, err.col) from None

        if kind == ".supply":
            if vdd is not None:
                raise NetlistSyntaxError("duplicate .supply", lineno, column)
            if cells or current is not None:
                raise NetlistSyntaxError(".supply must precede all cells", lineno, column)
            vdd = float(tokens["volts"])
            if vdd <= 0:
                raise NetlistSyntaxError(f"supply must be positive, got {vdd}", lineno, column)
        elif kind == ".subckt":
            if current is not None:
                raise NetlistSyntaxError(f"nested .subckt inside '{current.name}'", lineno, column)
            name = tokens["name"]
            if name in seen:
                raise NetlistSyntaxError(f"duplicate subcircuit '{name}'", lineno, column)
            ports = tuple(tokens.get("ports", []))
            for port in ports:
                if port in RAILS:
                    raise NetlistSyntaxError(f"rail {port} cannot be a port of '{name}'", lineno, column)
            if len(set(ports)) != len(ports):
                raise NetlistSyntaxError(f"duplicate port name in '{name}'", lineno, column)
            seen.add(name)
            current = _CellBuilder(name, ports, lineno)
        elif kind == ".ends":
            if current is None:
                raise NetlistSyntaxError(".ends without .subckt", lineno, column)
            cells.append(current.build())
            current = None
        elif kind == ".top":
            if current is not None:
                raise NetlistSyntaxError(".top inside a cell", lineno, column)
            if top is not None:
                raise NetlistSyntaxError("duplicate .top", lineno, column)
            top, top_line = tokens["name"], lineno
        else:
            if current is None:
                raise NetlistSyntaxError("statement outside .subckt", lineno, column)
            current.claim(tokens["name"], lineno, column)
            if kind == "M":
                current.devices.append(_device(tokens, line, lineno))
            elif kind == "X":
                current.instances.append(
                    InstanceStatement(tokens["name"], tokens["cell"], tuple(tokens.get("nodes", [])), line=lineno)
                )
            else:
                current.macros.append(_macro(tokens, lineno, column))

    if current is not None:
        raise NetlistSyntaxError(f"unterminated .subckt '{current.name}'", current.line, 1)
    if top is None:
        raise NetlistSyntaxError("no top cell")
    if top not in seen:
        raise NetlistSyntaxError(f"unknown top cell '{top}'", top_line, 1)

    netlist = Netlist(tuple(cells), top, DEFAULT_VDD if vdd is None else vdd)
    logger.debug(f"Parsed {len(cells)} cells, top '{top}', supply {netlist.vdd} V")
    return netlist


def _device(tokens, line, lineno) -> DeviceStatement:
    column = line.index("(") + 1
    n, m = int(tokens["n"]), int(tokens["m"])
    try:
        chirality = Chirality(n, m)
    except DeviceError as err:
        raise NetlistSyntaxError(str(err), lineno, column) from None
    if chirality.metallic:
        raise NetlistSyntaxError(
            f"metallic nanotube {chirality} on device {tokens['name']}", lineno, column
        )
    return DeviceStatement(
        tokens["name"],
        DeviceKind(tokens["kind"]),
        tokens["drain"],
        tokens["gate"],
        tokens["source"],
        chirality,
        line=lineno,
    )


def _macro(tokens, lineno, column) -> MacroStatement:
    function = tokens["function"]
    if function not in MACRO_PINS:
        raise NetlistSyntaxError(f"unknown macro function '{function}'", lineno, column)
    nodes = tuple(tokens.get("nodes", []))
    expected = sum(MACRO_PINS[function])
    if len(nodes) != expected:
        raise NetlistSyntaxError(
            f"{function} takes {expected} nodes, got {len(nodes)}", lineno, column
        )
    return MacroStatement(tokens["name"], function, nodes, line=lineno)


# --- Emitter ---

def emit_netlist(netlist: Netlist) -> str:
    lines = [f".supply {netlist.vdd:g}", ""]
    for sub in netlist.subcircuits:
        lines.append(" ".join((".subckt", sub.name) + sub.ports))
        for dev in sub.devices:
            lines.append(
                f"{dev.name} {dev.drain} {dev.gate} {dev.source} {dev.kind.value} {dev.chirality}"
            )
        for inst in sub.instances:
            lines.append(" ".join((inst.name, inst.cell) + inst.nodes))
        for mac in sub.macros:
            lines.append(" ".join((mac.name, mac.function) + mac.nodes))
        lines.append(".ends")
        lines.append("")
    lines.append(f".top {netlist.top}")
    return "\n".join(lines) + "\n"


# --- Elaboration ---

def _check_hierarchy(netlist: Netlist):
    cells = {sub.name: sub for sub in netlist.subcircuits}
    graph = nx.DiGraph()
    graph.add_nodes_from(cells)
    for sub in netlist.subcircuits:
        for inst in sub.instances:
            target = cells.get(inst.cell)
            if target is None:
                raise ElaborationError(
                    f"instance {inst.name} in '{sub.name}' references unknown cell '{inst.cell}'", inst.line
                )
            if len(inst.nodes) != len(target.ports):
                raise ElaborationError(
                    f"instance {inst.name} binds {len(inst.nodes)} nodes, "
                    f"'{target.name}' has {len(target.ports)} ports",
                    inst.line,
                )
            graph.add_edge(sub.name, inst.cell)
    try:
        cycle = nx.find_cycle(graph)
    except nx.NetworkXNoCycle:
        return cells
    path = " -> ".join([edge[0] for edge in cycle] + [cycle[0][0]])
    raise ElaborationError(f"instantiation cycle {path}")


def elaborate(netlist: Netlist, top: Optional[str] = None) -> FlatCircuit:
    """Flatten the hierarchy below the top cell into a FlatCircuit."""
    cells = _check_hierarchy(netlist)
    top_name = top or netlist.top
    if top_name not in cells:
        raise ElaborationError(f"unknown top cell '{top_name}'")
    top_cell = cells[top_name]

    devices: List[FlatDevice] = []
    macros: List[FlatMacro] = []
    nodes: Dict[str, None] = dict.fromkeys(RAILS)
    nodes.update(dict.fromkeys(top_cell.ports))

    def flatten(sub: Subcircuit, prefix: str, binding: Dict[str, str]):
        def resolve(node):
            if node in RAILS:
                return node
            flat = binding.get(node, prefix + node)
            nodes.setdefault(flat)
            return flat

        for dev in sub.devices:
            devices.append(
                FlatDevice(
                    prefix + dev.name,
                    resolve(dev.drain),
                    resolve(dev.gate),
                    resolve(dev.source),
                    CnfetParams.nominal(dev.kind, dev.chirality),
                )
            )
        for inst in sub.instances:
            child = cells[inst.cell]
            flatten(child, f"{prefix}{inst.name}.", dict(zip(child.ports, map(resolve, inst.nodes))))
        for mac in sub.macros:
            macros.append(
                FlatMacro(
                    prefix + mac.name,
                    mac.function,
                    tuple(map(resolve, mac.inputs)),
                    tuple(map(resolve, mac.outputs)),
                )
            )

    flatten(top_cell, "", {port: port for port in top_cell.ports})

    driven = {node for dev in devices for node in (dev.drain, dev.source)}
    driven.update(node for mac in macros for node in mac.outputs)
    circuit = FlatCircuit(
        name=top_name,
        vdd=netlist.vdd,
        ports=top_cell.ports,
        inputs=tuple(p for p in top_cell.ports if p not in driven),
        outputs=tuple(p for p in top_cell.ports if p in driven),
        nodes=tuple(nodes),
        devices=tuple(devices),
        macros=tuple(macros),
    )
    logger.debug(
        f"Elaborated '{top_name}': {len(devices)} devices, {len(macros)} macros, {len(circuit.nodes)} nodes"
    )
    return circuit


# --- Static checks ---

@dataclass(frozen=True)
class Diagnostic:
    kind: str
    node: str
    message: str


def validate(f: FlatCircuit) -> List[Diagnostic]:
    """Static connectivity checks. Diagnostics are returned, never raised."""
    diagnostics: List[Diagnostic] = []
    channel_nodes = {node for dev in f.devices for node in (dev.drain, dev.source)}
    sources = set(RAILS) | set(f.inputs) | set(f.macro_outputs)
    driven = sources | channel_nodes

    for dev in f.devices:
        if dev.gate not in driven:
            diagnostics.append(
                Diagnostic("floating gate", dev.gate, f"gate of {dev.name} has no driver and is not an input")
            )
    for mac in f.macros:
        for node in mac.inputs:
            if node not in driven:
                diagnostics.append(
                    Diagnostic("floating gate", node, f"input of macro {mac.name} has no driver and is not an input")
                )

    graph = nx.Graph()
    graph.add_nodes_from(f.nodes)
    graph.add_edges_from((dev.drain, dev.source) for dev in f.devices)
    for node in f.outputs:
        if node in f.macro_outputs:
            continue
        reachable = nx.node_connected_component(graph, node)
        if not reachable & sources - {node}:
            diagnostics.append(
                Diagnostic("undriven output", node, f"output {node} has no potential path to any source")
            )

    drivers = defaultdict(list)
    for mac in f.macros:
        for node in mac.outputs:
            drivers[node].append(mac.name)
    for node, names in drivers.items():
        if node in RAILS:
            diagnostics.append(Diagnostic("multi-driven rail", node, f"rail {node} driven by macro {', '.join(names)}"))
        elif len(names) > 1 or node in f.inputs:
            diagnostics.append(Diagnostic("multi-driven node", node, f"{node} driven by {', '.join(names)}"))

    for dev in f.devices:
        if {dev.drain, dev.source} == set(RAILS):
            off_rail = GND if dev.kind == DeviceKind.N else VDD
            if dev.gate != off_rail:
                diagnostics.append(
                    Diagnostic("potential rail short", dev.gate, f"{dev.name} connects VDD to GND directly")
                )

    for diagnostic in diagnostics:
        logger.warning(f"{f.name}: {diagnostic.kind}: {diagnostic.message}")
    return diagnostics
