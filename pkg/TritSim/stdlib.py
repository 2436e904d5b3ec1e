"""
stdlib.py

Standard cells as netlists, each paired with its behavioural oracle.

All transistors use one of two tubes: (10,0) with |Vth| ~ 0.557 V, which only
switches on a full-swing gate, and (19,0) with |Vth| ~ 0.293 V, which already
switches at VDD/2.

The three tri-state gates share one output stage. A pull-up data network
(on when f >= 1) joins OUT to node X, a pull-down data network (on when
f <= 1) joins OUT to node Y, and four steering devices tie X and Y to the rails:

    S=0: T1 (X-VDD) and T4 (Y-GND) on       -> OUT = f
    S=2: T5 (Y-VDD) and T6 (X-GND) on       -> OUT = 2 - f
    S=1: T1, T4, T5, T6 all off             -> OUT floats (HZ), no static path

T1 and T6 see S directly; T4 is gated by NTI(S) and T5 by PTI(S). The data
devices are gated by NTI/PTI of the operands, so they only ever see 0 or VDD.
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Dict, Mapping, Tuple

from TritSim import core
from TritSim.core import TRITS, TernaryWord, Trit, TritHZ
from TritSim.device import HIGH_VTH_CHIRALITY, LOW_VTH_CHIRALITY, Chirality, DeviceKind
from TritSim.netlist import (
    GND,
    VDD,
    DeviceStatement,
    FlatCircuit,
    InstanceStatement,
    MacroStatement,
    Netlist,
    Subcircuit,
    elaborate,
)
from TritSim.sim import OracleCheck

logger = logging.getLogger(__name__)

SUPPLY_V = 0.9

HIGH = Chirality(*HIGH_VTH_CHIRALITY)
LOW = Chirality(*LOW_VTH_CHIRALITY)


@dataclass(frozen=True)
class CellEntry:
    """
    A library cell.

    Attributes:
        name: registry name (e.g. "and_nand").
        netlist: the cell and every cell it instantiates, top selected.
        oracle: behavioural model called with the input trits in port order,
            returning the output values in port order.
        domains: per-input value sets when an input does not range over all trits.
        units: named groups of top-level instances, for power breakdowns.
    """

    name: str
    netlist: Netlist
    oracle: Callable[..., Tuple[TritHZ, ...]]
    domains: Mapping[str, Tuple[int, ...]] = field(default_factory=dict)
    units: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)

    @cached_property
    def circuit(self) -> FlatCircuit:
        return elaborate(self.netlist)

    @property
    def inputs(self) -> Tuple[str, ...]:
        return self.circuit.inputs

    @property
    def outputs(self) -> Tuple[str, ...]:
        return self.circuit.outputs

    def input_rows(self):
        axes = [tuple(Trit(v) for v in self.domains.get(node, TRITS)) for node in self.inputs]
        return itertools.product(*axes)

    def expected_table(self) -> Dict[Tuple[Trit, ...], Tuple[TritHZ, ...]]:
        return {row: tuple(self.oracle(*row)) for row in self.input_rows()}

    def check(self, circuit: FlatCircuit = None) -> OracleCheck:
        return OracleCheck(self.name, circuit or self.circuit, self.expected_table())


# --- Statement helpers ---

def _pfet(name, drain, gate, source, tube):
    return DeviceStatement(name, DeviceKind.P, drain, gate, source, tube)


def _nfet(name, drain, gate, source, tube):
    return DeviceStatement(name, DeviceKind.N, drain, gate, source, tube)


def _inst(name, cell, *nodes):
    return InstanceStatement(name, cell, nodes)


def _macro(name, function, *nodes):
    return MacroStatement(name, function, nodes)


def _inverter(name, pull_up, pull_down):
    return Subcircuit(
        name,
        ("IN", "OUT"),
        devices=(
            _pfet("M1", "OUT", "IN", VDD, pull_up),
            _nfet("M2", "OUT", "IN", GND, pull_down),
        ),
    )


# Both devices on at VDD/2 divide the output to VDD/2
STI_CELL = _inverter("STI", LOW, LOW)
# Pull-up stays on through VDD/2, only a full-swing input pulls down
PTI_CELL = _inverter("PTI", LOW, HIGH)
NTI_CELL = _inverter("NTI", HIGH, LOW)


def _steering(first):
    """T1, T4, T5, T6 of the shared output stage, numbered from `first`."""
    return (
        _pfet(f"M{first}", "X", "S", VDD, HIGH),
        _nfet(f"M{first + 1}", "Y", "NS", GND, HIGH),
        _pfet(f"M{first + 2}", "Y", "PS", VDD, HIGH),
        _nfet(f"M{first + 3}", "X", "S", GND, HIGH),
    )


BUFNOT_CELL = Subcircuit(
    "BUFNOT",
    ("S", "IN", "OUT"),
    devices=(
        _pfet("M1", "X", "S", VDD, HIGH),
        _pfet("M2", "OUT", "NIN", "X", HIGH),
        _nfet("M3", "OUT", "PIN", "Y", HIGH),
        _nfet("M4", "Y", "NS", GND, HIGH),
        _pfet("M5", "Y", "PS", VDD, HIGH),
        _nfet("M6", "X", "S", GND, HIGH),
    ),
    instances=(
        _inst("X1", "NTI", "IN", "NIN"),
        _inst("X2", "PTI", "IN", "PIN"),
        _inst("X3", "NTI", "S", "NS"),
        _inst("X4", "PTI", "S", "PS"),
    ),
)

_GATE_CONTROLS = (
    _inst("X1", "NTI", "A", "NA"),
    _inst("X2", "NTI", "B", "NB"),
    _inst("X3", "PTI", "A", "PA"),
    _inst("X4", "PTI", "B", "PB"),
    _inst("X5", "NTI", "S", "NS"),
    _inst("X6", "PTI", "S", "PS"),
)

# min(a,b) >= 1 needs both operands high: series pull-up, parallel pull-down
ANDNAND_CELL = Subcircuit(
    "ANDNAND",
    ("S", "A", "B", "OUT"),
    devices=(
        _pfet("M1", "XA", "NA", "X", HIGH),
        _pfet("M2", "OUT", "NB", "XA", HIGH),
        _nfet("M3", "OUT", "PA", "Y", HIGH),
        _nfet("M4", "OUT", "PB", "Y", HIGH),
    ) + _steering(5),
    instances=_GATE_CONTROLS,
)

ORNOR_CELL = Subcircuit(
    "ORNOR",
    ("S", "A", "B", "OUT"),
    devices=(
        _pfet("M1", "OUT", "NA", "X", HIGH),
        _pfet("M2", "OUT", "NB", "X", HIGH),
        _nfet("M3", "OUT", "PA", "YA", HIGH),
        _nfet("M4", "YA", "PB", "Y", HIGH),
    ) + _steering(5),
    instances=_GATE_CONTROLS,
)

# S=0 adds, S=2 complements A and injects carry 1 (B - A)
ADDSUB2_CELL = Subcircuit(
    "ADDSUB2",
    ("S", "A0", "A1", "B0", "B1", "O0", "O1", "CO"),
    instances=(
        _inst("X1", "BUFNOT", "S", "A0", "AX0"),
        _inst("X2", "BUFNOT", "S", "A1", "AX1"),
    ),
    macros=(
        _macro("B1", "BINBUF", "S", "C0"),
        _macro("B2", "TFA", "AX0", "B0", "C0", "O0", "C1"),
        _macro("B3", "TFA", "AX1", "B1", "C1", "O1", "CO"),
    ),
)

# Operand conditioning shared by both ALUs: add (A,B,CIN), increment (A,0,1),
# subtract (2-A,B,1). ONE is a constant mid level from BINBUF(VDD).
_ARITHMETIC_MACROS = (
    _macro("B10", "BINBUF", VDD, "ONE"),
    _macro("B11", "MUX3", "S1", "A", "A", "NA", "AX"),
    _macro("B12", "MUX3", "S1", "B", GND, "B", "BX"),
    _macro("B13", "MUX3", "S1", "CIN", "ONE", "ONE", "CX"),
    _macro("B14", "TFA", "AX", "BX", "CX", "SUM", "CO"),
)

ALU_PORTS = ("S0", "S1", "A", "B", "CIN", "OUT", "COUT")

ALU1_CELL = Subcircuit(
    "ALU1",
    ALU_PORTS,
    instances=(
        _inst("X1", "BUFNOT", GND, "A", "YBUF"),
        _inst("X2", "BUFNOT", VDD, "A", "YNOT"),
        _inst("X3", "ANDNAND", GND, "A", "B", "YAND"),
        _inst("X4", "ANDNAND", VDD, "A", "B", "YNAND"),
        _inst("X5", "ORNOR", GND, "A", "B", "YOR"),
        _inst("X6", "ORNOR", VDD, "A", "B", "YNOR"),
        _inst("X7", "STI", "A", "NA"),
        _inst("X8", "BUFNOT", "C4", "CO", "COUT"),
    ),
    macros=(
        _macro("B1", "CTRL4", "S0", "S1", "C4"),
        _macro("B2", "MUX3", "S1", "YBUF", "YAND", "YOR", "L0"),
        _macro("B3", "MUX3", "S1", "YNOT", "YNAND", "YNOR", "L2"),
        _macro("B4", "MUX3", "S0", "L0", "SUM", "L2", "OUT"),
    ) + _ARITHMETIC_MACROS,
)

# No multiplexers: the logic gates and the arithmetic output buffer share OUT
# and the control word leaves all but one of them in HZ.
ALU2_CELL = Subcircuit(
    "ALU2",
    ALU_PORTS,
    instances=(
        _inst("X1", "BUFNOT", "C1", "A", "OUT"),
        _inst("X2", "ANDNAND", "C2", "A", "B", "OUT"),
        _inst("X3", "ORNOR", "C3", "A", "B", "OUT"),
        _inst("X4", "BUFNOT", "C4", "SUM", "OUT"),
        _inst("X5", "BUFNOT", "C4", "CO", "COUT"),
        _inst("X6", "STI", "A", "NA"),
    ),
    macros=(
        _macro("B1", "CTRL1", "S0", "S1", "C1"),
        _macro("B2", "CTRL2", "S0", "S1", "C2"),
        _macro("B3", "CTRL3", "S0", "S1", "C3"),
        _macro("B4", "CTRL4", "S0", "S1", "C4"),
    ) + _ARITHMETIC_MACROS,
)


def _netlist(top, *cells) -> Netlist:
    return Netlist(tuple(cells), top.name, SUPPLY_V)


# --- Oracles ---

def _single_output(function):
    return lambda *pins: (function(*pins),)


def _addsub2_oracle(s, a0, a1, b0, b1):
    out, carry = core.add_sub(s, TernaryWord((a0, a1)), TernaryWord((b0, b1)))
    return out.digits + (carry,)


def _alu_oracle(s0, s1, a, b, cin):
    return core.alu_behavioral(s0, s1, a, b, cin)


# --- Builders ---

def build_inverters() -> Tuple[CellEntry, CellEntry, CellEntry]:
    """STI, PTI and NTI as single complementary pairs."""
    return (
        CellEntry("sti", _netlist(STI_CELL, STI_CELL), _single_output(core.sti)),
        CellEntry("pti", _netlist(PTI_CELL, PTI_CELL), _single_output(core.pti)),
        CellEntry("nti", _netlist(NTI_CELL, NTI_CELL), _single_output(core.nti)),
    )


def build_buffer_not() -> CellEntry:
    return CellEntry(
        "buffer_not",
        _netlist(BUFNOT_CELL, NTI_CELL, PTI_CELL, BUFNOT_CELL),
        _single_output(core.tri_buffer_not),
    )


def build_and_nand() -> CellEntry:
    return CellEntry(
        "and_nand",
        _netlist(ANDNAND_CELL, NTI_CELL, PTI_CELL, ANDNAND_CELL),
        _single_output(core.tri_and_nand),
    )


def build_or_nor() -> CellEntry:
    return CellEntry(
        "or_nor",
        _netlist(ORNOR_CELL, NTI_CELL, PTI_CELL, ORNOR_CELL),
        _single_output(core.tri_or_nor),
    )


def build_addsub2() -> CellEntry:
    return CellEntry(
        "addsub2",
        _netlist(ADDSUB2_CELL, NTI_CELL, PTI_CELL, BUFNOT_CELL, ADDSUB2_CELL),
        _addsub2_oracle,
        domains={"S": (0, 2)},
        units={"operand": ("X1", "X2")},
    )


def build_alu1() -> CellEntry:
    return CellEntry(
        "alu1",
        _netlist(ALU1_CELL, NTI_CELL, PTI_CELL, STI_CELL, BUFNOT_CELL, ANDNAND_CELL, ORNOR_CELL, ALU1_CELL),
        _alu_oracle,
        domains={"CIN": (0, 1)},
        units={"logic": ("X1", "X2", "X3", "X4", "X5", "X6"), "arithmetic": ("X7", "X8")},
    )


def build_alu2() -> CellEntry:
    return CellEntry(
        "alu2",
        _netlist(ALU2_CELL, NTI_CELL, PTI_CELL, STI_CELL, BUFNOT_CELL, ANDNAND_CELL, ORNOR_CELL, ALU2_CELL),
        _alu_oracle,
        domains={"CIN": (0, 1)},
        units={"logic": ("X1", "X2", "X3"), "arithmetic": ("X4", "X5", "X6")},
    )


_BUILDERS = {
    "sti": lambda: build_inverters()[0],
    "pti": lambda: build_inverters()[1],
    "nti": lambda: build_inverters()[2],
    "buffer_not": build_buffer_not,
    "and_nand": build_and_nand,
    "or_nor": build_or_nor,
    "addsub2": build_addsub2,
    "alu1": build_alu1,
    "alu2": build_alu2,
}

CELL_NAMES = tuple(_BUILDERS)
GATE_NAMES = ("buffer_not", "and_nand", "or_nor")


class UnknownCellError(KeyError):
    def __str__(self):
        return f"unknown cell {self.args[0]!r}; known cells: {', '.join(CELL_NAMES)}"


@lru_cache(maxsize=None)
def get_cell(name: str) -> CellEntry:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise UnknownCellError(name) from None
    logger.debug(f"Building cell {name}")
    return builder()


def all_cells():
    return [get_cell(name) for name in CELL_NAMES]
