"""
core.py

Ternary algebra and behavioural reference models.

Responsibilities:
  1. Represent trits (0, 1, 2) and the high-impedance marker HZ.
  2. Provide MAX/MIN/NOT and the three ternary inverters (STI, PTI, NTI).
  3. Model the tri-state gates (Buffer/NOT, AND/NAND, OR/NOR) under a ternary
     control signal.
  4. Provide radix-3 arithmetic (full adder, multi-digit add/subtract) and the
     ALU control table with its behavioural ALU.

Everything here is pure and is used as the ground truth that the switch-level
simulations are compared against.
"""

from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import NamedTuple, Tuple, Union


class TernaryValueError(ValueError):
    """Raised when an operation receives an argument outside its domain."""


class Trit(IntEnum):
    ZERO = 0
    ONE = 1
    TWO = 2

    def __str__(self):
        return str(int(self))


class HighImpedance(Enum):
    HZ = "Z"

    def __str__(self):
        return "Z"


HZ = HighImpedance.HZ

TritHZ = Union[Trit, HighImpedance]

TRITS = (Trit.ZERO, Trit.ONE, Trit.TWO)


def trit(value) -> Trit:
    """Coerce an int-like value to a Trit, rejecting anything outside {0,1,2}."""
    if isinstance(value, HighImpedance):
        raise TernaryValueError("HZ is not a logic level")
    try:
        return Trit(value)
    except ValueError:
        raise TernaryValueError(f"{value!r} is not a trit") from None


def symbol(value: TritHZ) -> str:
    """Text symbol of a value: '0', '1', '2' or 'Z'."""
    return "Z" if value is HZ else str(trit(value))


def parse_symbol(text: str) -> TritHZ:
    text = text.strip()
    if text.upper() == "Z":
        return HZ
    try:
        return trit(int(text))
    except ValueError:
        raise TernaryValueError(f"{text!r} is not a trit symbol") from None


# --- Ternary algebra ---

def t_max(a, b) -> Trit:
    """Ternary OR."""
    return max(trit(a), trit(b))


def t_min(a, b) -> Trit:
    """Ternary AND."""
    return min(trit(a), trit(b))


def t_not(a) -> Trit:
    return Trit(2 - trit(a))


def sti(a) -> Trit:
    return t_not(a)


def pti(a) -> Trit:
    # only the high level turns a positive inverter low
    return Trit.ZERO if trit(a) == Trit.TWO else Trit.TWO


def nti(a) -> Trit:
    return Trit.TWO if trit(a) == Trit.ZERO else Trit.ZERO


# --- Tri-state gates ---

def _tri_state(s, value: Trit) -> TritHZ:
    s = trit(s)
    if s == Trit.ZERO:
        return value
    if s == Trit.ONE:
        return HZ
    return t_not(value)


def tri_buffer_not(s, a) -> TritHZ:
    """Buffer for S=0, HZ for S=1, standard inverter for S=2."""
    return _tri_state(s, trit(a))


def tri_and_nand(s, a, b) -> TritHZ:
    return _tri_state(s, t_min(a, b))


def tri_or_nor(s, a, b) -> TritHZ:
    return _tri_state(s, t_max(a, b))


# --- Radix-3 arithmetic ---

@dataclass(frozen=True)
class TernaryWord:
    """Little-endian multi-digit ternary number (digits[0] is least significant)."""

    digits: Tuple[Trit, ...]

    def __post_init__(self):
        if not self.digits:
            raise TernaryValueError("a ternary word needs at least one digit")
        object.__setattr__(self, "digits", tuple(trit(d) for d in self.digits))

    @property
    def width(self) -> int:
        return len(self.digits)

    @classmethod
    def from_int(cls, value: int, width: int) -> "TernaryWord":
        if width < 1:
            raise TernaryValueError(f"width must be positive, got {width}")
        if not 0 <= value < 3 ** width:
            raise TernaryValueError(f"{value} does not fit in {width} trits")
        digits = []
        for _ in range(width):
            value, digit = divmod(value, 3)
            digits.append(Trit(digit))
        return cls(tuple(digits))

    def __int__(self):
        return sum(int(d) * 3 ** i for i, d in enumerate(self.digits))

    def __str__(self):
        # most significant digit first, the way numbers are read
        return "".join(str(d) for d in reversed(self.digits))


def full_add(a, b, cin) -> Tuple[Trit, Trit]:
    """Ternary full adder returning (sum, carry). Carry-in must be 0 or 1."""
    a, b, cin = trit(a), trit(b), trit(cin)
    if cin == Trit.TWO:
        raise TernaryValueError("carry-in must be 0 or 1")
    carry, total = divmod(a + b + cin, 3)
    return Trit(total), Trit(carry)


def add_sub(mode, a: TernaryWord, b: TernaryWord) -> Tuple[TernaryWord, Trit]:
    """
    Multi-digit adder/subtractor.

    mode 0 adds A and B. mode 2 complements every digit of A and injects a
    carry-in of 1, so the result is B - A in radix complement and the carry-out
    is 1 exactly when B >= A. mode 1 would leave the operand buffers in HZ and
    is refused.
    """
    mode = trit(mode)
    if mode == Trit.ONE:
        raise TernaryValueError("mode 1 puts the operand buffers in HZ")
    if a.width != b.width:
        raise TernaryValueError(f"width mismatch: {a.width} vs {b.width}")
    subtract = mode == Trit.TWO
    carry = Trit.ONE if subtract else Trit.ZERO
    digits = []
    for da, db in zip(a.digits, b.digits):
        operand = t_not(da) if subtract else da
        digit, carry = full_add(operand, db, carry)
        digits.append(digit)
    return TernaryWord(tuple(digits)), carry


# --- ALU ---

class ControlWord(NamedTuple):
    c1: Trit
    c2: Trit
    c3: Trit
    c4: Trit


def _word(*levels) -> ControlWord:
    return ControlWord(*(Trit(level) for level in levels))


# (s0, s1) -> (C1, C2, C3, C4); C1..C3 enable the logic gates, C4 the arithmetic unit
CONTROL_TABLE = {
    (1, 0): _word(1, 1, 1, 0),  # add
    (1, 1): _word(1, 1, 1, 0),  # increment
    (1, 2): _word(1, 1, 1, 0),  # subtract
    (0, 0): _word(0, 1, 1, 1),  # buffer
    (0, 1): _word(1, 0, 1, 1),  # and
    (0, 2): _word(1, 1, 0, 1),  # or
    (2, 0): _word(2, 1, 1, 1),  # not
    (2, 1): _word(1, 2, 1, 1),  # nand
    (2, 2): _word(1, 1, 2, 1),  # nor
}

OPERATION_NAMES = {
    (1, 0): "add",
    (1, 1): "increment",
    (1, 2): "subtract",
    (0, 0): "buffer",
    (0, 1): "and",
    (0, 2): "or",
    (2, 0): "not",
    (2, 1): "nand",
    (2, 2): "nor",
}


def control_signals(s0, s1) -> ControlWord:
    return CONTROL_TABLE[(int(trit(s0)), int(trit(s1)))]


def alu_arithmetic(s1, a, b, cin) -> Tuple[Trit, Trit]:
    """Arithmetic unit: add (S1=0), increment (S1=1), subtract B - A (S1=2)."""
    s1 = trit(s1)
    if s1 == Trit.ZERO:
        return full_add(a, b, cin)
    if s1 == Trit.ONE:
        return full_add(a, Trit.ZERO, Trit.ONE)
    return full_add(t_not(a), b, Trit.ONE)


def alu_behavioral(s0, s1, a, b, cin) -> Tuple[TritHZ, TritHZ]:
    """One-trit ALU. Logic rows leave the carry output in HZ."""
    s0, s1, a, b, cin = (trit(v) for v in (s0, s1, a, b, cin))
    if cin == Trit.TWO:
        raise TernaryValueError("carry-in must be 0 or 1")
    word = control_signals(s0, s1)
    if word.c4 == Trit.ZERO:
        return alu_arithmetic(s1, a, b, cin)
    logic = [
        tri_buffer_not(word.c1, a),
        tri_and_nand(word.c2, a, b),
        tri_or_nor(word.c3, a, b),
    ]
    driven = [value for value in logic if value is not HZ]
    return driven[0], HZ
