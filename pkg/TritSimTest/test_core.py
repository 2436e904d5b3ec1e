# test_core.py
import itertools

import pytest

from TritSim.core import (
    CONTROL_TABLE,
    HZ,
    TRITS,
    TernaryValueError,
    TernaryWord,
    add_sub,
    alu_arithmetic,
    alu_behavioral,
    control_signals,
    full_add,
    nti,
    parse_symbol,
    pti,
    sti,
    symbol,
    t_max,
    t_min,
    t_not,
    tri_and_nand,
    tri_buffer_not,
    tri_or_nor,
)

PAIRS = list(itertools.product(TRITS, repeat=2))
TRIPLES = list(itertools.product(TRITS, repeat=3))


@pytest.mark.parametrize("a, b, expected", [(0, 0, 0), (1, 2, 2), (2, 0, 2)])
def test_t_max(a, b, expected):
    assert t_max(a, b) == expected


@pytest.mark.parametrize("a, b, expected", [(2, 2, 2), (1, 2, 1), (0, 2, 0)])
def test_t_min(a, b, expected):
    assert t_min(a, b) == expected


@pytest.mark.parametrize("a, expected", [(0, 2), (1, 1), (2, 0)])
def test_t_not(a, expected):
    assert t_not(a) == expected
    assert sti(a) == expected


def test_inverter_tables():
    assert [pti(a) for a in TRITS] == [2, 2, 0]
    assert [nti(a) for a in TRITS] == [2, 0, 0]
    assert [sti(a) for a in TRITS] == [2, 1, 0]


def test_algebra_laws():
    for a, b in PAIRS:
        assert t_max(a, b) == t_max(b, a)
        assert t_min(a, b) == t_min(b, a)
        assert t_min(a, t_max(a, b)) == a
        assert t_max(a, t_min(a, b)) == a
        assert t_not(t_min(a, b)) == t_max(t_not(a), t_not(b))
        assert t_not(t_max(a, b)) == t_min(t_not(a), t_not(b))
    for a in TRITS:
        assert t_max(a, a) == a
        assert t_min(a, a) == a
        assert t_not(t_not(a)) == a
    for a, b, c in TRIPLES:
        assert t_max(a, t_max(b, c)) == t_max(t_max(a, b), c)
        assert t_min(a, t_min(b, c)) == t_min(t_min(a, b), c)


def test_trit_domain_is_closed():
    with pytest.raises(TernaryValueError):
        t_not(3)
    with pytest.raises(TernaryValueError):
        t_max(-1, 0)
    with pytest.raises(TernaryValueError):
        t_min(HZ, 0)


def test_symbols():
    assert [symbol(v) for v in (0, 1, 2, HZ)] == ["0", "1", "2", "Z"]
    assert parse_symbol("z") is HZ
    assert parse_symbol(" 2 ") == 2
    with pytest.raises(TernaryValueError):
        parse_symbol("3")


@pytest.mark.parametrize("s, value, expected", [(0, 1, 1), (1, 2, HZ), (2, 0, 2)])
def test_tri_buffer_not(s, value, expected):
    assert tri_buffer_not(s, value) == expected


@pytest.mark.parametrize("args, expected", [((0, 2, 1), 1), ((2, 2, 2), 0), ((1, 0, 2), HZ)])
def test_tri_and_nand(args, expected):
    assert tri_and_nand(*args) == expected


@pytest.mark.parametrize("args, expected", [((0, 1, 0), 1), ((2, 0, 0), 2), ((1, 2, 2), HZ)])
def test_tri_or_nor(args, expected):
    assert tri_or_nor(*args) == expected


def test_complement_pairs():
    for a, b in PAIRS:
        assert tri_buffer_not(2, a) == t_not(tri_buffer_not(0, a))
        assert tri_and_nand(2, a, b) == t_not(tri_and_nand(0, a, b))
        assert tri_or_nor(2, a, b) == t_not(tri_or_nor(0, a, b))
        assert tri_buffer_not(1, a) is HZ
        assert tri_and_nand(1, a, b) is HZ
        assert tri_or_nor(1, a, b) is HZ


@pytest.mark.parametrize("args, expected", [((0, 0, 0), (0, 0)), ((2, 2, 1), (2, 1)), ((1, 2, 0), (0, 1))])
def test_full_add(args, expected):
    assert full_add(*args) == expected


def test_full_add_identity():
    for a, b in PAIRS:
        for cin in (0, 1):
            total, carry = full_add(a, b, cin)
            assert total + 3 * carry == a + b + cin


def test_full_add_rejects_carry_two():
    with pytest.raises(TernaryValueError):
        full_add(1, 1, 2)


def test_word_conversions():
    word = TernaryWord.from_int(7, 2)
    assert word.digits == (1, 2)
    assert int(word) == 7
    assert str(word) == "21"
    with pytest.raises(TernaryValueError):
        TernaryWord.from_int(9, 2)
    with pytest.raises(TernaryValueError):
        TernaryWord(())


def test_add_sub_examples():
    out, carry = add_sub(0, TernaryWord((2, 2)), TernaryWord((2, 2)))
    assert (out.digits, carry) == ((1, 2), 1)
    out, carry = add_sub(2, TernaryWord((2, 0)), TernaryWord((2, 1)))
    assert (out.digits, carry) == ((0, 1), 1)
    out, carry = add_sub(2, TernaryWord((0, 0)), TernaryWord((0, 0)))
    assert (out.digits, carry) == ((0, 0), 1)


def test_add_sub_exhaustive_width_two():
    for a, b in itertools.product(range(9), repeat=2):
        wa, wb = TernaryWord.from_int(a, 2), TernaryWord.from_int(b, 2)
        out, carry = add_sub(0, wa, wb)
        assert int(out) + 9 * carry == a + b
        out, carry = add_sub(2, wa, wb)
        assert int(out) == (b - a) % 9
        assert carry == (1 if b >= a else 0)


def test_add_sub_wider_words():
    out, carry = add_sub(2, TernaryWord.from_int(40, 4), TernaryWord.from_int(13, 4))
    assert int(out) == (13 - 40) % 81
    assert carry == 0


def test_add_sub_rejects_mode_one_and_width_mismatch():
    with pytest.raises(TernaryValueError):
        add_sub(1, TernaryWord((0,)), TernaryWord((0,)))
    with pytest.raises(TernaryValueError):
        add_sub(0, TernaryWord((0,)), TernaryWord((0, 0)))


@pytest.mark.parametrize("select, word", [((1, 0), (1, 1, 1, 0)), ((0, 1), (1, 0, 1, 1)), ((2, 2), (1, 1, 2, 1))])
def test_control_signals(select, word):
    assert control_signals(*select) == word


def test_control_table_enables_one_unit():
    assert len(CONTROL_TABLE) == 9
    for word in CONTROL_TABLE.values():
        enabled = [c for c in word[:3] if c != 1]
        if word.c4 == 0:
            assert enabled == []
        else:
            assert len(enabled) == 1


def test_alu_examples():
    assert alu_behavioral(2, 0, 1, 2, 0) == (1, HZ)
    assert alu_behavioral(0, 2, 0, 2, 0) == (2, HZ)
    assert alu_behavioral(1, 2, 2, 1, 0) == (2, 0)
    assert alu_behavioral(1, 0, 2, 2, 0) == (1, 1)
    assert alu_behavioral(1, 1, 2, 0, 0) == (0, 1)


def test_alu_increment_ignores_b_and_carry_in():
    for a, b in PAIRS:
        for cin in (0, 1):
            assert alu_arithmetic(1, a, b, cin) == full_add(a, 0, 1)


def test_alu_logic_rows_leave_carry_floating():
    for (s0, s1), word in CONTROL_TABLE.items():
        for a, b in PAIRS:
            out, cout = alu_behavioral(s0, s1, a, b, 0)
            assert out is not HZ
            assert (cout is HZ) == (word.c4 != 0)


def test_alu_rejects_carry_two():
    with pytest.raises(TernaryValueError):
        alu_behavioral(1, 0, 0, 0, 2)
