import pytest
from hypothesis import given, strategies as st

from models import CompileError, MalformedCodeError

from compiler import MAX_EXTENDED_ARGS, Op, decode, encode_instruction, extended_args_needed
from compiler.isa import MAX_ARG, stack_effect


def test_wide_operand_uses_three_prefixes():
    assert list(encode_instruction(Op.JUMP_FORWARD, 0x01020304)) == [1, 1, 1, 2, 1, 3, 11, 4]


@pytest.mark.parametrize("arg, prefixes", [
    (0, 0),
    (0xFF, 0),
    (0x100, 1),
    (0xFFFF, 1),
    (0x10000, 2),
    (0xFFFFFF, 2),
    (0x1000000, 3),
    (MAX_ARG, 3),
])
def test_prefix_count_boundaries(arg, prefixes):
    assert extended_args_needed(arg) == prefixes
    assert len(encode_instruction(Op.LOAD_CONST, arg)) == 2 * (prefixes + 1)


def test_operand_beyond_three_prefixes_is_rejected():
    with pytest.raises(CompileError):
        encode_instruction(Op.LOAD_CONST, MAX_ARG + 1)


def test_padding_keeps_operand():
    encoded = encode_instruction(Op.POP_JUMP_IF_FALSE, 5, prefixes=2)
    assert list(encoded) == [1, 0, 1, 0, 13, 5]
    (instr,) = decode(encoded)
    assert (instr.op, instr.arg, instr.prefixes) == (Op.POP_JUMP_IF_FALSE, 5, 2)


@given(
    op=st.sampled_from([op for op in Op if op != Op.EXTENDED_ARG]),
    arg=st.integers(min_value=0, max_value=MAX_ARG),
)
def test_decode_inverts_encode(op, arg):
    (instr,) = decode(encode_instruction(op, arg))
    assert instr.op == op
    assert instr.arg == arg
    assert instr.prefixes == extended_args_needed(arg) <= MAX_EXTENDED_ARGS


def test_jump_targets_count_units_from_instruction_end():
    code = encode_instruction(Op.JUMP_FORWARD, 0x100) + bytes(2 * 0x100) + encode_instruction(Op.RETURN_CONST, 0)
    first = next(decode(code))
    assert first.end == 4
    assert first.jump_target() == 4 + 2 * 0x100


class TestMalformedCode:
    def test_odd_length(self):
        with pytest.raises(MalformedCodeError):
            list(decode(bytes([Op.NOP])))

    def test_unknown_opcode_reports_offset(self):
        with pytest.raises(MalformedCodeError) as info:
            list(decode(bytes([Op.NOP, 0, 200, 0])))
        assert info.value.offset == 2

    def test_four_prefixes(self):
        with pytest.raises(MalformedCodeError):
            list(decode(bytes([1, 0] * 4 + [Op.NOP, 0])))

    def test_dangling_prefix(self):
        with pytest.raises(MalformedCodeError):
            list(decode(bytes([Op.NOP, 0, Op.EXTENDED_ARG, 1])))


def test_for_range_next_stack_effect_depends_on_edge():
    assert stack_effect(Op.FOR_RANGE_NEXT, 0) == 1
    assert stack_effect(Op.FOR_RANGE_NEXT, 0, jump=True) == -1
