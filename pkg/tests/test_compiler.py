import pytest

from models import CompileError, RelocationError, VerificationError

from compiler import (
    MAX_RELOCATION_ITERATIONS,
    NO_LINE,
    UNIT,
    CodeObject,
    Instr,
    Op,
    ProbeHandle,
    assemble,
    check,
    decode,
    disassemble,
    dump_container,
    is_instrumented,
    load_container,
    verify,
)
from vm import VirtualMachine

from tests.assembler import parse_listing
from tests.helpers import GOLDEN, compile_source, corpus_programs


def _golden(name: str) -> tuple[str, str]:
    return (GOLDEN / f"{name}.mini").read_text(), (GOLDEN / f"{name}.dis").read_text()


def _run(code: CodeObject):
    return VirtualMachine().run(code)


@pytest.mark.parametrize("name", ["if_no_else", "loop", "match"])
def test_disassembly_matches_golden(name):
    source, listing = _golden(name)
    assert disassemble(compile_source(source, f"{name}.mini")) == listing


def test_if_without_else_line_table():
    source, _ = _golden("if_no_else")
    code = compile_source(source, "if_no_else.mini")
    assert code.line_table == ((0, 1), (4, 2), (12, 3), (16, 5), (24, 6), (30, NO_LINE))
    assert code.consts == (0, 1, 2, None)
    assert code.names == ("x", "y")
    assert _run(code).output == "2\n"


def test_constants_are_deduplicated_by_type():
    code = compile_source("a = 1\nb = 1\nc = True\nd = 1.0\ne = 1\n")
    assert code.consts == (1, True, 1.0, None)


def test_functions_become_nested_code_objects():
    code = compile_source("def f(a, b) {\n    return a + b\n}\nprint(f(2, 3))\n")
    (_, child), = code.children()
    assert child.name == "f"
    assert child.argnames == ("a", "b")
    assert child.first_line == 1
    assert child.line_table[0] == (0, 2)
    assert _run(code).output == "5\n"


def test_pass_owns_a_nop():
    code = compile_source("pass\nx = 1\n")
    first = next(decode(code.code))
    assert first.op == Op.NOP
    assert code.line_table[:2] == ((0, 1), (2, 2))


def test_loop_back_edges_belong_to_no_line():
    code = compile_source("for i in range(2) {\n    x = i\n}\n")
    back = [i for i in decode(code.code) if i.op == Op.JUMP_BACKWARD]
    assert len(back) == 1
    assert code.line_at(back[0].offset) == NO_LINE


def test_try_records_exception_range():
    code = compile_source("try {\n    x = 1 / 0\n} except {\n    x = 2\n}\nprint(x)\n")
    (start, end, handler), = code.exc_table
    assert 0 < start < end <= handler
    result = _run(code)
    assert result.status == 0
    assert result.output == "2\n"


@pytest.mark.parametrize("source, expected", [
    ("print(0 and 5)", "False"),
    ("print(3 and 5)", "5"),
    ("print(0 or 5)", "5"),
    ("print(3 or 5)", "True"),
    ("print(not 0)", "True"),
])
def test_bool_ops(source, expected):
    assert _run(compile_source(source)).output == expected + "\n"


def test_transformed_code_keeps_markers_as_stores():
    source, _ = _golden("if_no_else")
    code = compile_source(source, "if_no_else.mini", transformed=True)
    assert "_branch" in code.names
    assert (2, 3) in code.consts and (2, 5) in code.consts
    assert verify(code) == []


@pytest.mark.parametrize("path", corpus_programs(), ids=lambda p: p.stem)
def test_corpus_compiles_to_verified_code(path):
    for transformed in (False, True):
        code = compile_source(path.read_text(), str(path), transformed=transformed)
        assert verify(code) == []


@pytest.mark.parametrize("path", corpus_programs(), ids=lambda p: p.stem)
def test_listing_reassembles_to_the_same_bytes(path):
    code = compile_source(path.read_text(), path.name, transformed=True)
    listings = parse_listing(disassemble(code))
    walked = list(code.walk())
    assert len(listings) == len(walked)
    for listing, (_, owned) in zip(listings, walked):
        assert bytes(listing.code) == owned.code
        assert tuple(listing.line_table) == owned.line_table
        assert tuple(listing.exc_table) == owned.exc_table


class TestVerifier:
    def _code(self, units, consts=(None,)):
        return CodeObject("t", "t.mini", bytes(b for unit in units for b in unit), consts=consts)

    def test_minimal_code_is_clean(self):
        assert verify(self._code([(Op.RETURN_CONST, 0)])) == []

    def test_jump_outside_code(self):
        violations = verify(self._code([(Op.JUMP_FORWARD, 5), (Op.RETURN_CONST, 0)]))
        assert any("outside code" in v.message for v in violations)

    def test_fall_off_end(self):
        violations = verify(self._code([(Op.NOP, 0)]))
        assert any("fall off" in v.message for v in violations)

    def test_stack_underflow(self):
        violations = verify(self._code([(Op.POP_TOP, 0), (Op.RETURN_CONST, 0)]))
        assert any("underflow" in v.message for v in violations)

    def test_probe_header_must_skip_the_probe(self):
        code = self._code([(Op.NOP, 4), (Op.PROBE, 0), (Op.RETURN_CONST, 1)], consts=(ProbeHandle(0), None))
        violations = verify(code)
        assert any("skips 4 bytes" in v.message for v in violations)

    def test_jump_into_probe_sequence(self):
        code = self._code(
            [(Op.JUMP_FORWARD, 1), (Op.NOP, 2), (Op.PROBE, 0), (Op.RETURN_CONST, 1)],
            consts=(ProbeHandle(0), None),
        )
        violations = verify(code)
        assert any("probe sequence" in v.message for v in violations)

    def test_check_raises(self):
        with pytest.raises(VerificationError) as info:
            check(self._code([(Op.LOAD_CONST, 3), (Op.RETURN_VALUE, 0)]))
        assert info.value.violations


class _Span(Instr):
    """Straight-line code of `units` code units, laid out but encoded as one NOP."""

    def __init__(self, units: int):
        super().__init__(Op.NOP)
        self.units = units

    @property
    def size(self) -> int:
        return self.units * UNIT


class TestAssembler:
    def _cascade(self):
        """A backward jump whose widening pushes a forward jump over it past one byte."""
        body = [Instr(Op.NOP) for _ in range(300)]
        end = Instr(Op.RETURN_CONST, 0)
        forward = Instr(Op.JUMP_FORWARD, target=end)
        middle = [Instr(Op.NOP) for _ in range(254)]
        backward = Instr(Op.JUMP_BACKWARD, target=body[0])
        return [*body, forward, *middle, backward, end], forward, backward

    def test_widening_cascade_reaches_fixpoint(self):
        instrs, forward, backward = self._cascade()
        assembled = assemble(instrs)
        assert assembled.iterations == 3
        assert forward.prefixes == backward.prefixes == 1
        decoded = {i.offset: i for i in decode(assembled.code)}
        assert decoded[assembled.offset_of(forward)].jump_target() == assembled.offset_of(instrs[-1])
        assert decoded[assembled.offset_of(backward)].jump_target() == 0

    def test_iteration_guard(self):
        instrs, _, _ = self._cascade()
        with pytest.raises(RelocationError):
            assemble(instrs, max_iterations=2)

    def test_unresolved_jump(self):
        with pytest.raises(CompileError):
            assemble([Instr(Op.JUMP_FORWARD), Instr(Op.RETURN_CONST)])

    def test_forward_span_of_three_prefixes(self):
        end = Instr(Op.RETURN_CONST, 0)
        jump = Instr(Op.JUMP_FORWARD, target=end)
        assembled = assemble([jump, _Span(0x01020304), end])
        assert jump.prefixes == 3
        assert jump.arg == 0x01020304
        assert list(assembled.code[:8]) == [Op.EXTENDED_ARG, 1, Op.EXTENDED_ARG, 2, Op.EXTENDED_ARG, 3, Op.JUMP_FORWARD, 4]
        assert assembled.iterations <= MAX_RELOCATION_ITERATIONS

    @pytest.mark.parametrize("span, prefixes", [(0x100, 1), (0xFFFF, 2), (0xFFFFFF, 3)])
    def test_backward_jump_widened_by_its_own_prefixes(self, span, prefixes):
        head = Instr(Op.NOP)
        back = Instr(Op.JUMP_BACKWARD, target=head)
        # the unprefixed jump spans exactly `span` units; each prefix it gains adds one
        assembled = assemble([head, _Span(span - 2), back])
        assert back.prefixes == prefixes
        assert back.arg == span + prefixes
        assert assembled.iterations <= MAX_RELOCATION_ITERATIONS


def test_long_then_arm_widens_the_conditional_jump():
    body = "".join("    y = 1\n" for _ in range(200))
    code = compile_source(f"x = 0\nif x == 1 {{\n{body}}}\nprint(x)\n")
    jumps = [i for i in decode(code.code) if i.op == Op.POP_JUMP_IF_FALSE]
    assert jumps[0].prefixes == 1
    assert verify(code) == []
    assert _run(code).output == "0\n"


class TestContainer:
    @pytest.mark.parametrize("path", corpus_programs()[:8], ids=lambda p: p.stem)
    def test_round_trip(self, path):
        code = compile_source(path.read_text(), str(path), transformed=True)
        assert load_container(dump_container(code)) == code

    def test_constants_keep_their_types(self):
        code = compile_source('a = (1, True, None, 2.5, "s", 1180591620717411303424)\n')
        loaded = load_container(dump_container(code))
        assert [type(c) for c in loaded.consts] == [type(c) for c in code.consts]
        assert loaded.consts == code.consts

    def test_bad_magic(self):
        with pytest.raises(CompileError):
            load_container(b"XXXX\x01\x00")

    def test_trailing_bytes(self):
        data = dump_container(compile_source("pass\n")) + b"\x00"
        with pytest.raises(CompileError):
            load_container(data)

    def test_source_code_is_not_instrumented(self):
        assert not is_instrumented(compile_source("x = 1\n"))
