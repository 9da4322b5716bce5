"""
Stable text listing of CodeObjects.

One row per code unit: EXTENDED_ARG prefixes get their own row with their raw
operand byte, and the instruction row shows its low operand byte followed by
the resolved operand. The source line appears on rows that start a line
table entry, "-" when the entry belongs to no source line.
"""
from .code_object import CodeObject
from .isa import JUMPS, UNIT, Op, decode
from frontend.semantics import BINARY_OPERATORS, COMPARE_OPERATORS


def _const_repr(value) -> str:
    if isinstance(value, CodeObject):
        return f"<code {value.name}, line {value.first_line}>"
    return repr(value)


def _resolved(code: CodeObject, op: Op, arg: int, end: int) -> str:
    if op in JUMPS:
        target = end + UNIT * arg if op != Op.JUMP_BACKWARD else end - UNIT * arg
        return f"(to {target})"
    if op in (Op.LOAD_CONST, Op.RETURN_CONST, Op.MATCH_LITERAL, Op.MAKE_FUNCTION, Op.PROBE):
        if arg < len(code.consts):
            return f"({_const_repr(code.consts[arg])})"
        return "(<bad const>)"
    if op in (Op.LOAD_NAME, Op.STORE_NAME):
        return f"({code.names[arg]})" if arg < len(code.names) else "(<bad name>)"
    if op == Op.BINARY_OP and arg < len(BINARY_OPERATORS):
        return f"({BINARY_OPERATORS[arg]})"
    if op == Op.COMPARE_OP and arg < len(COMPARE_OPERATORS):
        return f"({COMPARE_OPERATORS[arg]})"
    if op == Op.NOP and arg:
        return f"(skip {arg} bytes)"
    return ""


def _listing(code: CodeObject, title: str) -> list[str]:
    rows = [f"Disassembly of {title}:"]
    line_starts = {offset: line or "-" for offset, line in code.line_table}
    for instr in decode(code.code):
        for index in range(instr.prefixes):
            offset = instr.offset + UNIT * index
            raw = code.code[offset + 1]
            line = line_starts.get(offset, "")
            rows.append(f"{line!s:>5} {offset:>6} {Op.EXTENDED_ARG.name:<20} {raw:>3}".rstrip())
        offset = instr.op_offset
        line = line_starts.get(instr.offset, "") if not instr.prefixes else ""
        resolved = _resolved(code, instr.op, instr.arg, instr.end)
        rows.append(f"{line!s:>5} {offset:>6} {instr.op.name:<20} {instr.arg & 0xFF:>3} {resolved}".rstrip())
    if code.exc_table:
        rows.append("ExceptionTable:")
        for start, end, handler in code.exc_table:
            rows.append(f"  {start} to {end} -> {handler}")
    return rows


def disassemble(code: CodeObject) -> str:
    """Listing of `code` and, after it, every nested code object in const order."""
    rows: list[str] = []
    for path, child in code.walk():
        if rows:
            rows.append("")
        where = "".join(f"[{index}]" for index in path)
        title = f"{child.name} ({child.source}:{child.first_line}){' consts' + where if where else ''}"
        rows.extend(_listing(child, title))
    return "\n".join(rows) + "\n"
