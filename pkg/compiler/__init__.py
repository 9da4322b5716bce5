from .isa import Op, UNIT, MAX_EXTENDED_ARGS, decode, encode_instruction, extended_args_needed
from .assembly import Instr, assemble, MAX_RELOCATION_ITERATIONS
from .code_object import CodeObject, ProbeHandle
from .codegen import compile_ast, MAX_CONSTS, NO_LINE
from .verifier import Violation, verify, check, analyze_stack
from .disassembler import disassemble
from .container import dump_container, load_container, read_container, write_container, is_instrumented

__all__ = [
    "Op",
    "UNIT",
    "MAX_EXTENDED_ARGS",
    "decode",
    "encode_instruction",
    "extended_args_needed",
    "Instr",
    "assemble",
    "MAX_RELOCATION_ITERATIONS",
    "CodeObject",
    "ProbeHandle",
    "compile_ast",
    "MAX_CONSTS",
    "NO_LINE",
    "Violation",
    "verify",
    "check",
    "analyze_stack",
    "disassemble",
    "dump_container",
    "load_container",
    "read_container",
    "write_container",
    "is_instrumented",
]
