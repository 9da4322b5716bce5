"""
The .minic container: magic b"DCOV", a little-endian u16 format version, then
the code-object tree.

Strings and byte blocks are a u32 length followed by the payload. Constants
are tagged; nested code objects are serialized in place.
"""
import struct
from pathlib import Path

from models.errors import CompileError

from .code_object import CodeObject, ProbeHandle

MAGIC = b"DCOV"
FORMAT_VERSION = 1

_TAG_NONE, _TAG_FALSE, _TAG_TRUE, _TAG_INT, _TAG_FLOAT, _TAG_STR, _TAG_TUPLE, _TAG_CODE, _TAG_PROBE, _TAG_BIGINT = range(10)
_I64_MIN, _I64_MAX = -(1 << 63), (1 << 63) - 1


class _Writer:
    def __init__(self):
        self.out = bytearray()

    def u16(self, value: int) -> None:
        self.out += struct.pack("<H", value)

    def u32(self, value: int) -> None:
        self.out += struct.pack("<I", value)

    def blob(self, data: bytes) -> None:
        self.u32(len(data))
        self.out += data

    def string(self, text: str) -> None:
        self.blob(text.encode("utf-8"))

    def const(self, value) -> None:
        if value is None:
            self.out.append(_TAG_NONE)
        elif value is False:
            self.out.append(_TAG_FALSE)
        elif value is True:
            self.out.append(_TAG_TRUE)
        elif isinstance(value, int):
            if _I64_MIN <= value <= _I64_MAX:
                self.out.append(_TAG_INT)
                self.out += struct.pack("<q", value)
            else:
                self.out.append(_TAG_BIGINT)
                self.string(str(value))
        elif isinstance(value, float):
            self.out.append(_TAG_FLOAT)
            self.out += struct.pack("<d", value)
        elif isinstance(value, str):
            self.out.append(_TAG_STR)
            self.string(value)
        elif isinstance(value, tuple):
            self.out.append(_TAG_TUPLE)
            self.u32(len(value))
            for item in value:
                self.const(item)
        elif isinstance(value, CodeObject):
            self.out.append(_TAG_CODE)
            self.code(value)
        elif isinstance(value, ProbeHandle):
            self.out.append(_TAG_PROBE)
            self.u32(value.probe_id)
        else:
            raise CompileError(f"cannot serialize constant {value!r}")

    def code(self, code: CodeObject) -> None:
        self.string(code.name)
        self.string(code.source)
        self.u32(code.first_line)
        self.blob(code.code)
        self.u32(len(code.consts))
        for const in code.consts:
            self.const(const)
        for group in (code.names, code.argnames):
            self.u32(len(group))
            for name in group:
                self.string(name)
        self.u32(len(code.line_table))
        for offset, line in code.line_table:
            self.u32(offset)
            self.u32(line)
        self.u32(len(code.exc_table))
        for start, end, handler in code.exc_table:
            self.u32(start)
            self.u32(end)
            self.u32(handler)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def _take(self, size: int) -> bytes:
        if self.pos + size > len(self.data):
            raise CompileError(f"truncated container at byte {self.pos}")
        chunk = self.data[self.pos:self.pos + size]
        self.pos += size
        return chunk

    def u16(self) -> int:
        return struct.unpack("<H", self._take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self._take(4))[0]

    def blob(self) -> bytes:
        return self._take(self.u32())

    def string(self) -> str:
        return self.blob().decode("utf-8")

    def const(self):
        tag = self._take(1)[0]
        if tag == _TAG_NONE:
            return None
        if tag == _TAG_FALSE:
            return False
        if tag == _TAG_TRUE:
            return True
        if tag == _TAG_INT:
            return struct.unpack("<q", self._take(8))[0]
        if tag == _TAG_BIGINT:
            return int(self.string())
        if tag == _TAG_FLOAT:
            return struct.unpack("<d", self._take(8))[0]
        if tag == _TAG_STR:
            return self.string()
        if tag == _TAG_TUPLE:
            return tuple(self.const() for _ in range(self.u32()))
        if tag == _TAG_CODE:
            return self.code()
        if tag == _TAG_PROBE:
            return ProbeHandle(self.u32())
        raise CompileError(f"unknown constant tag {tag} at byte {self.pos - 1}")

    def code(self) -> CodeObject:
        name = self.string()
        source = self.string()
        first_line = self.u32()
        code = self.blob()
        consts = tuple(self.const() for _ in range(self.u32()))
        names = tuple(self.string() for _ in range(self.u32()))
        argnames = tuple(self.string() for _ in range(self.u32()))
        line_table = tuple((self.u32(), self.u32()) for _ in range(self.u32()))
        exc_table = tuple((self.u32(), self.u32(), self.u32()) for _ in range(self.u32()))
        return CodeObject(name, source, code, consts, names, argnames, line_table, exc_table, first_line)


def dump_container(code: CodeObject) -> bytes:
    writer = _Writer()
    writer.out += MAGIC
    writer.u16(FORMAT_VERSION)
    writer.code(code)
    return bytes(writer.out)


def load_container(data: bytes) -> CodeObject:
    if data[:4] != MAGIC:
        raise CompileError("not a decov container (bad magic)")
    reader = _Reader(data)
    reader.pos = 4
    version = reader.u16()
    if version != FORMAT_VERSION:
        raise CompileError(f"container format version {version}, expected {FORMAT_VERSION}")
    code = reader.code()
    if reader.pos != len(data):
        raise CompileError(f"{len(data) - reader.pos} trailing bytes after the code tree")
    return code


def write_container(code: CodeObject, path: str | Path) -> None:
    Path(path).write_bytes(dump_container(code))


def read_container(path: str | Path) -> CodeObject:
    return load_container(Path(path).read_bytes())


def is_instrumented(code: CodeObject) -> bool:
    """True when any code object of the tree already carries probe handles."""
    return any(child.probe_ids() for _, child in code.walk())
