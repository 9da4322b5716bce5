"""
Function registry: the single place callable code is looked up.

A function value only carries its registry id. Calls go through the
registry, so publishing a rewritten CodeObject takes effect on the next
call while frames already running the old code finish on it.
"""
from dataclasses import dataclass, field
from typing import Optional

from models.errors import VMFault

from compiler.code_object import CodeObject


class FunctionValue:
    __slots__ = ("registry_id", "name")

    def __init__(self, registry_id: int, name: str):
        self.registry_id = registry_id
        self.name = name

    def __repr__(self) -> str:
        return f"<function {self.name}>"


@dataclass
class RegistryEntry:
    registry_id: int
    module: str
    path: tuple
    name: str
    code: CodeObject
    rebinds: int = 0


@dataclass
class FunctionRegistry:
    entries: list[RegistryEntry] = field(default_factory=list)
    _by_key: dict[tuple[str, tuple], int] = field(default_factory=dict)
    _published: dict[tuple[str, tuple], CodeObject] = field(default_factory=dict)

    def define(self, module: str, path: tuple, code: CodeObject) -> FunctionValue:
        """Function value for the def at `path` of `module`, bound to the newest code."""
        key = (module, path)
        registry_id = self._by_key.get(key)
        if registry_id is None:
            registry_id = len(self.entries)
            current = self._published.get(key, code)
            self.entries.append(RegistryEntry(registry_id, module, path, current.name, current))
            self._by_key[key] = registry_id
        return FunctionValue(registry_id, self.entries[registry_id].name)

    def code_of(self, registry_id: int) -> CodeObject:
        return self.entries[registry_id].code

    def rebind(self, registry_id: int, code: CodeObject) -> None:
        if not 0 <= registry_id < len(self.entries):
            raise VMFault(f"rebind of unknown registry id {registry_id}")
        entry = self.entries[registry_id]
        entry.code = code
        entry.rebinds += 1

    def publish(self, module: str, path: tuple, code: CodeObject) -> None:
        """Record `code` as the newest version of (module, path) and rebind any function bound to it."""
        key = (module, path)
        self._published[key] = code
        registry_id = self._by_key.get(key)
        if registry_id is not None:
            self.rebind(registry_id, code)

    def latest(self, module: str, path: tuple = ()) -> Optional[CodeObject]:
        return self._published.get((module, path))

    def lookup(self, module: str, path: tuple) -> Optional[RegistryEntry]:
        registry_id = self._by_key.get((module, path))
        return None if registry_id is None else self.entries[registry_id]
