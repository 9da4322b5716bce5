"""
Seeded generator of terminating Mini programs for the fuzz tests.

Every loop is bounded (range() of a small constant, or a while loop over a
counter nothing else assigns), functions only call functions defined before
them, and arithmetic is reduced modulo a small prime so values stay small.
"""
import random

GLOBALS = ("a", "b", "c")
LITERALS = (0, 1, 2, 3, 5, 7)


class ProgramGenerator:
    def __init__(self, seed: int, max_depth: int = 3):
        self.rng = random.Random(seed)
        self.max_depth = max_depth
        self.lines: list[str] = []
        self.functions: list[tuple[str, int]] = []
        self.counters = 0

    def generate(self) -> str:
        for name, value in zip(GLOBALS, (0, 1, 2)):
            self._emit(0, f"{name} = {value}")
        for index in range(self.rng.randint(0, 2)):
            self._function(index)
        for _ in range(self.rng.randint(2, 6)):
            self._statement(0, depth=0, params=(), in_function=False)
        self._emit(0, "print((a, b, c))")
        return "\n".join(self.lines) + "\n"

    # -- pieces --------------------------------------------------------

    def _emit(self, indent: int, text: str) -> None:
        self.lines.append("    " * indent + text)

    def _function(self, index: int) -> None:
        name = f"f{index}"
        params = tuple(f"p{i}" for i in range(self.rng.randint(1, 2)))
        self._emit(0, f"def {name}({', '.join(params)}) {{")
        for _ in range(self.rng.randint(1, 3)):
            self._statement(1, depth=1, params=params, in_function=True)
        self._emit(1, f"return {self._expr(params, 2)}")
        self._emit(0, "}")
        self.functions.append((name, len(params)))

    def _operand(self, params: tuple) -> str:
        names = GLOBALS + params
        if self.rng.random() < 0.4:
            return str(self.rng.choice(LITERALS))
        return self.rng.choice(names)

    def _expr(self, params: tuple, budget: int) -> str:
        roll = self.rng.random()
        if budget <= 0 or roll < 0.35:
            return self._operand(params)
        if roll < 0.55 and self.functions:
            name, arity = self.rng.choice(self.functions)
            args = ", ".join(self._expr(params, budget - 1) for _ in range(arity))
            return f"{name}({args})"
        op = self.rng.choice(("+", "-", "*"))
        return f"({self._expr(params, budget - 1)} {op} {self._expr(params, budget - 1)}) % 97"

    def _condition(self, params: tuple) -> str:
        roll = self.rng.random()
        left = self._expr(params, 1)
        if roll < 0.3:
            return f"{left} % 2 == 0"
        if roll < 0.45:
            return f"{left} < {self.rng.choice(LITERALS)} and {self._operand(params)} != 3"
        if roll < 0.55:
            return f"not {left} > 4 or {self._operand(params)} == 1"
        op = self.rng.choice(("<", "<=", "==", "!=", ">", ">="))
        return f"{left} {op} {self._expr(params, 1)}"

    def _block(self, indent: int, depth: int, params: tuple, in_function: bool, low: int = 1) -> None:
        for _ in range(self.rng.randint(low, 3)):
            self._statement(indent, depth, params, in_function)

    def _target(self, params: tuple) -> str:
        return self.rng.choice(GLOBALS + params)

    def _statement(self, indent: int, depth: int, params: tuple, in_function: bool) -> None:
        kinds = ["assign", "assign", "print"]
        if depth < self.max_depth:
            kinds += ["if", "if_else", "single_if", "for", "while", "match", "try"]
        if in_function and depth > 1:
            kinds.append("return")
        kind = self.rng.choice(kinds)
        cond = self._condition(params)

        if kind == "assign":
            self._emit(indent, f"{self._target(params)} = {self._expr(params, 2)}")
        elif kind == "print":
            self._emit(indent, f"print({self._expr(params, 2)})")
        elif kind == "return":
            self._emit(indent, f"return {self._expr(params, 1)}")
        elif kind == "single_if":
            self._emit(indent, f"if {cond}: {self._target(params)} = {self._expr(params, 1)}")
        elif kind in ("if", "if_else"):
            self._emit(indent, f"if {cond} {{")
            self._block(indent + 1, depth + 1, params, in_function)
            if kind == "if_else":
                if self.rng.random() < 0.4:
                    self._emit(indent, f"}} elif {self._condition(params)} {{")
                    self._block(indent + 1, depth + 1, params, in_function)
                self._emit(indent, "} else {")
                self._block(indent + 1, depth + 1, params, in_function)
            self._emit(indent, "}")
        elif kind == "for":
            var = f"i{depth}"
            self._emit(indent, f"for {var} in range({self.rng.randint(0, 4)}) {{")
            self._block(indent + 1, depth + 1, params + (var,), in_function)
            self._emit(indent, "}")
        elif kind == "while":
            counter = f"w{self.counters}"
            self.counters += 1
            self._emit(indent, f"{counter} = 0")
            self._emit(indent, f"while {counter} < {self.rng.randint(0, 3)} {{")
            self._block(indent + 1, depth + 1, params, in_function)
            self._emit(indent + 1, f"{counter} = {counter} + 1")
            if self.rng.random() < 0.3:
                self._emit(indent, "} else {")
                self._block(indent + 1, depth + 1, params, in_function)
            self._emit(indent, "}")
        elif kind == "match":
            self._emit(indent, f"match {self._expr(params, 1)} % 4 {{")
            for literal in self.rng.sample((0, 1, 2, 3), self.rng.randint(1, 3)):
                self._emit(indent + 1, f"case {literal} {{")
                self._block(indent + 2, depth + 1, params, in_function)
                self._emit(indent + 1, "}")
            if self.rng.random() < 0.5:
                self._emit(indent + 1, "case _ {")
                self._block(indent + 2, depth + 1, params, in_function)
                self._emit(indent + 1, "}")
            self._emit(indent, "}")
        elif kind == "try":
            self._emit(indent, "try {")
            self._block(indent + 1, depth + 1, params, in_function)
            self._emit(indent + 1, f"if {cond}: raise")
            self._emit(indent, "} except {")
            self._block(indent + 1, depth + 1, params, in_function)
            self._emit(indent, "}")


def generate_program(seed: int) -> str:
    return ProgramGenerator(seed).generate()
