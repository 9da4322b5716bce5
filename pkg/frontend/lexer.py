"""
Tokenizer for Mini source text.
"""
import re
from dataclasses import dataclass

from models.errors import ParseError

KEYWORDS = frozenset({
    "if", "elif", "else", "while", "for", "in", "match", "case", "def", "return",
    "try", "except", "raise", "pass", "and", "or", "not", "True", "False", "None",
})

# Longest operators first so `//` wins over `/` and `==` over `=`.
OPERATORS = ("//", "==", "!=", "<=", ">=", "+", "-", "*", "/", "%", "<", ">", "=",
             "(", ")", "{", "}", ",", ":", ";")

_TOKEN_RE = re.compile(
    r"""
    (?P<SPACE>[ \t\f]+)
  | (?P<COMMENT>\#[^\r\n]*)
  | (?P<NEWLINE>\r\n|\r|\n)
  | (?P<FLOAT>\d+\.\d*(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+|\.\d+(?:[eE][+-]?\d+)?)
  | (?P<INT>\d+)
  | (?P<NAME>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<STRING>"(?:[^"\\\r\n]|\\.)*"|'(?:[^'\\\r\n]|\\.)*')
  | (?P<OP>""" + "|".join(re.escape(op) for op in OPERATORS) + r""")
    """,
    re.VERBOSE,
)

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "\\": "\\", '"': '"', "'": "'", "0": "\0"}


@dataclass(frozen=True)
class Token:
    type: str
    value: object
    line: int
    column: int

    def is_op(self, op: str) -> bool:
        return self.type == "OP" and self.value == op

    def is_keyword(self, word: str) -> bool:
        return self.type == "KEYWORD" and self.value == word


def _unescape(body: str, line: int, column: int, file: str) -> str:
    out = []
    chars = iter(body)
    for ch in chars:
        if ch != "\\":
            out.append(ch)
            continue
        nxt = next(chars, "")
        if nxt not in _ESCAPES:
            raise ParseError(f"unknown escape \\{nxt}", line, column, file)
        out.append(_ESCAPES[nxt])
    return "".join(out)


def tokenize(source: str, file: str = "<string>") -> list[Token]:
    """Split source into tokens; newlines inside parentheses are dropped."""
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    paren_depth = 0
    while pos < len(source):
        match = _TOKEN_RE.match(source, pos)
        column = pos - line_start + 1
        if match is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, column, file)
        kind = match.lastgroup
        text = match.group()
        pos = match.end()
        if kind in ("SPACE", "COMMENT"):
            continue
        if kind == "NEWLINE":
            if paren_depth == 0:
                tokens.append(Token("NEWLINE", "\n", line, column))
            line += 1
            line_start = pos
            continue
        if kind == "INT":
            tokens.append(Token("INT", int(text), line, column))
        elif kind == "FLOAT":
            tokens.append(Token("FLOAT", float(text), line, column))
        elif kind == "STRING":
            tokens.append(Token("STRING", _unescape(text[1:-1], line, column, file), line, column))
        elif kind == "NAME":
            tokens.append(Token("KEYWORD" if text in KEYWORDS else "NAME", text, line, column))
        else:
            if text == "(":
                paren_depth += 1
            elif text == ")":
                paren_depth = max(0, paren_depth - 1)
            tokens.append(Token("OP", text, line, column))
    tokens.append(Token("EOF", None, line, pos - line_start + 1))
    return tokens
