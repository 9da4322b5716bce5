"""
Recursive-descent parser producing a line-annotated AST.

`elif` chains are desugared here: an `elif` becomes an If nested as the sole
statement of its predecessor's else arm, keeping the `elif` line as its own.
"""
from typing import Optional

from models.errors import ParseError

from .ast_nodes import AstNode, NodeKind, SourcePosition
from .lexer import Token, tokenize

MAX_NESTING = 64
RESERVED_NAME = "_branch"
BUILTIN_NAMES = frozenset({"print", "load", "range"})

COMPARE_OPS = ("<", "<=", "==", "!=", ">", ">=")
ADDITIVE_OPS = ("+", "-")
MULTIPLICATIVE_OPS = ("*", "/", "//", "%")


class Parser:
    """Parses one Mini source file."""

    def __init__(self, source: str, file: str = "<string>"):
        self.file = file
        self.tokens = tokenize(source, file)
        self.index = 0
        self.depth = 0
        self.expr_depth = 0
        self.function_depth = 0

    # -- token helpers -------------------------------------------------

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def _peek_past_newlines(self) -> Token:
        i = self.index
        while self.tokens[i].type == "NEWLINE":
            i += 1
        return self.tokens[i]

    def _advance(self) -> Token:
        tok = self.tokens[self.index]
        if tok.type != "EOF":
            self.index += 1
        return tok

    def _error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.current
        return ParseError(message, tok.line, tok.column, self.file)

    def _expect_op(self, op: str) -> Token:
        if not self.current.is_op(op):
            raise self._error(f"expected '{op}', found {self._describe(self.current)}")
        return self._advance()

    def _expect_keyword(self, word: str) -> Token:
        if not self.current.is_keyword(word):
            raise self._error(f"expected '{word}', found {self._describe(self.current)}")
        return self._advance()

    def _expect_name(self) -> Token:
        tok = self.current
        if tok.type != "NAME":
            raise self._error(f"expected identifier, found {self._describe(tok)}")
        self._check_name(tok)
        return self._advance()

    def _check_name(self, tok: Token) -> None:
        if tok.value == RESERVED_NAME:
            raise self._error(f"'{RESERVED_NAME}' is reserved", tok)

    @staticmethod
    def _describe(tok: Token) -> str:
        if tok.type == "EOF":
            return "end of file"
        if tok.type == "NEWLINE":
            return "end of line"
        return repr(tok.value)

    def _skip_separators(self) -> None:
        while self.current.type == "NEWLINE" or self.current.is_op(";"):
            self._advance()

    def _pos(self, tok: Token) -> SourcePosition:
        return SourcePosition(self.file, tok.line)

    def _enter(self, tok: Token) -> None:
        self.depth += 1
        if self.depth > MAX_NESTING:
            raise self._error(f"nesting deeper than {MAX_NESTING} levels", tok)

    def _leave(self) -> None:
        self.depth -= 1

    def _enter_expr(self, tok: Token) -> None:
        self.expr_depth += 1
        if self.expr_depth > MAX_NESTING:
            raise self._error(f"expression nesting deeper than {MAX_NESTING} levels", tok)

    def _leave_expr(self) -> None:
        self.expr_depth -= 1

    # -- statements ----------------------------------------------------

    def parse_module(self) -> AstNode:
        first = self.current
        body = self._statements(until_brace=False)
        if self.current.type != "EOF":
            raise self._error(f"unexpected {self._describe(self.current)}")
        line = first.line if first.type != "EOF" else 1
        return AstNode(NodeKind.MODULE, SourcePosition(self.file, line), body=body)

    def _statements(self, until_brace: bool) -> list[AstNode]:
        stmts: list[AstNode] = []
        while True:
            self._skip_separators()
            tok = self.current
            if tok.type == "EOF":
                if until_brace:
                    raise self._error("expected '}', found end of file")
                return stmts
            if tok.is_op("}"):
                if not until_brace:
                    raise self._error("unmatched '}'")
                return stmts
            stmts.append(self._statement())

    def _block(self) -> list[AstNode]:
        open_tok = self._expect_op("{")
        self._enter(open_tok)
        body = self._statements(until_brace=True)
        self._expect_op("}")
        self._leave()
        return body

    def _statement(self) -> AstNode:
        tok = self.current
        if tok.type == "KEYWORD":
            handler = {
                "if": self._if,
                "while": self._while,
                "for": self._for,
                "match": self._match,
                "def": self._def,
                "try": self._try,
            }.get(tok.value)
            if handler is not None:
                return handler()
            if tok.value in ("elif", "else", "except", "case"):
                raise self._error(f"'{tok.value}' without a matching statement")
        stmt = self._simple_statement()
        self._end_simple()
        return stmt

    def _end_simple(self) -> None:
        tok = self.current
        if tok.type in ("NEWLINE", "EOF") or tok.is_op(";") or tok.is_op("}"):
            return
        raise self._error(f"expected end of statement, found {self._describe(tok)}")

    def _simple_statement(self) -> AstNode:
        tok = self.current
        if tok.is_keyword("return"):
            self._advance()
            if self.function_depth == 0:
                raise self._error("'return' outside function", tok)
            value = []
            if not (self.current.type in ("NEWLINE", "EOF") or self.current.is_op(";") or self.current.is_op("}")):
                value = [self._expression()]
            return AstNode(NodeKind.RETURN, self._pos(tok), children=value)
        if tok.is_keyword("raise"):
            self._advance()
            return AstNode(NodeKind.RAISE, self._pos(tok))
        if tok.is_keyword("pass"):
            self._advance()
            return AstNode(NodeKind.PASS, self._pos(tok))
        if tok.type == "NAME" and self.tokens[self.index + 1].is_op("="):
            self._check_name(tok)
            if tok.value in BUILTIN_NAMES:
                raise self._error(f"cannot assign to builtin '{tok.value}'", tok)
            self._advance()
            self._advance()
            value = self._expression()
            return AstNode(NodeKind.ASSIGN, self._pos(tok), value=tok.value, children=[value])
        if tok.type == "KEYWORD" and tok.value not in ("not", "True", "False", "None"):
            raise self._error(f"unexpected keyword '{tok.value}'")
        expr = self._expression()
        return AstNode(NodeKind.EXPR_STMT, self._pos(tok), children=[expr])

    def _else_follows(self, word: str) -> bool:
        if self._peek_past_newlines().is_keyword(word):
            self._skip_newlines()
            return True
        return False

    def _skip_newlines(self) -> None:
        while self.current.type == "NEWLINE":
            self._advance()

    def _if(self) -> AstNode:
        tok = self._advance()
        test = self._expression()
        if self.current.is_op(":"):
            self._advance()
            body = [self._simple_statement()]
            self._end_simple()
            return AstNode(NodeKind.IF, self._pos(tok), children=[test], body=body, orelse=[])
        body = self._block()
        orelse: list[AstNode] = []
        if self._else_follows("elif"):
            orelse = [self._if()]
        elif self._else_follows("else"):
            self._advance()
            orelse = self._block()
        return AstNode(NodeKind.IF, self._pos(tok), children=[test], body=body, orelse=orelse)

    def _while(self) -> AstNode:
        tok = self._advance()
        test = self._expression()
        body = self._block()
        orelse: list[AstNode] = []
        if self._else_follows("else"):
            self._advance()
            orelse = self._block()
        return AstNode(NodeKind.WHILE, self._pos(tok), children=[test], body=body, orelse=orelse)

    def _for(self) -> AstNode:
        tok = self._advance()
        target = self._expect_name()
        if target.value in BUILTIN_NAMES:
            raise self._error(f"cannot assign to builtin '{target.value}'", target)
        self._expect_keyword("in")
        range_tok = self.current
        if not (range_tok.type == "NAME" and range_tok.value == "range"):
            raise self._error("for loops iterate over range(...) only")
        self._advance()
        self._expect_op("(")
        count = self._expression()
        self._expect_op(")")
        body = self._block()
        orelse: list[AstNode] = []
        if self._else_follows("else"):
            self._advance()
            orelse = self._block()
        return AstNode(
            NodeKind.FOR_RANGE, self._pos(tok), value=target.value,
            children=[count], body=body, orelse=orelse,
        )

    def _match(self) -> AstNode:
        tok = self._advance()
        subject = self._expression()
        open_tok = self._expect_op("{")
        self._enter(open_tok)
        cases: list[AstNode] = []
        while True:
            self._skip_separators()
            if self.current.is_op("}"):
                break
            case_tok = self._expect_keyword("case")
            if cases and cases[-1].is_wildcard:
                raise self._error("'case _' must be the last case", case_tok)
            literal = self._case_pattern()
            body = self._block()
            cases.append(AstNode(
                NodeKind.CASE, self._pos(case_tok),
                children=[] if literal is None else [literal], body=body,
            ))
        self._expect_op("}")
        self._leave()
        if not cases:
            raise self._error("match needs at least one case", tok)
        return AstNode(NodeKind.MATCH, self._pos(tok), children=[subject], body=cases)

    def _case_pattern(self) -> Optional[AstNode]:
        tok = self.current
        if tok.type == "NAME" and tok.value == "_":
            self._advance()
            return None
        negative = False
        if tok.is_op("-"):
            negative = True
            self._advance()
        lit = self.current
        if lit.type in ("INT", "FLOAT"):
            self._advance()
            return AstNode(NodeKind.CONST, self._pos(tok), value=-lit.value if negative else lit.value)
        if negative:
            raise self._error("expected a number after '-'", lit)
        if lit.type == "STRING":
            self._advance()
            return AstNode(NodeKind.CONST, self._pos(lit), value=lit.value)
        if lit.type == "KEYWORD" and lit.value in ("True", "False", "None"):
            self._advance()
            return AstNode(NodeKind.CONST, self._pos(lit), value={"True": True, "False": False, "None": None}[lit.value])
        raise self._error(f"case patterns are literals or '_', found {self._describe(lit)}")

    def _def(self) -> AstNode:
        tok = self._advance()
        name = self._expect_name()
        if name.value in BUILTIN_NAMES:
            raise self._error(f"cannot redefine builtin '{name.value}'", name)
        self._expect_op("(")
        params: list[str] = []
        if not self.current.is_op(")"):
            while True:
                param = self._expect_name()
                if param.value in params:
                    raise self._error(f"duplicate parameter '{param.value}'", param)
                if param.value in BUILTIN_NAMES:
                    raise self._error(f"cannot use builtin '{param.value}' as parameter", param)
                params.append(param.value)
                if not self.current.is_op(","):
                    break
                self._advance()
        self._expect_op(")")
        self.function_depth += 1
        body = self._block()
        self.function_depth -= 1
        return AstNode(NodeKind.FUNCTION_DEF, self._pos(tok), value=(name.value, tuple(params)), body=body)

    def _try(self) -> AstNode:
        tok = self._advance()
        body = self._block()
        self._skip_newlines()
        except_tok = self._expect_keyword("except")
        handler = AstNode(NodeKind.EXCEPT, self._pos(except_tok), body=self._block())
        return AstNode(NodeKind.TRY, self._pos(tok), body=body, orelse=[handler])

    # -- expressions ---------------------------------------------------

    def _expression(self) -> AstNode:
        tok = self.current
        self._enter_expr(tok)
        node = self._or()
        self._leave_expr()
        return node

    def _or(self) -> AstNode:
        left = self._and()
        while self.current.is_keyword("or"):
            self._advance()
            left = AstNode(NodeKind.BOOL_OP, left.pos, value="or", children=[left, self._and()])
        return left

    def _and(self) -> AstNode:
        left = self._not()
        while self.current.is_keyword("and"):
            self._advance()
            left = AstNode(NodeKind.BOOL_OP, left.pos, value="and", children=[left, self._not()])
        return left

    def _not(self) -> AstNode:
        tok = self.current
        if tok.is_keyword("not"):
            self._advance()
            self._enter_expr(tok)
            operand = self._not()
            self._leave_expr()
            return AstNode(NodeKind.UNARY, self._pos(tok), value="not", children=[operand])
        return self._comparison()

    def _comparison(self) -> AstNode:
        left = self._arith()
        tok = self.current
        if tok.type == "OP" and tok.value in COMPARE_OPS:
            self._advance()
            right = self._arith()
            nxt = self.current
            if nxt.type == "OP" and nxt.value in COMPARE_OPS:
                raise self._error("chained comparisons are not supported", nxt)
            return AstNode(NodeKind.COMPARE, left.pos, value=tok.value, children=[left, right])
        return left

    def _arith(self) -> AstNode:
        left = self._term()
        while self.current.type == "OP" and self.current.value in ADDITIVE_OPS:
            op = self._advance().value
            left = AstNode(NodeKind.BINARY, left.pos, value=op, children=[left, self._term()])
        return left

    def _term(self) -> AstNode:
        left = self._unary()
        while self.current.type == "OP" and self.current.value in MULTIPLICATIVE_OPS:
            op = self._advance().value
            left = AstNode(NodeKind.BINARY, left.pos, value=op, children=[left, self._unary()])
        return left

    def _unary(self) -> AstNode:
        tok = self.current
        if tok.is_op("-"):
            self._advance()
            self._enter_expr(tok)
            operand = self._unary()
            self._leave_expr()
            return AstNode(NodeKind.UNARY, self._pos(tok), value="-", children=[operand])
        return self._primary()

    def _primary(self) -> AstNode:
        tok = self.current
        if tok.type == "NAME":
            self._check_name(tok)
            self._advance()
            if tok.value == "range":
                raise self._error("range(...) is only allowed in a for header", tok)
            name = AstNode(NodeKind.NAME, self._pos(tok), value=tok.value)
            if self.current.is_op("("):
                return self._call(name)
            if tok.value in BUILTIN_NAMES:
                raise self._error(f"builtin '{tok.value}' must be called", tok)
            return name
        if tok.type in ("INT", "FLOAT", "STRING"):
            self._advance()
            return AstNode(NodeKind.CONST, self._pos(tok), value=tok.value)
        if tok.type == "KEYWORD" and tok.value in ("True", "False", "None"):
            self._advance()
            value = {"True": True, "False": False, "None": None}[tok.value]
            return AstNode(NodeKind.CONST, self._pos(tok), value=value)
        if tok.is_op("("):
            return self._parenthesized()
        raise self._error(f"expected expression, found {self._describe(tok)}")

    def _call(self, callee: AstNode) -> AstNode:
        open_tok = self._expect_op("(")
        args: list[AstNode] = []
        if not self.current.is_op(")"):
            while True:
                args.append(self._expression())
                if not self.current.is_op(","):
                    break
                self._advance()
        self._expect_op(")")
        if callee.value in ("print", "load") and len(args) != 1:
            raise self._error(f"{callee.value}() takes exactly one argument", open_tok)
        return AstNode(NodeKind.CALL, callee.pos, children=[callee, *args])

    def _parenthesized(self) -> AstNode:
        open_tok = self._advance()
        if self.current.is_op(")"):
            self._advance()
            return AstNode(NodeKind.TUPLE, self._pos(open_tok))
        first = self._expression()
        if not self.current.is_op(","):
            self._expect_op(")")
            return first
        items = [first]
        while self.current.is_op(","):
            self._advance()
            if self.current.is_op(")"):
                break
            items.append(self._expression())
        self._expect_op(")")
        return AstNode(NodeKind.TUPLE, self._pos(open_tok), children=items)


def parse(source: str, file: str = "<string>") -> AstNode:
    """Parse Mini source text into a Module node."""
    return Parser(source, file).parse_module()
