"""Recursive-descent parser for the Solidity subset.

Fails fast: the first syntax error raises :class:`ParseError` with what was
expected and what was found. Constructs outside the subset that can be
delimited safely (events, structs, modifiers definitions, assembly, emit, ...)
become :class:`~triview.frontend.ast.Raw` nodes.
"""

from __future__ import annotations

from typing import Optional

from . import ast as A
from .lexer import (
    ELEMENTARY_TYPES,
    IDENTIFIER,
    KEYWORD,
    NUMBER,
    STRING,
    Token,
    code_tokens,
    tokenize,
)

__all__ = ["ParseError", "parse", "parse_source", "join_tokens"]

ASSIGN_OPS = frozenset({"=", "+=", "-=", "*=", "/=", "%=", "|=", "&=", "^=", "<<=", ">>=", ">>>="})
UNITS = frozenset({"wei", "gwei", "ether", "seconds", "minutes", "hours", "days", "weeks"})
LOCATIONS = frozenset({"memory", "storage", "calldata"})
STATE_SPECIFIERS = frozenset({"public", "private", "internal", "constant", "immutable", "override"})
PARAM_SPECIFIERS = LOCATIONS | {"indexed", "payable"}
RAW_MEMBERS = frozenset({"modifier", "event", "struct", "enum", "using", "error"})
FUNCTION_KINDS = frozenset({"function", "constructor", "fallback", "receive"})

# binary precedence, loosest first; "**" is handled separately (right assoc)
BINARY_LEVELS: list[tuple[str, ...]] = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", ">", "<=", ">="),
    ("|",),
    ("^",),
    ("&",),
    ("<<", ">>"),
    ("+", "-"),
    ("*", "/", "%"),
]
PREFIX_OPS = frozenset({"!", "-", "~", "++", "--", "delete", "+"})


class ParseError(ValueError):
    def __init__(self, span: tuple[int, int], expected: str, found: str):
        super().__init__(f"expected {expected}, found {found!r} at offset {span[0]}")
        self.span = span
        self.expected = expected
        self.found = found


def join_tokens(texts: list[str]) -> str:
    """Canonical single-line rendering of a token sequence.

    Guaranteed to re-tokenize to exactly ``texts``.
    """
    out: list[str] = []
    prev = None
    for t in texts:
        if prev is not None and not _tight(prev, t):
            out.append(" ")
        out.append(t)
        prev = t
    joined = "".join(out)
    if [tok.text for tok in code_tokens(tokenize(joined))] != list(texts):
        return " ".join(texts)
    return joined


def _tight(prev: str, t: str) -> bool:
    if t in (",", ";", ")", "]", ".") or prev in ("(", "[", "."):
        return True
    return t in ("(", "[") and (prev[-1].isalnum() or prev[-1] in "_$)]")


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = code_tokens(tokens)
        self.pos = 0
        self.end_offset = self.toks[-1].span[1] if self.toks else 0

    # -- token helpers -------------------------------------------------------

    def peek(self, k: int = 0) -> Optional[Token]:
        i = self.pos + k
        return self.toks[i] if i < len(self.toks) else None

    def at(self, *texts: str) -> bool:
        t = self.peek()
        return t is not None and t.text in texts

    def advance(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def error(self, expected: str) -> ParseError:
        t = self.peek()
        if t is None:
            return ParseError((self.end_offset, self.end_offset), expected, "end of input")
        return ParseError(t.span, expected, t.text)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(repr(text))
        return self.advance()

    def expect_ident(self) -> Token:
        t = self.peek()
        if t is None or t.kind != IDENTIFIER:
            raise self.error("identifier")
        return self.advance()

    def start(self) -> int:
        t = self.peek()
        return t.span[0] if t is not None else self.end_offset

    def finish(self, node: A.Node, start: int) -> A.Node:
        end = self.toks[self.pos - 1].span[1] if self.pos > 0 else start
        node.span = (start, max(start, end))
        return node

    # -- top level -----------------------------------------------------------

    def source_unit(self) -> A.SourceUnit:
        units: list = []
        while self.peek() is not None:
            if self.at("pragma"):
                while not self.at(";"):
                    if self.peek() is None:
                        raise self.error("';'")
                    self.advance()
                self.advance()
            elif self.at("contract", "interface", "library", "abstract"):
                units.append(self.contract_def())
            else:
                units.append(self.raw_item())
        return self.finish(A.SourceUnit(units), 0)

    def raw_item(self, stop_at_brace: bool = True, until_catch: bool = False) -> A.Raw:
        """Consume one delimited construct: up to ';' or a closing top-level brace."""
        start = self.start()
        texts: list[str] = []
        depth = 0
        while True:
            t = self.peek()
            if t is None:
                raise self.error("';' or '}'")
            if t.text in ("(", "[", "{"):
                depth += 1
            elif t.text in (")", "]", "}"):
                if depth == 0:
                    raise self.error("';'")
                depth -= 1
            texts.append(self.advance().text)
            if depth == 0 and t.text == ";":
                break
            if depth == 0 and t.text == "}" and stop_at_brace:
                if until_catch and self.at("catch"):
                    continue
                break
        return self.finish(A.Raw(texts), start)

    def contract_def(self) -> A.ContractDef:
        start = self.start()
        kind = self.advance().text
        if kind == "abstract":
            self.expect("contract")
            kind = "abstract contract"
        name = self.expect_ident().text
        bases: list[str] = []
        if self.at("is"):
            self.advance()
            while True:
                bases.append(join_tokens(self.balanced_until(",", "{")))
                if self.at(","):
                    self.advance()
                    continue
                break
        self.expect("{")
        members: list = []
        while not self.at("}"):
            if self.peek() is None:
                raise self.error("'}'")
            members.append(self.member())
        self.expect("}")
        return self.finish(A.ContractDef(name, members, kind=kind, bases=bases), start)

    def balanced_until(self, *stops: str) -> list[str]:
        texts: list[str] = []
        depth = 0
        while True:
            t = self.peek()
            if t is None:
                raise self.error(" or ".join(repr(s) for s in stops))
            if depth == 0 and t.text in stops:
                if not texts:
                    raise self.error("identifier")
                return texts
            if t.text in ("(", "["):
                depth += 1
            elif t.text in (")", "]"):
                depth -= 1
            texts.append(self.advance().text)

    def member(self):
        t = self.peek()
        if t.text in FUNCTION_KINDS:
            return self.function_def()
        if t.text in RAW_MEMBERS:
            return self.raw_item()
        if t.text == "mapping" or t.text in ELEMENTARY_TYPES or t.kind == IDENTIFIER:
            return self.state_var()
        raise self.error("contract member")

    def state_var(self) -> A.VarDecl:
        start = self.start()
        type_name = self.type_name()
        specifiers = []
        while self.at(*STATE_SPECIFIERS):
            specifiers.append(self.advance().text)
        name = self.expect_ident().text
        init = None
        if self.at("="):
            self.advance()
            init = self.expression()
        self.expect(";")
        return self.finish(A.VarDecl(type_name, name, init, specifiers), start)

    def function_def(self) -> A.FunctionDef:
        start = self.start()
        kind = self.advance().text
        name = None
        if kind == "function":
            t = self.peek()
            if t is not None and (t.kind == IDENTIFIER or t.text in ("receive", "fallback")):
                name = self.advance().text
        params = self.param_list()
        modifiers: list[str] = []
        while not self.at("{", ";", "returns"):
            t = self.peek()
            if t is None or t.kind not in (IDENTIFIER, KEYWORD):
                raise self.error("function modifier, '{' or ';'")
            texts = [self.advance().text]
            if self.at("("):
                texts += self.balanced_group()
            modifiers.append(join_tokens(texts))
        returns = None
        if self.at("returns"):
            self.advance()
            returns = self.param_list()
        if self.at(";"):
            self.advance()
            body = None
        else:
            body = self.block()
        return self.finish(A.FunctionDef(kind, name, params, modifiers, returns, body), start)

    def balanced_group(self) -> list[str]:
        texts = [self.expect("(").text]
        depth = 1
        while depth:
            t = self.peek()
            if t is None:
                raise self.error("')'")
            if t.text == "(":
                depth += 1
            elif t.text == ")":
                depth -= 1
            texts.append(self.advance().text)
        return texts

    def param_list(self) -> list[A.VarDecl]:
        self.expect("(")
        params: list[A.VarDecl] = []
        if self.at(")"):
            self.advance()
            return params
        while True:
            start = self.start()
            type_name = self.type_name()
            specifiers = []
            while self.at(*PARAM_SPECIFIERS):
                specifiers.append(self.advance().text)
            name = None
            t = self.peek()
            if t is not None and t.kind == IDENTIFIER:
                name = self.advance().text
            params.append(self.finish(A.VarDecl(type_name, name, None, specifiers), start))
            if self.at(","):
                self.advance()
                continue
            self.expect(")")
            return params

    # -- types -----------------------------------------------------------------

    def type_name(self) -> A.TypeName:
        start = self.start()
        t = self.peek()
        if t is None:
            raise self.error("type name")
        if t.text == "mapping":
            self.advance()
            self.expect("(")
            key = self.type_name()
            self.expect("=>")
            value = self.type_name()
            self.expect(")")
            node: A.TypeName = self.finish(A.Mapping(key, value), start)
        elif t.text in ELEMENTARY_TYPES:
            self.advance()
            name = t.text
            if name == "address" and self.at("payable"):
                self.advance()
                name = "address payable"
            node = self.finish(A.ElementaryType(name), start)
        elif t.kind == IDENTIFIER:
            parts = [self.advance().text]
            while self.at(".") and self.peek(1) is not None and self.peek(1).kind == IDENTIFIER:
                self.advance()
                parts.append(self.advance().text)
            node = self.finish(A.UserType(".".join(parts)), start)
        else:
            raise self.error("type name")
        while self.at("["):
            self.advance()
            length = None
            if not self.at("]"):
                length = self.expression()
            self.expect("]")
            node = self.finish(A.ArrayType(node, length), start)
        return node

    # -- statements --------------------------------------------------------------

    def block(self) -> A.Block:
        start = self.start()
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.peek() is None:
                raise self.error("'}'")
            stmts.append(self.statement())
        self.expect("}")
        return self.finish(A.Block(stmts), start)

    def statement(self):
        t = self.peek()
        start = self.start()
        text = t.text
        if text == "{":
            return self.block()
        if text == "if":
            self.advance()
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            then = self.statement()
            orelse = None
            if self.at("else"):
                self.advance()
                orelse = self.statement()
            return self.finish(A.If(cond, then, orelse), start)
        if text == "for":
            self.advance()
            self.expect("(")
            init = None
            if self.at(";"):
                self.advance()
            else:
                init = self.simple_statement()
            cond = None if self.at(";") else self.expression()
            self.expect(";")
            update = None
            if not self.at(")"):
                ustart = self.start()
                update = self.finish(self.expression_or_assign(), ustart)
            self.expect(")")
            body = self.statement()
            return self.finish(A.For(init, cond, update, body), start)
        if text == "while":
            self.advance()
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            body = self.statement()
            return self.finish(A.While(cond, body), start)
        if text == "return":
            self.advance()
            value = None if self.at(";") else self.expression()
            self.expect(";")
            return self.finish(A.Return(value), start)
        if text == "require" and self.peek(1) is not None and self.peek(1).text == "(":
            self.advance()
            self.expect("(")
            args = self.arguments()
            self.expect(";")
            return self.finish(A.Require(args), start)
        if text in ("assembly", "unchecked"):
            return self.raw_item()
        if text == "try":
            return self.raw_item(until_catch=True)
        if text == "do":
            return self.raw_item(stop_at_brace=False)
        if text in ("emit", "break", "continue", "throw", "revert"):
            return self.raw_item(stop_at_brace=False)
        if text == "(" and self.is_tuple_decl():
            return self.raw_item(stop_at_brace=False)
        return self.simple_statement()

    def is_tuple_decl(self) -> bool:
        """Lookahead for ``(T a, , T b) = ...``; never consumes tokens."""
        saved = self.pos
        try:
            self.advance()
            typed = False
            while True:
                if not self.at(",", ")"):
                    self.type_name()
                    while self.at(*LOCATIONS):
                        self.advance()
                    self.expect_ident()
                    typed = True
                if self.at(","):
                    self.advance()
                    continue
                self.expect(")")
                return typed and self.at("=")
        except ParseError:
            return False
        finally:
            self.pos = saved

    def simple_statement(self):
        start = self.start()
        decl = self.try_local_decl()
        if decl is not None:
            type_name, specifiers, name = decl
            init = None
            if self.at("="):
                self.advance()
                init = self.expression()
            self.expect(";")
            return self.finish(A.VarDecl(type_name, name, init, specifiers), start)
        node = self.expression_or_assign()
        self.expect(";")
        return self.finish(node, start)

    def try_local_decl(self):
        """Parse ``type [location] name`` if it is there, else rewind and return None."""
        saved = self.pos
        try:
            type_name = self.type_name()
            specifiers = []
            while self.at(*LOCATIONS):
                specifiers.append(self.advance().text)
            t = self.peek()
            if t is None or t.kind != IDENTIFIER:
                raise self.error("identifier")
            nxt = self.peek(1)
            if nxt is None or nxt.text not in ("=", ";"):
                raise self.error("'=' or ';'")
            self.advance()
            return type_name, specifiers, t.text
        except ParseError:
            self.pos = saved
            return None

    def expression_or_assign(self):
        start = self.start()
        expr = self.expression()
        t = self.peek()
        if t is not None and t.text in ASSIGN_OPS:
            op = self.advance().text
            value = self.expression()
            return self.finish(A.Assign(expr, op, value), start)
        return self.finish(A.ExprStmt(expr), start)

    # -- expressions -------------------------------------------------------------

    def arguments(self) -> list:
        """Comma-separated expressions up to and including ')'."""
        args = []
        if self.at(")"):
            self.advance()
            return args
        while True:
            args.append(self.expression())
            if self.at(","):
                self.advance()
                continue
            self.expect(")")
            return args

    def expression(self):
        start = self.start()
        cond = self.binary(0)
        if self.at("?"):
            self.advance()
            a = self.expression()
            self.expect(":")
            b = self.expression()
            return self.finish(A.Conditional(cond, a, b), start)
        return cond

    def binary(self, level: int):
        if level == len(BINARY_LEVELS):
            return self.power()
        start = self.start()
        left = self.binary(level + 1)
        ops = BINARY_LEVELS[level]
        while self.at(*ops):
            op = self.advance().text
            right = self.binary(level + 1)
            left = self.finish(A.Binary(op, left, right), start)
        return left

    def power(self):
        start = self.start()
        base = self.unary()
        if self.at("**"):
            self.advance()
            exponent = self.power()
            return self.finish(A.Binary("**", base, exponent), start)
        return base

    def unary(self):
        start = self.start()
        if self.at(*PREFIX_OPS):
            op = self.advance().text
            operand = self.unary()
            return self.finish(A.Unary(op, operand, True), start)
        return self.postfix()

    def postfix(self):
        start = self.start()
        expr = self.primary()
        while True:
            if self.at("."):
                self.advance()
                t = self.peek()
                if t is None or t.kind not in (IDENTIFIER, KEYWORD):
                    raise self.error("member name")
                expr = self.finish(A.Member(expr, self.advance().text), start)
            elif self.at("["):
                self.advance()
                index = None if self.at("]") else self.expression()
                self.expect("]")
                expr = self.finish(A.Index(expr, index), start)
            elif self.at("("):
                self.advance()
                expr = self.finish(A.Call(expr, self.arguments()), start)
            elif (
                self.at("{")
                and self.peek(1) is not None
                and self.peek(1).kind == IDENTIFIER
                and self.peek(2) is not None
                and self.peek(2).text == ":"
            ):
                options = self.call_options()
                self.expect("(")
                expr = self.finish(A.Call(expr, self.arguments(), options), start)
            elif self.at("++", "--"):
                expr = self.finish(A.Unary(self.advance().text, expr, False), start)
            else:
                return expr

    def call_options(self) -> list[A.CallOption]:
        self.expect("{")
        options = []
        while True:
            start = self.start()
            name = self.expect_ident().text
            self.expect(":")
            value = self.expression()
            options.append(self.finish(A.CallOption(name, value), start))
            if self.at(","):
                self.advance()
                continue
            self.expect("}")
            return options

    def primary(self):
        start = self.start()
        t = self.peek()
        if t is None:
            raise self.error("expression")
        if t.kind == NUMBER:
            self.advance()
            unit = None
            if self.at(*UNITS):
                unit = self.advance().text
            return self.finish(A.Literal("number", t.text, unit), start)
        if t.kind == STRING:
            self.advance()
            return self.finish(A.Literal("string", t.text), start)
        if t.text in ("true", "false"):
            self.advance()
            return self.finish(A.Literal("bool", t.text), start)
        if t.kind == IDENTIFIER or t.text == "type":
            self.advance()
            return self.finish(A.Identifier(t.text), start)
        if t.text in ELEMENTARY_TYPES or t.text == "payable":
            self.advance()
            return self.finish(A.ElementaryType(t.text), start)
        if t.text == "new":
            self.advance()
            return self.finish(A.New(self.type_name()), start)
        if t.text == "(":
            self.advance()
            items: list = []
            if self.at(")"):
                self.advance()
                return self.finish(A.Tuple(items), start)
            while True:
                items.append(None if self.at(",", ")") else self.expression())
                if self.at(","):
                    self.advance()
                    continue
                self.expect(")")
                break
            if len(items) == 1 and items[0] is not None:
                return items[0]
            return self.finish(A.Tuple(items), start)
        raise self.error("expression")


def parse(tokens: list[Token]) -> A.SourceUnit:
    """Parse a token stream (as produced by :func:`tokenize`) into an AST."""
    return _Parser(tokens).source_unit()


def parse_source(source: str) -> A.SourceUnit:
    return parse(tokenize(source))
