"""Tokenizer for the supported Solidity subset.

Whitespace is not tokenized; every token carries the ``(start, end)`` character
offsets of its text, so the original source can be rebuilt from the tokens
plus the gaps between them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

__all__ = ["Token", "LexError", "KEYWORDS", "ELEMENTARY_TYPES", "tokenize", "code_tokens"]

KEYWORD = "keyword"
IDENTIFIER = "identifier"
NUMBER = "number-literal"
STRING = "string-literal"
PUNCT = "punctuation"
COMMENT = "comment"


def _sized(prefix: str, sizes) -> set[str]:
    return {prefix} | {f"{prefix}{n}" for n in sizes}


ELEMENTARY_TYPES = frozenset(
    _sized("uint", range(8, 257, 8))
    | _sized("int", range(8, 257, 8))
    | {f"bytes{n}" for n in range(1, 33)}
    | {"bytes", "address", "bool", "string", "byte"}
)

KEYWORDS = frozenset(
    {
        "pragma", "import", "contract", "interface", "library", "abstract", "is",
        "function", "constructor", "fallback", "receive", "modifier", "event",
        "struct", "enum", "using", "mapping", "returns", "return", "if", "else",
        "for", "while", "do", "break", "continue", "require", "emit", "new",
        "delete", "true", "false", "public", "private", "internal", "external",
        "view", "pure", "payable", "constant", "immutable", "memory", "storage",
        "calldata", "virtual", "override", "assembly", "unchecked", "try",
        "catch", "throw", "revert", "indexed", "anonymous", "error", "type",
        "wei", "gwei", "ether", "seconds", "minutes", "hours", "days", "weeks",
    }
    | ELEMENTARY_TYPES
)

# longest first so that e.g. ">>=" wins over ">>" and ">"
_PUNCTUATION = sorted(
    [
        ">>>=", ">>=", "<<=", "**=", "...",
        "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=",
        "%=", "|=", "&=", "^=", "=>", "**", "<<", ">>", "->",
        "+", "-", "*", "/", "%", "=", "<", ">", "!", "~", "&", "|", "^", "?",
        ":", ";", ",", ".", "(", ")", "[", "]", "{", "}",
    ],
    key=len,
    reverse=True,
)

_IDENT_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")
_NUMBER_RE = re.compile(r"0[xX][0-9a-fA-F_]+|(?:[0-9][0-9_]*)?(?:\.[0-9_]+)?(?:[eE]-?[0-9]+)?")
_SPACE = " \t\r\n\f\v"


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: tuple[int, int]

    def __repr__(self) -> str:
        return f"Token({self.kind} {self.text!r} @{self.span[0]}:{self.span[1]})"


class LexError(ValueError):
    def __init__(self, message: str, span: tuple[int, int]):
        super().__init__(f"{message} at offset {span[0]}")
        self.span = span


def tokenize(source: str) -> list[Token]:
    """Split ``source`` into tokens. Comments are kept as ``comment`` tokens."""
    tokens: list[Token] = []
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch in _SPACE:
            i += 1
            continue
        start = i
        if source.startswith("//", i):
            end = source.find("\n", i)
            i = n if end < 0 else end
            tokens.append(Token(COMMENT, source[start:i], (start, i)))
            continue
        if source.startswith("/*", i):
            end = source.find("*/", i + 2)
            if end < 0:
                raise LexError("unterminated block comment", (start, n))
            i = end + 2
            tokens.append(Token(COMMENT, source[start:i], (start, i)))
            continue
        if ch in "\"'":
            i = _scan_string(source, i)
            tokens.append(Token(STRING, source[start:i], (start, i)))
            continue
        if ch.isascii() and (ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit())):
            m = _NUMBER_RE.match(source, i)
            i = m.end()
            if i < n and _IDENT_RE.match(source, i) and not source[i].isdigit():
                raise LexError(f"malformed number literal {source[start:i + 1]!r}", (start, i + 1))
            tokens.append(Token(NUMBER, source[start:i], (start, i)))
            continue
        m = _IDENT_RE.match(source, i)
        if m:
            word = m.group()
            # hex"..." and unicode"..." string prefixes
            if word in ("hex", "unicode") and m.end() < n and source[m.end()] in "\"'":
                i = _scan_string(source, m.end())
                tokens.append(Token(STRING, source[start:i], (start, i)))
                continue
            i = m.end()
            tokens.append(Token(KEYWORD if word in KEYWORDS else IDENTIFIER, word, (start, i)))
            continue
        for p in _PUNCTUATION:
            if source.startswith(p, i):
                i += len(p)
                tokens.append(Token(PUNCT, p, (start, i)))
                break
        else:
            raise LexError(f"illegal character {ch!r}", (start, start + 1))
    return tokens


def _scan_string(source: str, i: int) -> int:
    quote = source[i]
    start = i
    i += 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\\":
            i += 2
            continue
        if ch == quote:
            return i + 1
        if ch == "\n":
            break
        i += 1
    raise LexError("unterminated string literal", (start, min(i, n)))


def code_tokens(tokens: list[Token]) -> list[Token]:
    return [t for t in tokens if t.kind != COMMENT]
