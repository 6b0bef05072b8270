"""Lexer, parser and pretty-printer for a Solidity subset."""

from . import ast
from .emitter import emit
from .lexer import LexError, Token, code_tokens, tokenize
from .parser import ParseError, parse, parse_source
from .scope import Bindings, resolve

__all__ = [
    "ast", "emit", "LexError", "Token", "code_tokens", "tokenize",
    "ParseError", "parse", "parse_source", "Bindings", "resolve",
]
