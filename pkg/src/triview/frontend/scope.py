"""Lexical name resolution.

Every :class:`Identifier` is bound to the :class:`VarDecl` it refers to, or
marked external (builtins such as ``msg``, function and contract names,
anything declared outside the file). Scoping follows block rules: state
variables are visible in the whole contract, parameters in the whole
function, locals from their declaration to the end of the enclosing block.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import ast as A
from .lexer import IDENTIFIER, tokenize


@dataclass
class Bindings:
    refs: dict[int, Optional[A.VarDecl]] = field(default_factory=dict)
    decls: list[A.VarDecl] = field(default_factory=list)
    role: dict[int, str] = field(default_factory=dict)  # id(decl) -> state|param|return|local|loop
    owner: dict[int, Optional[A.FunctionDef]] = field(default_factory=dict)
    identifiers: list[A.Identifier] = field(default_factory=list)
    opaque_names: set[str] = field(default_factory=set)
    raw_names: set[str] = field(default_factory=set)  # identifiers inside raw text only

    def lookup(self, ident: A.Identifier) -> Optional[A.VarDecl]:
        return self.refs.get(id(ident))

    def is_external(self, ident: A.Identifier) -> bool:
        return self.refs.get(id(ident)) is None

    def uses(self, decl: A.VarDecl) -> list[A.Identifier]:
        return [i for i in self.identifiers if self.refs.get(id(i)) is decl]


def _identifier_texts(texts: list[str]) -> set[str]:
    names = set()
    for text in texts:
        for tok in tokenize(text):
            if tok.kind == IDENTIFIER:
                names.add(tok.text)
    return names


class _Resolver:
    def __init__(self) -> None:
        self.b = Bindings()
        self.scopes: list[dict[str, A.VarDecl]] = []
        self.function: Optional[A.FunctionDef] = None

    def raw(self, texts: list[str]) -> None:
        names = _identifier_texts(texts)
        self.b.raw_names |= names
        self.b.opaque_names |= names

    def declare(self, decl: A.VarDecl, role: str) -> None:
        self.b.role[id(decl)] = role
        self.b.owner[id(decl)] = self.function
        self.type_names(decl.type_name)
        if decl.name is None:
            return
        self.b.decls.append(decl)
        self.scopes[-1][decl.name] = decl

    def type_names(self, t) -> None:
        for n in t.walk():
            if isinstance(n, A.UserType):
                self.b.opaque_names.update(n.name.split("."))
            elif isinstance(n, A.ArrayType) and n.length is not None:
                self.expr(n.length)

    def expr(self, e) -> None:
        if e is None:
            return
        for n in e.walk():
            if isinstance(n, A.Identifier):
                decl = None
                for scope in reversed(self.scopes):
                    if n.name in scope:
                        decl = scope[n.name]
                        break
                self.b.refs[id(n)] = decl
                self.b.identifiers.append(n)
                if decl is None:
                    self.b.opaque_names.add(n.name)
            elif isinstance(n, A.Member):
                self.b.opaque_names.add(n.name)
            elif isinstance(n, A.CallOption):
                self.b.opaque_names.add(n.name)
            elif isinstance(n, A.New):
                self.type_names(n.type_name)

    def unit(self, unit: A.SourceUnit) -> Bindings:
        for u in unit.units:
            if isinstance(u, A.Raw):
                self.raw(u.tokens)
            else:
                self.contract(u)
        return self.b

    def contract(self, c: A.ContractDef) -> None:
        self.b.opaque_names.add(c.name)
        self.raw(c.bases)
        self.scopes = [{}]
        self.function = None
        states = [m for m in c.members if isinstance(m, A.VarDecl)]
        for m in states:
            self.declare(m, "state")
        for m in c.members:
            if isinstance(m, A.Raw):
                self.raw(m.tokens)
            elif isinstance(m, A.FunctionDef) and m.name is not None:
                self.b.opaque_names.add(m.name)
        for m in states:
            self.expr(m.initializer)
        for m in c.members:
            if isinstance(m, A.FunctionDef):
                self.func(m)

    def func(self, f: A.FunctionDef) -> None:
        self.function = f
        self.raw(f.modifiers)
        self.scopes.append({})
        for p in f.params:
            self.declare(p, "param")
        for p in f.returns or []:
            self.declare(p, "return")
        if f.body is not None:
            self.stmt(f.body)
        self.scopes.pop()
        self.function = None

    def stmt(self, s) -> None:
        if s is None:
            return
        if isinstance(s, A.Block):
            self.scopes.append({})
            for x in s.statements:
                self.stmt(x)
            self.scopes.pop()
        elif isinstance(s, A.VarDecl):
            self.expr(s.initializer)
            self.declare(s, "local")
        elif isinstance(s, A.For):
            self.scopes.append({})
            if isinstance(s.init, A.VarDecl):
                self.expr(s.init.initializer)
                self.declare(s.init, "loop")
            else:
                self.stmt(s.init)
            self.expr(s.cond)
            self.stmt(s.update)
            self.scoped(s.body)
            self.scopes.pop()
        elif isinstance(s, A.If):
            self.expr(s.cond)
            self.scoped(s.then)
            self.scoped(s.orelse)
        elif isinstance(s, A.While):
            self.expr(s.cond)
            self.scoped(s.body)
        elif isinstance(s, A.Assign):
            self.expr(s.target)
            self.expr(s.value)
        elif isinstance(s, A.Return):
            self.expr(s.value)
        elif isinstance(s, A.ExprStmt):
            self.expr(s.expr)
        elif isinstance(s, A.Require):
            for a in s.args:
                self.expr(a)
        elif isinstance(s, A.Raw):
            self.raw(s.tokens)
        else:
            raise TypeError(f"unexpected statement {s!r}")

    def scoped(self, s) -> None:
        self.scopes.append({})
        self.stmt(s)
        self.scopes.pop()


def resolve(unit: A.SourceUnit) -> Bindings:
    """Bind identifiers in ``unit`` to their declarations.

    ``opaque_names`` collects identifier texts that are not variable
    references: names in raw nodes, modifier invocations and base lists,
    member and user type names, contract and function names, and
    unresolved identifiers.
    """
    return _Resolver().unit(unit)
