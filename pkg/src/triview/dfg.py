"""Data-flow graph extraction and encoder input linearization.

Nodes are variables (one per declaration), plus synthetic nodes created on
demand: ``f.return`` for values returned by an in-contract function ``f``,
and external nodes for names that do not resolve to a declaration (``msg``,
library calls, ...). Edges run from every variable read on a right-hand side
to the variable written. The analysis is flow-insensitive: branches and loops
simply contribute the edges of their bodies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .frontend import ast as A
from .frontend import code_tokens, resolve
from .frontend.emitter import emit_expr
from .frontend.lexer import Token

__all__ = [
    "DfgNode",
    "DataFlowGraph",
    "EncoderSequence",
    "build_dfg",
    "to_encoder_sequence",
    "CLS",
    "SEP",
]

VARIABLE, RETURN, EXTERNAL = "variable", "return", "external"


@dataclass(frozen=True)
class DfgNode:
    name: str
    span: Optional[tuple[int, int]]
    ordinal: int
    kind: str = VARIABLE

    @property
    def external(self) -> bool:
        return self.kind == EXTERNAL


@dataclass
class DataFlowGraph:
    nodes: list[DfgNode] = field(default_factory=list)
    edges: list[tuple[int, int]] = field(default_factory=list)

    def named_edges(self) -> set[tuple[str, str]]:
        return {(self.nodes[i].name, self.nodes[j].name) for i, j in self.edges}

    def to_text(self) -> str:
        """Plain ``from -> to`` edge list, one edge per line."""
        return "".join(f"{self.nodes[i].name} -> {self.nodes[j].name}\n" for i, j in self.edges)


class _Builder:
    def __init__(self, unit: A.SourceUnit):
        self.b = resolve(unit)
        self.unit = unit
        self.info: dict[tuple, tuple[str, Optional[tuple[int, int]], str]] = {}
        self.seen: dict[tuple, int] = {}  # discovery order, tie-breaker for span-less nodes
        self.edges: set[tuple[tuple, tuple]] = set()
        self.contract: Optional[A.ContractDef] = None
        self.functions: dict[str, A.FunctionDef] = {}
        self.function: Optional[A.FunctionDef] = None

    # node keys: ("var", id(decl)) | ("ret", contract, name) | ("ext", name)

    def node(self, key: tuple, name: str, span, kind: str) -> tuple:
        if key not in self.info:
            self.info[key] = (name, span, kind)
            self.seen[key] = len(self.seen)
        return key

    def var(self, decl: A.VarDecl) -> tuple:
        return self.node(("var", id(decl)), decl.name, decl.span, VARIABLE)

    def ret(self, fname: str) -> tuple:
        f = self.functions[fname]
        return self.node(("ret", self.contract.name, fname), f"{fname}.return", f.span, RETURN)

    def ext(self, name: str, span) -> tuple:
        return self.node(("ext", name), name, span, EXTERNAL)

    def flow(self, sources, target) -> None:
        for s in sources:
            if s != target:
                self.edges.add((s, target))

    # -- expressions -----------------------------------------------------------

    def reads(self, e) -> set[tuple]:
        """Nodes whose value flows out of ``e``; records call-argument edges."""
        if e is None or isinstance(e, (A.Literal, A.ElementaryType, A.New)):
            return set()
        if isinstance(e, A.Identifier):
            decl = self.b.lookup(e)
            if decl is not None:
                return {self.var(decl)}
            if e.name in self.functions:
                return {self.ret(e.name)}
            return {self.ext(e.name, e.span)}
        if isinstance(e, A.Call):
            return self.call(e)
        if isinstance(e, A.Member):
            return self.reads(e.expr)
        out: set[tuple] = set()
        for child in e.children():
            out |= self.reads(child)
        return out

    def call(self, e: A.Call) -> set[tuple]:
        arg_reads: set[tuple] = set()
        for a in e.args:
            arg_reads |= self.reads(a)
        for o in e.options:
            arg_reads |= self.reads(o.value)
        callee = e.callee
        if isinstance(callee, (A.ElementaryType, A.New)):
            return arg_reads  # conversion or construction passes data through
        if isinstance(callee, A.Identifier):
            decl = self.b.lookup(callee)
            if decl is not None:
                return arg_reads | {self.var(decl)}
            target = self.ret(callee.name) if callee.name in self.functions else self.ext(callee.name, callee.span)
            self.flow(arg_reads, target)
            return {target}
        target = self.ext(emit_expr(callee), callee.span)
        self.flow(arg_reads, target)
        return {target} | self.reads(callee)

    def written(self, e) -> set[tuple]:
        if isinstance(e, A.Identifier):
            decl = self.b.lookup(e)
            return {self.var(decl)} if decl is not None else {self.ext(e.name, e.span)}
        if isinstance(e, A.Index):
            return self.written(e.base)
        if isinstance(e, A.Member):
            return self.written(e.expr)
        if isinstance(e, A.Tuple):
            out: set[tuple] = set()
            for item in e.items:
                if item is not None:
                    out |= self.written(item)
            return out
        return set()

    # -- statements ------------------------------------------------------------

    def stmt(self, s) -> None:
        if s is None or isinstance(s, A.Raw):
            return
        if isinstance(s, A.VarDecl):
            target = self.var(s)
            if s.initializer is not None:
                self.flow(self.reads(s.initializer), target)
        elif isinstance(s, A.Assign):
            self.reads(s.target)  # calls inside index expressions
            sources = self.reads(s.value)
            for t in self.written(s.target):
                self.flow(sources, t)
        elif isinstance(s, A.Return):
            sources = self.reads(s.value)
            f = self.function
            if sources and f is not None and f.name is not None and f.name in self.functions:
                self.flow(sources, self.ret(f.name))
        elif isinstance(s, A.ExprStmt):
            self.reads(s.expr)
        elif isinstance(s, A.Require):
            for a in s.args:
                self.reads(a)
        elif isinstance(s, A.Block):
            for x in s.statements:
                self.stmt(x)
        elif isinstance(s, A.If):
            self.reads(s.cond)
            self.stmt(s.then)
            self.stmt(s.orelse)
        elif isinstance(s, A.While):
            self.reads(s.cond)
            self.stmt(s.body)
        elif isinstance(s, A.For):
            self.stmt(s.init)
            self.reads(s.cond)
            self.stmt(s.update)
            self.stmt(s.body)
        else:
            raise TypeError(f"unexpected statement {s!r}")

    def build(self) -> DataFlowGraph:
        for decl in self.b.decls:
            self.var(decl)
        for c in self.unit.units:
            if not isinstance(c, A.ContractDef):
                continue
            self.contract = c
            self.functions = {}
            for m in c.members:
                if isinstance(m, A.FunctionDef) and m.name is not None:
                    self.functions.setdefault(m.name, m)
            for m in c.members:
                if isinstance(m, A.VarDecl) and m.initializer is not None:
                    self.function = None
                    self.flow(self.reads(m.initializer), self.var(m))
                elif isinstance(m, A.FunctionDef) and m.body is not None:
                    self.function = m
                    self.stmt(m.body)
            self.function = None

        used = {k for e in self.edges for k in e}
        keys = [k for k in self.info if k[0] == "var" or k in used]
        kind_order = {VARIABLE: 0, RETURN: 1, EXTERNAL: 2}

        def order(k):
            name, span, kind = self.info[k]
            return (span[0] if span is not None else -1, kind_order[kind], self.seen[k])

        keys.sort(key=order)
        ordinal = {k: i for i, k in enumerate(keys)}
        nodes = [DfgNode(self.info[k][0], self.info[k][1], ordinal[k], self.info[k][2]) for k in keys]
        edges = sorted((ordinal[s], ordinal[t]) for s, t in self.edges)
        return DataFlowGraph(nodes, edges)


def build_dfg(unit: A.SourceUnit) -> DataFlowGraph:
    return _Builder(unit).build()


CLS = ("CLS", "[CLS]")
SEP = ("SEP", "[SEP]")


@dataclass
class EncoderSequence:
    items: list[tuple[str, str]]  # (kind, payload); kind in CLS | SEP | code | dfg

    def __len__(self) -> int:
        return len(self.items)


def to_encoder_sequence(tokens: list[Token], dfg: DataFlowGraph) -> EncoderSequence:
    """``[CLS] code-tokens [SEP] dfg-nodes``; comments are skipped."""
    items = [CLS]
    items += [("code", t.text) for t in code_tokens(tokens)]
    items.append(SEP)
    items += [("dfg", n.name) for n in dfg.nodes]
    return EncoderSequence(items)
