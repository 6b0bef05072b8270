"""AST node types for the Solidity subset.

Nodes are plain dataclasses. ``span`` is excluded from equality, so ``==``
is structural comparison. Constructs the grammar does not model are kept as
:class:`Raw` nodes holding their token text.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Iterator, Optional, Union

Span = Optional[tuple[int, int]]


@dataclass
class Node:
    span: Span = field(default=None, compare=False, repr=False, kw_only=True)

    def children(self) -> Iterator["Node"]:
        for f in fields(self):
            if f.name == "span":
                continue
            value = getattr(self, f.name)
            if isinstance(value, Node):
                yield value
            elif isinstance(value, list):
                for item in value:
                    if isinstance(item, Node):
                        yield item

    def walk(self) -> Iterator["Node"]:
        """Pre-order traversal including ``self``."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(list(node.children())))


@dataclass
class Raw(Node):
    """Opaque construct kept verbatim as its token texts."""

    tokens: list[str]


# -- type names ---------------------------------------------------------------


@dataclass
class ElementaryType(Node):
    name: str


@dataclass
class UserType(Node):
    name: str  # possibly dotted, e.g. "Lib.Struct"


@dataclass
class Mapping(Node):
    key: "TypeName"
    value: "TypeName"


@dataclass
class ArrayType(Node):
    base: "TypeName"
    length: Optional["Expr"] = None


TypeName = Union[ElementaryType, UserType, Mapping, ArrayType]


# -- expressions --------------------------------------------------------------


@dataclass
class Identifier(Node):
    name: str


@dataclass
class Literal(Node):
    kind: str  # "number" | "string" | "bool"
    value: str
    unit: Optional[str] = None


@dataclass
class Binary(Node):
    op: str
    left: "Expr"
    right: "Expr"


@dataclass
class Unary(Node):
    op: str
    operand: "Expr"
    prefix: bool = True


@dataclass
class Conditional(Node):
    cond: "Expr"
    if_true: "Expr"
    if_false: "Expr"


@dataclass
class CallOption(Node):
    name: str
    value: "Expr"


@dataclass
class Call(Node):
    callee: "Expr"
    args: list["Expr"]
    options: list[CallOption] = field(default_factory=list)


@dataclass
class Member(Node):
    expr: "Expr"
    name: str


@dataclass
class Index(Node):
    base: "Expr"
    index: Optional["Expr"]


@dataclass
class Tuple(Node):
    items: list[Optional["Expr"]]


@dataclass
class New(Node):
    type_name: TypeName


Expr = Union[
    Identifier, Literal, Binary, Unary, Conditional, Call, Member, Index, Tuple, New, ElementaryType
]


# -- declarations and statements ----------------------------------------------


@dataclass
class VarDecl(Node):
    """State variable, local variable or parameter.

    ``specifiers`` holds visibility, mutability and data-location words in
    source order. Parameters may be unnamed (``name is None``).
    """

    type_name: TypeName
    name: Optional[str]
    initializer: Optional["Expr"] = None
    specifiers: list[str] = field(default_factory=list)


@dataclass
class Block(Node):
    statements: list["Stmt"]


@dataclass
class Assign(Node):
    target: "Expr"
    op: str
    value: "Expr"


@dataclass
class Return(Node):
    value: Optional["Expr"]


@dataclass
class If(Node):
    cond: "Expr"
    then: "Stmt"
    orelse: Optional["Stmt"] = None


@dataclass
class For(Node):
    init: Optional["Stmt"]
    cond: Optional["Expr"]
    update: Optional["Stmt"]
    body: "Stmt"


@dataclass
class While(Node):
    cond: "Expr"
    body: "Stmt"


@dataclass
class Require(Node):
    args: list["Expr"]


@dataclass
class ExprStmt(Node):
    expr: "Expr"


Stmt = Union[VarDecl, Block, Assign, Return, If, For, While, Require, ExprStmt, Raw]


@dataclass
class FunctionDef(Node):
    """Function, constructor, fallback or receive definition.

    ``returns`` is None when there is no ``returns (...)`` clause; ``body`` is
    None for declarations without implementation.
    """

    kind: str
    name: Optional[str]
    params: list[VarDecl]
    modifiers: list[str]
    returns: Optional[list[VarDecl]]
    body: Optional[Block]


@dataclass
class ContractDef(Node):
    name: str
    members: list[Union[VarDecl, FunctionDef, Raw]]
    kind: str = "contract"
    bases: list[str] = field(default_factory=list)


@dataclass
class SourceUnit(Node):
    units: list[Union[ContractDef, Raw]]


def strip_spans(node: Node) -> Node:
    """Clear spans in place on every node below ``node`` and return it."""
    for n in node.walk():
        n.span = None
    return node
