"""Deterministic pretty-printer. ``parse(tokenize(emit(t)))`` equals ``t``."""

from __future__ import annotations

from . import ast as A

__all__ = ["emit", "emit_expr", "emit_type"]

INDENT = "    "

_BINARY_PREC = {
    "||": 2, "&&": 3, "==": 4, "!=": 4, "<": 5, ">": 5, "<=": 5, ">=": 5,
    "|": 6, "^": 7, "&": 8, "<<": 9, ">>": 9, "+": 10, "-": 10,
    "*": 11, "/": 11, "%": 11, "**": 12,
}
_PREFIX_PREC = 13
_POSTFIX_PREC = 14
_ATOM_PREC = 15


def _prec(e) -> int:
    if isinstance(e, A.Conditional):
        return 1
    if isinstance(e, A.Binary):
        return _BINARY_PREC[e.op]
    if isinstance(e, A.Unary):
        return _PREFIX_PREC if e.prefix else _POSTFIX_PREC
    if isinstance(e, (A.Call, A.Member, A.Index)):
        return _POSTFIX_PREC
    return _ATOM_PREC


def emit_type(t) -> str:
    if isinstance(t, (A.ElementaryType, A.UserType)):
        return t.name
    if isinstance(t, A.Mapping):
        return f"mapping({emit_type(t.key)} => {emit_type(t.value)})"
    if isinstance(t, A.ArrayType):
        length = "" if t.length is None else emit_expr(t.length)
        return f"{emit_type(t.base)}[{length}]"
    raise TypeError(f"not a type name: {t!r}")


def emit_expr(e, min_prec: int = 0) -> str:
    text = _expr(e)
    if _prec(e) < min_prec:
        return f"({text})"
    return text


def _expr(e) -> str:
    if isinstance(e, A.Identifier):
        return e.name
    if isinstance(e, A.ElementaryType):
        return e.name
    if isinstance(e, A.Literal):
        return e.value if e.unit is None else f"{e.value} {e.unit}"
    if isinstance(e, A.Binary):
        p = _BINARY_PREC[e.op]
        if e.op == "**":
            left, right = emit_expr(e.left, _PREFIX_PREC), emit_expr(e.right, p)
        else:
            left, right = emit_expr(e.left, p), emit_expr(e.right, p + 1)
        return f"{left} {e.op} {right}"
    if isinstance(e, A.Unary):
        if not e.prefix:
            return emit_expr(e.operand, _POSTFIX_PREC) + e.op
        operand = emit_expr(e.operand, _PREFIX_PREC)
        if e.op == "delete" or (e.op in "+-" and operand[:1] in "+-"):
            return f"{e.op} {operand}"
        return e.op + operand
    if isinstance(e, A.Conditional):
        return f"{emit_expr(e.cond, 2)} ? {emit_expr(e.if_true)} : {emit_expr(e.if_false)}"
    if isinstance(e, A.Call):
        callee = emit_expr(e.callee, _POSTFIX_PREC)
        args = ", ".join(emit_expr(a) for a in e.args)
        if e.options:
            opts = ", ".join(f"{o.name}: {emit_expr(o.value)}" for o in e.options)
            return f"{callee}{{{opts}}}({args})"
        return f"{callee}({args})"
    if isinstance(e, A.Member):
        return f"{emit_expr(e.expr, _POSTFIX_PREC)}.{e.name}"
    if isinstance(e, A.Index):
        index = "" if e.index is None else emit_expr(e.index)
        return f"{emit_expr(e.base, _POSTFIX_PREC)}[{index}]"
    if isinstance(e, A.Tuple):
        return "(" + ", ".join("" if i is None else emit_expr(i) for i in e.items) + ")"
    if isinstance(e, A.New):
        return f"new {emit_type(e.type_name)}"
    raise TypeError(f"not an expression: {e!r}")


def _decl(d: A.VarDecl) -> str:
    parts = [emit_type(d.type_name), *d.specifiers]
    if d.name is not None:
        parts.append(d.name)
    text = " ".join(parts)
    if d.initializer is not None:
        text += f" = {emit_expr(d.initializer)}"
    return text


def _simple(s) -> str:
    """Single-line statement text without the trailing ';'."""
    if isinstance(s, A.VarDecl):
        return _decl(s)
    if isinstance(s, A.Assign):
        return f"{emit_expr(s.target)} {s.op} {emit_expr(s.value)}"
    if isinstance(s, A.ExprStmt):
        return emit_expr(s.expr)
    raise TypeError(f"not a simple statement: {s!r}")


def _attach(head: str, body, depth: int) -> list[str]:
    pad = INDENT * depth
    if isinstance(body, A.Block):
        return [f"{pad}{head} {{", *_block_lines(body, depth + 1), f"{pad}}}"]
    return [pad + head, *_stmt(body, depth + 1)]


def _block_lines(b: A.Block, depth: int) -> list[str]:
    lines: list[str] = []
    for s in b.statements:
        lines.extend(_stmt(s, depth))
    return lines


def _stmt(s, depth: int) -> list[str]:
    pad = INDENT * depth
    if isinstance(s, (A.VarDecl, A.Assign, A.ExprStmt)):
        return [f"{pad}{_simple(s)};"]
    if isinstance(s, A.Return):
        return [f"{pad}return;" if s.value is None else f"{pad}return {emit_expr(s.value)};"]
    if isinstance(s, A.Require):
        return [f"{pad}require({', '.join(emit_expr(a) for a in s.args)});"]
    if isinstance(s, A.Raw):
        from .parser import join_tokens

        return [pad + join_tokens(s.tokens)]
    if isinstance(s, A.Block):
        return [f"{pad}{{", *_block_lines(s, depth + 1), f"{pad}}}"]
    if isinstance(s, A.If):
        lines = _attach(f"if ({emit_expr(s.cond)})", s.then, depth)
        if s.orelse is None:
            return lines
        if isinstance(s.then, A.Block):
            lines.pop()
            tail = "} else"
        else:
            tail = "else"
        if isinstance(s.orelse, A.If):
            sub = _stmt(s.orelse, depth)
            sub[0] = f"{pad}{tail} {sub[0].lstrip()}"
            return lines + sub
        return lines + _attach(tail, s.orelse, depth)
    if isinstance(s, A.For):
        init = "" if s.init is None else _simple(s.init)
        cond = "" if s.cond is None else emit_expr(s.cond)
        update = "" if s.update is None else _simple(s.update)
        return _attach(f"for ({init}; {cond}; {update})", s.body, depth)
    if isinstance(s, A.While):
        return _attach(f"while ({emit_expr(s.cond)})", s.body, depth)
    raise TypeError(f"not a statement: {s!r}")


def _params(ps: list[A.VarDecl]) -> str:
    return ", ".join(_decl(p) for p in ps)


def _function(f: A.FunctionDef, depth: int) -> list[str]:
    pad = INDENT * depth
    if f.kind == "function":
        head = "function" + ("" if f.name is None else f" {f.name}")
    else:
        head = f.kind
    head += f"({_params(f.params)})"
    for m in f.modifiers:
        head += f" {m}"
    if f.returns is not None:
        head += f" returns ({_params(f.returns)})"
    if f.body is None:
        return [f"{pad}{head};"]
    return [f"{pad}{head} {{", *_block_lines(f.body, depth + 1), f"{pad}}}"]


def _contract(c: A.ContractDef) -> list[str]:
    head = f"{c.kind} {c.name}"
    if c.bases:
        head += " is " + ", ".join(c.bases)
    lines = [head + " {"]
    for m in c.members:
        if isinstance(m, A.FunctionDef):
            lines.extend(_function(m, 1))
        else:
            lines.extend(_stmt(m, 1))
    lines.append("}")
    return lines


def emit(unit: A.SourceUnit) -> str:
    """Render a source unit in canonical layout."""
    chunks = []
    for u in unit.units:
        lines = _contract(u) if isinstance(u, A.ContractDef) else _stmt(u, 0)
        chunks.append("\n".join(lines) + "\n")
    return "\n".join(chunks)
