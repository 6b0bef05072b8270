"""Strong, medium and weak views of a contract, as AST rewrites.

* strong: split each variable declaration into ``k`` sub-variables
  ``V_1..V_k``; uses are redirected to ``V_1``, the rest are decoys holding
  the type's default value.
* medium: replace every function body with a single ``return`` of a default
  value for the declared return types (empty body for void functions).
* weak: consistently rename variables and parameters to fresh random names.

Raw nodes are never rewritten, and names that occur inside raw text are left
alone so the rewritten source still refers to what it declares.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .frontend import ast as A
from .frontend import emit, parse_source, resolve, tokenize
from .frontend.lexer import IDENTIFIER

__all__ = [
    "AugmentationConfig",
    "AugmentedTriple",
    "augment_strong",
    "augment_medium",
    "augment_weak",
    "make_views",
    "view_rng",
]

STRONG_TAG = 0x5354524F  # "STRO"
WEAK_TAG = 0x5745414B  # "WEAK"


@dataclass(frozen=True)
class AugmentationConfig:
    seed: int = 0
    k_min: int = 2
    k_max: int = 5
    fixed_k: Optional[int] = 4
    rename_prefix: str = "v_"

    def __post_init__(self):
        if not 2 <= self.k_min <= self.k_max:
            raise ValueError(f"need 2 <= k_min <= k_max, got {self.k_min}, {self.k_max}")
        if self.fixed_k is not None and not self.k_min <= self.fixed_k <= self.k_max:
            raise ValueError(f"fixed_k={self.fixed_k} outside [{self.k_min}, {self.k_max}]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class AugmentedTriple:
    strong: tuple[str, A.SourceUnit]
    medium: tuple[str, A.SourceUnit]
    weak: tuple[str, A.SourceUnit]

    def sources(self) -> tuple[str, str, str]:
        return self.strong[0], self.medium[0], self.weak[0]


def view_rng(cfg: AugmentationConfig, view: str) -> np.random.Generator:
    """Independent, reproducible stream for one randomized view."""
    tag = {"strong": STRONG_TAG, "weak": WEAK_TAG}[view]
    return np.random.default_rng([cfg.seed, tag])


def _identifier_names(unit: A.SourceUnit) -> set[str]:
    return {t.text for t in tokenize(emit(unit)) if t.kind == IDENTIFIER}


def default_value(t) -> Optional[A.Node]:
    """Default literal for an elementary type; None when there is none."""
    if not isinstance(t, A.ElementaryType):
        return None
    name = t.name
    if name.startswith(("uint", "int")):
        return A.Literal("number", "0")
    if name == "bool":
        return A.Literal("bool", "false")
    if name in ("string", "bytes"):
        return A.Literal("string", '""')
    if name.startswith("address"):
        return A.Call(A.ElementaryType("address"), [A.Literal("number", "0")])
    if name.startswith("byte"):
        return A.Call(A.ElementaryType(name), [A.Literal("number", "0")])
    return None


def _return_value(t) -> Optional[A.Node]:
    if isinstance(t, A.ElementaryType) and t.name == "bool":
        return A.Literal("bool", "true")
    return default_value(t)


def _statement_lists(unit: A.SourceUnit):
    for node in unit.walk():
        if isinstance(node, A.ContractDef):
            yield node.members
        elif isinstance(node, A.Block):
            yield node.statements


def augment_strong(
    unit: A.SourceUnit, cfg: AugmentationConfig, rng: np.random.Generator
) -> A.SourceUnit:
    unit = copy.deepcopy(unit)
    b = resolve(unit)
    taken = _identifier_names(unit)
    targets = [
        d for d in b.decls if b.role[id(d)] in ("state", "local") and d.name not in b.raw_names
    ]
    if not targets:
        return unit

    ks = {}
    for d in targets:
        ks[id(d)] = cfg.fixed_k if cfg.fixed_k is not None else int(rng.integers(cfg.k_min, cfg.k_max + 1))

    # one collision-free stem per original name, shared by its declarations
    stems: dict[str, str] = {}
    for name in sorted({d.name for d in targets}):
        k_needed = max(ks[id(d)] for d in targets if d.name == name)
        stem = name
        while any(f"{stem}_{j}" in taken for j in range(1, k_needed + 1)):
            stem += "_"
        stems[name] = stem
        taken.update(f"{stem}_{j}" for j in range(1, k_needed + 1))

    split = {id(d): d for d in targets}
    for ident in b.identifiers:
        decl = b.lookup(ident)
        if decl is not None and id(decl) in split:
            ident.name = f"{stems[decl.name]}_1"

    for stmts in _statement_lists(unit):
        out = []
        for s in stmts:
            if isinstance(s, A.VarDecl) and id(s) in split:
                stem = stems[s.name]
                out.append(A.VarDecl(s.type_name, f"{stem}_1", s.initializer, list(s.specifiers)))
                for j in range(2, ks[id(s)] + 1):
                    out.append(
                        A.VarDecl(
                            copy.deepcopy(s.type_name),
                            f"{stem}_{j}",
                            default_value(s.type_name),
                            list(s.specifiers),
                        )
                    )
            else:
                out.append(s)
        stmts[:] = out
    return unit


def augment_medium(unit: A.SourceUnit) -> A.SourceUnit:
    unit = copy.deepcopy(unit)
    for node in unit.walk():
        if not isinstance(node, A.FunctionDef) or node.body is None:
            continue
        values = [_return_value(p.type_name) for p in node.returns or []]
        if not values or any(v is None for v in values):
            # no return type, or one without a literal default
            node.body = A.Block([])
        elif len(values) == 1:
            node.body = A.Block([A.Return(values[0])])
        else:
            node.body = A.Block([A.Return(A.Tuple(values))])
    return unit


def _fresh_name(prefix: str, rng: np.random.Generator, taken: set[str]) -> str:
    digits = 4
    for attempt in range(1000):
        if attempt and attempt % 100 == 0:
            digits += 2
        name = f"{prefix}{int(rng.integers(0, 16**digits)):0{digits}x}"
        if name not in taken:
            return name
    raise RuntimeError("could not find a fresh name")


def augment_weak(
    unit: A.SourceUnit, cfg: AugmentationConfig, rng: np.random.Generator
) -> A.SourceUnit:
    unit = copy.deepcopy(unit)
    b = resolve(unit)
    taken = _identifier_names(unit)
    renamable = sorted({d.name for d in b.decls} - b.opaque_names)
    mapping: dict[str, str] = {}
    for name in renamable:
        new = _fresh_name(cfg.rename_prefix, rng, taken)
        taken.add(new)
        mapping[name] = new
    for d in b.decls:
        if d.name in mapping:
            d.name = mapping[d.name]
    for ident in b.identifiers:
        if ident.name in mapping:
            ident.name = mapping[ident.name]
    return unit


def make_views(source: str, cfg: AugmentationConfig) -> AugmentedTriple:
    """Parse ``source`` and build its three augmented views.

    Each view is re-emitted and re-parsed, so the stored AST carries spans
    into the stored source.
    """
    unit = parse_source(source)
    strong = augment_strong(unit, cfg, view_rng(cfg, "strong"))
    medium = augment_medium(unit)
    weak = augment_weak(unit, cfg, view_rng(cfg, "weak"))

    def finish(u):
        text = emit(u)
        return text, parse_source(text)

    return AugmentedTriple(finish(strong), finish(medium), finish(weak))
