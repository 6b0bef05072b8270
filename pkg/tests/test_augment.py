import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from triview.augment import (
    AugmentationConfig,
    augment_medium,
    augment_strong,
    augment_weak,
    make_views,
    view_rng,
)
from triview.frontend import ast as A, emit, parse_source

from conftest import SAMPLE
from oracles import alpha_equivalent


def body_of(src):
    return emit(parse_source(src))


def test_strong_split_shape():
    src = "contract C { function f() public { uint x = 5; x = x + 1; } }"
    out = augment_strong(parse_source(src), AugmentationConfig(fixed_k=3), np.random.default_rng(0))
    assert emit(out) == body_of(
        "contract C { function f() public { uint x_1 = 5; uint x_2 = 0; uint x_3 = 0; x_1 = x_1 + 1; } }"
    )


def test_strong_with_random_k_stays_in_range():
    cfg = AugmentationConfig(fixed_k=None, k_min=2, k_max=5)
    src = "contract C { uint a; uint b; uint c; uint d; uint e; uint f; }"
    out = augment_strong(parse_source(src), cfg, np.random.default_rng(3))
    counts = {}
    for m in out.units[0].members:
        stem = m.name.rsplit("_", 1)[0]
        counts[stem] = counts.get(stem, 0) + 1
    assert set(counts) == set("abcdef")
    assert all(2 <= k <= 5 for k in counts.values())


def test_strong_suffixes_avoid_collisions():
    src = "contract C { uint x; uint x_1; function f() public { x = x_1; } }"
    out = emit(augment_strong(parse_source(src), AugmentationConfig(fixed_k=2), np.random.default_rng(0)))
    decls = re.findall(r"uint (\w+)", out)
    assert len(decls) == len(set(decls)) == 4
    assert "x__1 = x_1_1;" in out


def test_strong_without_variables_is_identity():
    unit = parse_source("contract C { function f() public { g(); } }")
    assert augment_strong(unit, AugmentationConfig(), np.random.default_rng(0)) == unit


def test_strong_use_sites_point_at_first_subvariable(corpus):
    cfg = AugmentationConfig(fixed_k=4)
    for src in corpus[:10]:
        unit = parse_source(src)
        n_state_local = sum(
            1 for node in unit.walk() if isinstance(node, A.VarDecl) and node.name is not None
        )
        out = augment_strong(unit, cfg, view_rng(cfg, "strong"))
        n_after = sum(1 for node in out.walk() if isinstance(node, A.VarDecl) and node.name is not None)
        assert n_after > n_state_local
        # every identifier that names a sub-variable uses suffix _1
        declared = {n.name for n in out.walk() if isinstance(n, A.VarDecl) and n.name}
        for ident in (n for n in out.walk() if isinstance(n, A.Identifier)):
            if ident.name in declared and re.search(r"_\d+$", ident.name):
                assert ident.name.endswith("_1")


def test_medium_bool_returns_true():
    src = "contract C { function f() public returns (bool) { uint a = 1; if (a > 0) { return false; } return a == 2; } }"
    out = emit(augment_medium(parse_source(src)))
    assert out == body_of("contract C { function f() public returns (bool) { return true; } }")


def test_medium_void_function_gets_empty_body():
    out = emit(augment_medium(parse_source("contract C { function g() public { x = 1; } }")))
    assert out == body_of("contract C { function g() public { } }")


@pytest.mark.parametrize(
    "ret,value",
    [("uint256", "0"), ("string memory", '""'), ("address", "address(0)"), ("bytes32", "bytes32(0)")],
)
def test_medium_default_values(ret, value):
    out = emit(augment_medium(parse_source(f"contract C {{ function f() public returns ({ret}) {{ g(); }} }}")))
    assert f"return {value};" in out


def test_medium_without_functions_is_identity():
    unit = parse_source("contract C { uint a = 1; }")
    assert augment_medium(unit) == unit


def test_medium_shape_on_corpus(corpus):
    for src in corpus:
        out = augment_medium(parse_source(src))
        for fn in (n for n in out.walk() if isinstance(n, A.FunctionDef) and n.body is not None):
            stmts = fn.body.statements
            assert len(stmts) == 0 or (len(stmts) == 1 and isinstance(stmts[0], A.Return))


def test_weak_renames_consistently():
    src = "contract C { uint balance; function f() public { balance = 1; } }"
    out = emit(augment_weak(parse_source(src), AugmentationConfig(), np.random.default_rng(5)))
    names = re.findall(r"v_[0-9a-f]{4}", out)
    assert len(names) == 2 and names[0] == names[1]
    assert "balance" not in out


def test_weak_is_alpha_equivalent_on_corpus(corpus):
    cfg = AugmentationConfig(seed=9)
    for src in corpus + [SAMPLE]:
        canonical = emit(parse_source(src))
        out = emit(augment_weak(parse_source(src), cfg, view_rng(cfg, "weak")))
        assert alpha_equivalent(canonical, out)
        assert out != canonical or "v_" in canonical


def test_weak_names_do_not_collide_with_survivors():
    src = "contract C { uint v_0000; function f(uint a) public { v_0000 = a; g(a); } }"
    for seed in range(20):
        out = augment_weak(parse_source(src), AugmentationConfig(), np.random.default_rng(seed))
        text = emit(out)
        assert alpha_equivalent(emit(parse_source(src)), text)


def test_view_streams_differ():
    cfg = AugmentationConfig(seed=1)
    assert view_rng(cfg, "strong").integers(1 << 62) != view_rng(cfg, "weak").integers(1 << 62)


def test_make_views_empty_contract():
    views = make_views("contract C {}", AugmentationConfig())
    assert views.sources() == ("contract C {\n}\n",) * 3


def test_make_views_deterministic_and_reparse(corpus):
    cfg = AugmentationConfig(seed=42)
    for src in corpus:
        first = make_views(src, cfg)
        assert first.sources() == make_views(src, cfg).sources()
        for text, unit in (first.strong, first.medium, first.weak):
            assert parse_source(text) == unit


def test_config_validation():
    with pytest.raises(ValueError):
        AugmentationConfig(k_min=1)
    with pytest.raises(ValueError):
        AugmentationConfig(fixed_k=6)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**64 - 1), st.sampled_from([None, 2, 3, 4, 5]))
def test_views_reparse_for_any_seed(seed, k):
    views = make_views(SAMPLE, AugmentationConfig(seed=seed, fixed_k=k))
    for text, unit in (views.strong, views.medium, views.weak):
        assert parse_source(text) == unit
