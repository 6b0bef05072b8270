import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from triview.dfg import CLS, SEP, EncoderSequence
from triview.encoder import (
    EncoderConfig,
    EncoderParams,
    encode_view,
    featurize,
    fnv1a64,
    init_params,
    project,
    project_backward,
    source_features,
)

from conftest import SAMPLE


@pytest.mark.parametrize(
    "data,expected",
    [(b"", 0xCBF29CE484222325), (b"a", 0xAF63DC4C8601EC8C), (b"foobar", 0x85944171F73967E8)],
)
def test_fnv1a64_reference_vectors(data, expected):
    assert fnv1a64(data) == expected


def oracle_featurize(items, d_f, seed, buckets):
    """Independent restatement of the hashed featurization."""

    def h(text):
        value = 0xCBF29CE484222325
        for byte in text.encode():
            value = ((value ^ byte) * 0x100000001B3) % 2**64
        value ^= seed
        return value % d_f, (-1.0 if value >= 2**63 else 1.0)

    x = [0.0] * d_f
    n = len(items)
    for i, (kind, payload) in enumerate(items):
        for key in (f"{kind}\x1f{payload}", f"{kind}\x1f{payload}\x1e{(i * buckets) // n}"):
            idx, sign = h(key)
            x[idx] += sign
    x = [v / n for v in x]
    x[-1] = 1.0
    return np.array(x)


def repeated(n):
    return EncoderSequence([CLS] + [("code", "x")] * (n - 2) + [SEP])


def test_repeated_token_sequences_of_10_and_20():
    cfg = EncoderConfig(feature_dim=16, position_buckets=4, hash_seed=7)
    for n in (10, 20):
        assert np.array_equal(featurize(repeated(n), cfg), oracle_featurize(repeated(n).items, 16, 7, 4))
    # only the pooling weight and bucket split change with length
    a, b = featurize(repeated(10), cfg), featurize(repeated(20), cfg)
    assert not np.array_equal(a, b)


def test_identical_sequences_identical_vectors():
    cfg = EncoderConfig()
    seq = EncoderSequence([CLS, ("code", "a"), ("code", "b"), SEP, ("dfg", "a")])
    assert np.array_equal(featurize(seq, cfg), featurize(EncoderSequence(list(seq.items)), cfg))


def test_bucket_preserving_shuffle_is_invariant():
    cfg = EncoderConfig(feature_dim=64, position_buckets=2)
    items = [CLS] + [("code", t) for t in "abcdefgh"] + [SEP]  # 10 items, buckets of 5
    shuffled = [items[0], items[3], items[1], items[4], items[2]] + items[5:]
    other = items[:4] + [items[6], items[4]] + [items[5]] + items[7:]  # crosses the bucket edge
    base = featurize(EncoderSequence(items), cfg)
    assert np.array_equal(base, featurize(EncoderSequence(shuffled), cfg))
    assert not np.array_equal(base, featurize(EncoderSequence(other), cfg))


def test_bias_feature_and_too_short():
    cfg = EncoderConfig()
    assert featurize(repeated(5), cfg)[-1] == 1.0
    with pytest.raises(ValueError):
        featurize(EncoderSequence([CLS]), cfg)


def test_project_zero_params():
    cfg = EncoderConfig(feature_dim=8, hidden_dim=4, embed_dim=3)
    p = EncoderParams(np.zeros((4, 8)), np.zeros(4), np.zeros((3, 4)), np.zeros(3))
    assert np.array_equal(project(np.arange(8.0), p), np.zeros(3))
    p.check(cfg)


def test_project_identity():
    x = np.abs(np.random.default_rng(0).normal(size=6))
    p = EncoderParams(np.eye(6), np.zeros(6), np.eye(6), np.zeros(6))
    assert np.array_equal(project(x, p), x)


def test_project_matches_loop_oracle():
    rng = np.random.default_rng(1)
    p = init_params(EncoderConfig(feature_dim=12, hidden_dim=7, embed_dim=5), 3)
    p.b1 = rng.normal(size=7)
    p.b2 = rng.normal(size=5)
    x = rng.normal(size=12)
    hidden = [max(0.0, sum(p.W1[i, j] * x[j] for j in range(12)) + p.b1[i]) for i in range(7)]
    out = [sum(p.W2[k, i] * hidden[i] for i in range(7)) + p.b2[k] for k in range(5)]
    assert np.allclose(project(x, p), out, rtol=0, atol=1e-12)


def test_project_shape_mismatch():
    p = init_params(EncoderConfig(feature_dim=8, hidden_dim=4, embed_dim=3), 0)
    with pytest.raises(ValueError):
        project(np.zeros(9), p)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 10.0), st.integers(0, 1000))
def test_project_positively_homogeneous_without_bias(lam, seed):
    p = init_params(EncoderConfig(feature_dim=10, hidden_dim=6, embed_dim=4), seed)
    x = np.random.default_rng(seed).normal(size=10)
    assert np.allclose(project(lam * x, p), lam * project(x, p), rtol=1e-12, atol=1e-12)


def test_project_backward_matches_finite_differences():
    rng = np.random.default_rng(2)
    cfg = EncoderConfig(feature_dim=6, hidden_dim=5, embed_dim=3)
    p = init_params(cfg, 4)
    p.b1 = rng.normal(size=5) * 0.1
    X = rng.normal(size=(4, 6))
    G = rng.normal(size=(4, 3))
    pre = X @ p.W1.T + p.b1
    assert np.min(np.abs(pre)) > 1e-3  # away from relu kinks
    grads = project_backward(X, p, G)
    h = 1e-5
    for name in ("W1", "b1", "W2", "b2"):
        arr = getattr(p, name)
        g = getattr(grads, name)
        for idx in np.ndindex(arr.shape):
            old = arr[idx]
            arr[idx] = old + h
            up = np.sum(G * project(X, p))
            arr[idx] = old - h
            down = np.sum(G * project(X, p))
            arr[idx] = old
            fd = (up - down) / (2 * h)
            assert abs(fd - g[idx]) <= 1e-5 * max(1.0, abs(fd))


def test_serialization_roundtrips():
    cfg = EncoderConfig(feature_dim=9, hidden_dim=4, embed_dim=3, hash_seed=2**63 + 5)
    p = init_params(cfg, 11)
    q, cfg2 = EncoderParams.from_json(p.to_json(cfg))
    assert q == p and cfg2 == cfg
    blob = p.to_bytes(cfg)
    r, cfg3 = EncoderParams.from_bytes(blob)
    assert r == p and cfg3 == cfg
    assert r.to_bytes(cfg3) == blob
    with pytest.raises(ValueError):
        EncoderParams.from_bytes(blob[:-8])


def test_encode_view_properties():
    cfg = EncoderConfig()
    p = init_params(cfg, 0)
    a = encode_view(SAMPLE, cfg, p)
    assert a.shape == (cfg.embed_dim,)
    assert np.array_equal(a, encode_view(SAMPLE, cfg, p))
    assert np.array_equal(source_features(SAMPLE, cfg), source_features(SAMPLE, cfg))


def test_config_validation():
    with pytest.raises(ValueError):
        EncoderConfig(feature_dim=0)
    with pytest.raises(ValueError):
        EncoderConfig(hash_seed=-1)
