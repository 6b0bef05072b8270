"""Hashed sequence features and the trainable projection head.

A contract view is linearized to ``[CLS] code [SEP] dfg-nodes`` and turned
into a fixed-size vector by signed feature hashing. Each item contributes
twice: once for its content and once for its content tagged with its
relative position bucket. The vector is mean-pooled over the sequence and
its last coordinate is pinned to 1.0 as a bias feature. A one-hidden-layer
ReLU head maps features to embeddings.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dfg import EncoderSequence, build_dfg, to_encoder_sequence
from .frontend import parse, tokenize

__all__ = [
    "EncoderConfig",
    "EncoderParams",
    "fnv1a64",
    "featurize",
    "source_features",
    "init_params",
    "project",
    "project_backward",
    "encode_view",
]

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK64 = (1 << 64) - 1

FORMAT_VERSION = 1
_MAGIC = b"TVEP"


@dataclass(frozen=True)
class EncoderConfig:
    feature_dim: int = 256
    hidden_dim: int = 64
    embed_dim: int = 32
    hash_seed: int = 0
    position_buckets: int = 16

    def __post_init__(self):
        for name in ("feature_dim", "hidden_dim", "embed_dim", "position_buckets"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0 <= self.hash_seed < 2**64:
            raise ValueError("hash_seed must be a 64-bit unsigned integer")


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & MASK64
    return h


@lru_cache(maxsize=1 << 16)
def _slot(key: str, seed: int, dim: int) -> tuple[int, float]:
    h = fnv1a64(key.encode("utf-8")) ^ seed
    return h % dim, (-1.0 if h >> 63 else 1.0)


def _content_key(kind: str, payload: str) -> str:
    return f"{kind}\x1f{payload}"


def _position_key(kind: str, payload: str, bucket: int) -> str:
    return f"{kind}\x1f{payload}\x1e{bucket}"


def position_bucket(i: int, length: int, buckets: int) -> int:
    return i * buckets // length


def featurize(seq: EncoderSequence, cfg: EncoderConfig) -> np.ndarray:
    items = seq.items
    n = len(items)
    if n < 2:
        raise ValueError("sequence must contain at least [CLS] and [SEP]")
    x = np.zeros(cfg.feature_dim)
    for i, (kind, payload) in enumerate(items):
        idx, sign = _slot(_content_key(kind, payload), cfg.hash_seed, cfg.feature_dim)
        x[idx] += sign
        bucket = position_bucket(i, n, cfg.position_buckets)
        idx, sign = _slot(_position_key(kind, payload, bucket), cfg.hash_seed, cfg.feature_dim)
        x[idx] += sign
    x /= n
    x[-1] = 1.0
    return x


def source_features(source: str, cfg: EncoderConfig) -> np.ndarray:
    """tokenize -> parse -> DFG -> encoder sequence -> hashed features."""
    tokens = tokenize(source)
    unit = parse(tokens)
    return featurize(to_encoder_sequence(tokens, build_dfg(unit)), cfg)


@dataclass
class EncoderParams:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.W1.shape[1], self.W1.shape[0], self.W2.shape[0]

    def check(self, cfg: EncoderConfig) -> None:
        expected = (cfg.feature_dim, cfg.hidden_dim, cfg.embed_dim)
        if self.dims != expected:
            raise ValueError(f"parameter dims {self.dims} do not match config {expected}")

    def arrays(self) -> tuple[np.ndarray, ...]:
        return self.W1, self.b1, self.W2, self.b2

    def copy(self) -> "EncoderParams":
        return EncoderParams(*(a.copy() for a in self.arrays()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, EncoderParams):
            return NotImplemented
        return all(
            a.shape == b.shape and np.array_equal(a, b)
            for a, b in zip(self.arrays(), other.arrays())
        )

    # -- serialization ------------------------------------------------------

    def to_dict(self, cfg: EncoderConfig) -> dict:
        self.check(cfg)
        return {
            "format_version": FORMAT_VERSION,
            "feature_dim": cfg.feature_dim,
            "hidden_dim": cfg.hidden_dim,
            "embed_dim": cfg.embed_dim,
            "hash_seed": cfg.hash_seed,
            "position_buckets": cfg.position_buckets,
            "W1": self.W1.tolist(),
            "b1": self.b1.tolist(),
            "W2": self.W2.tolist(),
            "b2": self.b2.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> tuple["EncoderParams", EncoderConfig]:
        if data.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported encoder format version {data.get('format_version')!r}")
        cfg = EncoderConfig(
            data["feature_dim"], data["hidden_dim"], data["embed_dim"],
            data["hash_seed"], data["position_buckets"],
        )
        params = cls(*(np.array(data[k], dtype=np.float64) for k in ("W1", "b1", "W2", "b2")))
        params.W1 = params.W1.reshape(cfg.hidden_dim, cfg.feature_dim)
        params.W2 = params.W2.reshape(cfg.embed_dim, cfg.hidden_dim)
        params.check(cfg)
        return params, cfg

    def to_json(self, cfg: EncoderConfig) -> str:
        return json.dumps(self.to_dict(cfg), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> tuple["EncoderParams", EncoderConfig]:
        return cls.from_dict(json.loads(text))

    def to_bytes(self, cfg: EncoderConfig) -> bytes:
        """Header then row-major little-endian float64 W1, b1, W2, b2."""
        self.check(cfg)
        header = struct.pack(
            "<4sIIIIIQ", _MAGIC, FORMAT_VERSION, cfg.feature_dim, cfg.hidden_dim,
            cfg.embed_dim, cfg.position_buckets, cfg.hash_seed,
        )
        body = b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes() for a in self.arrays())
        return header + body

    @classmethod
    def from_bytes(cls, data: bytes) -> tuple["EncoderParams", EncoderConfig]:
        fmt = "<4sIIIIIQ"
        magic, version, d_f, d_h, d, buckets, seed = struct.unpack_from(fmt, data)
        if magic != _MAGIC or version != FORMAT_VERSION:
            raise ValueError("not an encoder parameter file of a supported version")
        cfg = EncoderConfig(d_f, d_h, d, seed, buckets)
        offset = struct.calcsize(fmt)
        arrays = []
        for shape in ((d_h, d_f), (d_h,), (d, d_h), (d,)):
            count = int(np.prod(shape))
            arrays.append(np.frombuffer(data, dtype="<f8", count=count, offset=offset).astype(np.float64).reshape(shape))
            offset += 8 * count
        if offset != len(data):
            raise ValueError("trailing or missing bytes in encoder parameter file")
        return cls(*arrays), cfg


def init_params(cfg: EncoderConfig, seed: int) -> EncoderParams:
    """He-normal weights, zero biases."""
    rng = np.random.default_rng(seed)
    W1 = rng.normal(0.0, np.sqrt(2.0 / cfg.feature_dim), (cfg.hidden_dim, cfg.feature_dim))
    W2 = rng.normal(0.0, np.sqrt(2.0 / cfg.hidden_dim), (cfg.embed_dim, cfg.hidden_dim))
    return EncoderParams(W1, np.zeros(cfg.hidden_dim), W2, np.zeros(cfg.embed_dim))


def project(x: np.ndarray, p: EncoderParams) -> np.ndarray:
    """``W2 @ relu(W1 @ x + b1) + b2``; ``x`` may be one vector or a row batch."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != p.W1.shape[1]:
        raise ValueError(f"input has {x.shape[-1]} features, head expects {p.W1.shape[1]}")
    h = np.maximum(x @ p.W1.T + p.b1, 0.0)
    return h @ p.W2.T + p.b2


def project_backward(x: np.ndarray, p: EncoderParams, grad_out: np.ndarray) -> EncoderParams:
    """Gradient of ``sum(grad_out * project(x, p))`` w.r.t. the head parameters.

    ``x`` is (n, d_f) and ``grad_out`` (n, d); contributions are summed over rows.
    """
    x = np.atleast_2d(x)
    grad_out = np.atleast_2d(grad_out)
    pre = x @ p.W1.T + p.b1
    h = np.maximum(pre, 0.0)
    gW2 = grad_out.T @ h
    gb2 = grad_out.sum(axis=0)
    gpre = (grad_out @ p.W2) * (pre > 0.0)
    gW1 = gpre.T @ x
    gb1 = gpre.sum(axis=0)
    return EncoderParams(gW1, gb1, gW2, gb2)


def encode_view(source: str, cfg: EncoderConfig, params: EncoderParams) -> np.ndarray:
    return project(source_features(source, cfg), params)
