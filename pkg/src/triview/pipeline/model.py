"""Model file: encoder head, classifier, feature standardizer and provenance.

Stored as JSON with sorted keys. Python floats serialize with their shortest
round-tripping repr, so load-then-save reproduces the file byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..classifier import ClassifierParams
from ..encoder import EncoderConfig, EncoderParams

__all__ = ["MODEL_FORMAT_VERSION", "DimMismatch", "Standardizer", "ModelFile"]

MODEL_FORMAT_VERSION = 1


class DimMismatch(ValueError):
    pass


@dataclass
class Standardizer:
    """Per-dimension affine map applied to embeddings before the classifier."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def identity(cls, dim: int) -> "Standardizer":
        return cls(np.zeros(dim), np.ones(dim))

    @classmethod
    def fit(cls, Z: np.ndarray, floor: float = 1e-12) -> "Standardizer":
        Z = np.atleast_2d(Z)
        return cls(Z.mean(axis=0), np.maximum(Z.std(axis=0), floor))

    def __call__(self, Z: np.ndarray) -> np.ndarray:
        return (np.asarray(Z) - self.mean) / self.scale

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "Standardizer":
        return cls(np.array(data["mean"], dtype=np.float64), np.array(data["scale"], dtype=np.float64))


@dataclass
class ModelFile:
    encoder_config: EncoderConfig
    encoder: EncoderParams
    classifier: ClassifierParams
    standardizer: Standardizer
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.encoder.check(self.encoder_config)
        d = self.encoder_config.embed_dim
        if self.classifier.dim != d or self.standardizer.mean.shape != (d,) or self.standardizer.scale.shape != (d,):
            raise DimMismatch(f"classifier/standardizer width does not match embed_dim {d}")

    def check_config(self, cfg: EncoderConfig) -> None:
        if cfg != self.encoder_config:
            ours = self.encoder_config
            raise DimMismatch(
                "model was built with "
                f"feature_dim={ours.feature_dim} hidden_dim={ours.hidden_dim} embed_dim={ours.embed_dim} "
                f"hash_seed={ours.hash_seed} position_buckets={ours.position_buckets}, config asks for "
                f"feature_dim={cfg.feature_dim} hidden_dim={cfg.hidden_dim} embed_dim={cfg.embed_dim} "
                f"hash_seed={cfg.hash_seed} position_buckets={cfg.position_buckets}"
            )

    def to_dict(self) -> dict:
        enc = self.encoder.to_dict(self.encoder_config)
        header = {k: enc.pop(k) for k in ("feature_dim", "hidden_dim", "embed_dim", "hash_seed", "position_buckets")}
        header["encoder_format_version"] = enc.pop("format_version")
        header["format_version"] = MODEL_FORMAT_VERSION
        return {
            "header": header,
            "encoder": enc,
            "classifier": self.classifier.to_dict(),
            "standardizer": self.standardizer.to_dict(),
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelFile":
        try:
            header = data["header"]
            if header.get("format_version") != MODEL_FORMAT_VERSION:
                raise ValueError(f"unsupported model format version {header.get('format_version')!r}")
            enc = dict(data["encoder"])
            enc["format_version"] = header["encoder_format_version"]
            for k in ("feature_dim", "hidden_dim", "embed_dim", "hash_seed", "position_buckets"):
                enc[k] = header[k]
            params, cfg = EncoderParams.from_dict(enc)
            return cls(
                cfg,
                params,
                ClassifierParams.from_dict(data["classifier"]),
                Standardizer.from_dict(data["standardizer"]),
                data.get("provenance", {}),
            )
        except KeyError as exc:
            raise ValueError(f"model file lacks field {exc}") from None

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    @classmethod
    def loads(cls, text: str) -> "ModelFile":
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path) -> "ModelFile":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())
