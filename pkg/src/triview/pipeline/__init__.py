"""Datasets, configuration, model files, orchestration and the CLI."""

from .config import ConfigError, RunConfig, apply_overrides, config_keys, load_config, parse_config
from .dataset import (
    DataError,
    DatasetRecord,
    DuplicateIdx,
    MalformedRecord,
    MissingLabel,
    ingest_directory,
    label_subset,
    load_dataset,
    require_labels,
    save_dataset,
    split_indices,
)
from .model import DimMismatch, ModelFile, Standardizer
from .run import embed_records, evaluate_records, predict_records, pretrain_model, train_model

__all__ = [
    "ConfigError",
    "RunConfig",
    "apply_overrides",
    "config_keys",
    "load_config",
    "parse_config",
    "DataError",
    "DatasetRecord",
    "DuplicateIdx",
    "MalformedRecord",
    "MissingLabel",
    "ingest_directory",
    "label_subset",
    "load_dataset",
    "require_labels",
    "save_dataset",
    "split_indices",
    "DimMismatch",
    "ModelFile",
    "Standardizer",
    "embed_records",
    "evaluate_records",
    "predict_records",
    "pretrain_model",
    "train_model",
]
