"""The three pipeline steps: pretrain the encoder head, train the classifier, predict."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..classifier import ClassifierParams, SelfTrainResult, predict_proba, self_train_run
from ..contrastive import PretrainResult, pretrain, view_features
from ..encoder import encode_view
from ..frontend import LexError, ParseError
from ..metrics import confusion, report
from .config import RunConfig
from .dataset import DataError, DatasetRecord, corpus_digest, label_subset, require_labels, split_indices
from .model import ModelFile, Standardizer

__all__ = [
    "UnparseableRecord",
    "pretrain_model",
    "embed_records",
    "TrainOutcome",
    "train_model",
    "predict_records",
    "evaluate_records",
]

log = logging.getLogger(__name__)


class UnparseableRecord(DataError):
    pass


def pretrain_model(records: list[DatasetRecord], cfg: RunConfig) -> tuple[ModelFile, PretrainResult]:
    """Step 1: fit the projection head on the sources of ``records`` (labels unused)."""
    corpus = [r.source for r in records]
    features, kept = view_features(corpus, cfg.augment, cfg.encoder)
    if len(kept) < len(corpus):
        log.warning("skipped %d unparseable sources", len(corpus) - len(kept))
    result = pretrain(corpus, cfg.augment, cfg.encoder, cfg.pretrain, features=features)
    result.skipped = len(corpus) - len(kept)
    d = cfg.encoder.embed_dim
    model = ModelFile(
        cfg.encoder,
        result.params,
        ClassifierParams(np.zeros((2, d)), np.zeros(2)),
        Standardizer.identity(d),
        {
            "config_sha256": cfg.digest(),
            "pretrain_corpus_sha256": corpus_digest(records),
            "pretrain_steps": cfg.pretrain.steps,
            "pretrain_skipped": result.skipped,
            "final_pretrain_loss": result.trace[-1][1] if result.trace else None,
        },
    )
    return model, result


def embed_records(records: list[DatasetRecord], model: ModelFile) -> np.ndarray:
    out = np.zeros((len(records), model.encoder_config.embed_dim))
    for i, rec in enumerate(records):
        try:
            out[i] = encode_view(rec.source, model.encoder_config, model.encoder)
        except (ParseError, LexError) as exc:
            raise UnparseableRecord(f"record {rec.idx!r}: {exc}") from exc
    return out


@dataclass
class TrainOutcome:
    model: ModelFile
    selftrain: SelfTrainResult
    test_report: Optional[dict]
    validation_report: Optional[dict]
    n_labeled: int
    n_unlabeled: int


def _split_report(Z, y, model: ModelFile) -> Optional[dict]:
    if len(y) == 0:
        return None
    pred = predict_proba(model.standardizer(Z), model.classifier).argmax(axis=1)
    return report(confusion(pred, y))


def train_model(
    model: ModelFile,
    labeled: list[DatasetRecord],
    unlabeled: Optional[list[DatasetRecord]],
    cfg: RunConfig,
    supervised_only: bool = False,
) -> TrainOutcome:
    """Step 2: split the labeled data, withhold labels, self-train over frozen embeddings.

    The labeled dataset is split train/test/validation. Of the training
    split only ``label_fraction`` keeps its labels; the rest joins the
    unlabeled pool along with ``unlabeled``. ``supervised_only`` drops the
    unlabeled pool, which leaves a plain supervised fit with the same budget.
    """
    model.check_config(cfg.encoder)
    y_all = require_labels(labeled)
    unlabeled = unlabeled or []
    Z_all = embed_records(labeled, model)
    Z_extra = embed_records(unlabeled, model)
    train, test, val = split_indices(
        len(labeled), (cfg.train_fraction, cfg.test_fraction, cfg.validation_fraction), cfg.seed
    )
    keep, withheld = label_subset(y_all[train], cfg.label_fraction, cfg.seed)
    lab_idx = train[keep]
    Z_unl = np.vstack([Z_all[train[withheld]], Z_extra])
    if supervised_only:
        Z_unl = Z_unl[:0]
    standardizer = Standardizer.fit(np.vstack([Z_all[lab_idx], Z_unl]))
    result = self_train_run(standardizer(Z_all[lab_idx]), y_all[lab_idx], standardizer(Z_unl), cfg.selftrain)
    provenance = dict(model.provenance)
    provenance.update(
        {
            "config_sha256": cfg.digest(),
            "train_corpus_sha256": corpus_digest(labeled + unlabeled),
            "label_fraction": cfg.label_fraction,
            "n_labeled": int(lab_idx.size),
            "n_unlabeled": int(len(Z_unl)),
            "selftrain_iterations": result.iterations,
            "selftrain_converged": result.converged,
            "supervised_only": supervised_only,
        }
    )
    trained = ModelFile(model.encoder_config, model.encoder, result.params, standardizer, provenance)
    return TrainOutcome(
        trained,
        result,
        _split_report(Z_all[test], y_all[test], trained),
        _split_report(Z_all[val], y_all[val], trained),
        int(lab_idx.size),
        int(len(Z_unl)),
    )


def predict_records(model: ModelFile, records: list[DatasetRecord]) -> list[tuple]:
    """Step 3: ``(idx, predicted label, ponzi probability)`` per record."""
    Z = embed_records(records, model)
    probs = predict_proba(model.standardizer(Z), model.classifier).reshape(-1, 2)
    return [(rec.idx, int(p.argmax()), float(p[1])) for rec, p in zip(records, probs)]


def evaluate_records(rows: list[tuple], records: list[DatasetRecord]) -> Optional[dict]:
    """Metrics report when every record carries a label, else ``None``."""
    if not records or any(r.label is None for r in records):
        return None
    return report(confusion([row[1] for row in rows], [r.label for r in records]))
