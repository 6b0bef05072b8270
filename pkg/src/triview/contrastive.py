"""Triple-view contrastive objective and the pretraining loop.

For a batch of ``N`` contracts with strong, weak and medium embeddings, every
index triple ``(m, n, h)`` is scored with the multi-cosine similarity. The
``N`` diagonal triples are positives; the other ``N**3 - N`` form one negative
set shared by all anchors::

    loss = -mean_i(sim_iii / tau) + logsumexp_{(m,n,h) negative}(sim_mnh / tau)

Positives never appear in the denominator.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp, softmax

from .augment import AugmentationConfig, make_views
from .encoder import EncoderConfig, EncoderParams, init_params, project, project_backward, source_features
from .equiangle import DegenerateGradient, ZeroVectorInput, multi_cosine_batch, multi_cosine_grad_batch
from .frontend import LexError, ParseError

__all__ = [
    "DegenerateBatch",
    "ContrastiveBatch",
    "LossReport",
    "PretrainConfig",
    "PretrainResult",
    "batch_loss",
    "batch_loss_grad",
    "batch_loss_and_grad",
    "view_features",
    "pretrain",
    "evaluate",
    "contract_seed",
]

log = logging.getLogger(__name__)

MAX_BATCH_RETRIES = 10


class DegenerateBatch(ValueError):
    pass


@dataclass
class ContrastiveBatch:
    strong: np.ndarray
    weak: np.ndarray
    medium: np.ndarray

    def __post_init__(self):
        self.strong, self.weak, self.medium = (
            np.atleast_2d(np.asarray(x, dtype=np.float64)) for x in (self.strong, self.weak, self.medium)
        )
        if not self.strong.shape == self.weak.shape == self.medium.shape:
            raise ValueError("the three views must have identical shapes")
        if self.N < 2:
            raise DegenerateBatch(f"batch size {self.N} < 2 leaves no negatives")
        for x in (self.strong, self.weak, self.medium):
            if not np.all(np.isfinite(x)):
                raise ValueError("embeddings must be finite")

    @property
    def N(self) -> int:
        return self.strong.shape[0]

    def triples(self):
        """Row-gathered (a, b, c) for every (m, n, h), in lexicographic order."""
        N = self.N
        m, n, h = (ix.ravel() for ix in np.indices((N, N, N)))
        return self.strong[m], self.weak[n], self.medium[h]


@dataclass
class LossReport:
    loss: float
    positive_sims: np.ndarray
    negative_sim_mean: float
    negative_count: int
    sims: np.ndarray = field(repr=False)  # (N, N, N)


def _negative_mask(N: int) -> np.ndarray:
    mask = np.ones((N, N, N), dtype=bool)
    mask[np.arange(N), np.arange(N), np.arange(N)] = False
    return mask


def _report(sims: np.ndarray, tau: float) -> LossReport:
    N = sims.shape[0]
    mask = _negative_mask(N)
    pos = sims[np.arange(N), np.arange(N), np.arange(N)]
    neg = sims[mask]
    loss = -pos.mean() / tau + logsumexp(neg / tau)
    return LossReport(float(loss), pos, float(neg.mean()), int(neg.size), sims)


def batch_loss(batch: ContrastiveBatch, tau: float) -> LossReport:
    if tau <= 0:
        raise ValueError("tau must be positive")
    N = batch.N
    sims = multi_cosine_batch(*batch.triples()).reshape(N, N, N)
    return _report(sims, tau)


def batch_loss_and_grad(batch: ContrastiveBatch, tau: float, directions: str = "span"):
    """Loss report plus gradients w.r.t. the strong, weak and medium rows."""
    report = batch_loss(batch, tau)
    N = batch.N
    mask = _negative_mask(N)
    weights = np.zeros((N, N, N))
    weights[mask] = softmax(report.sims[mask] / tau) / tau
    weights[np.arange(N), np.arange(N), np.arange(N)] = -1.0 / (N * tau)
    try:
        ga, gb, gc = multi_cosine_grad_batch(*batch.triples(), directions=directions)
    except DegenerateGradient as exc:
        triples = [tuple(int(k) for k in np.unravel_index(i, (N, N, N))) for i in exc.indices]
        raise DegenerateGradient(f"degenerate similarity at triples {triples[:5]}", triples) from exc
    d = ga.shape[1]
    w = weights.reshape(N, N, N, 1)
    grad_strong = (w * ga.reshape(N, N, N, d)).sum(axis=(1, 2))
    grad_weak = (w * gb.reshape(N, N, N, d)).sum(axis=(0, 2))
    grad_medium = (w * gc.reshape(N, N, N, d)).sum(axis=(0, 1))
    return report, (grad_strong, grad_weak, grad_medium)


def batch_loss_grad(batch: ContrastiveBatch, tau: float, directions: str = "span"):
    return batch_loss_and_grad(batch, tau, directions)[1]


@dataclass(frozen=True)
class PretrainConfig:
    tau: float = 2.0
    batch_size: int = 8
    steps: int = 500
    learning_rate: float = 1e-2
    seed: int = 0

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.batch_size < 2:
            raise ValueError("batch_size must be >= 2")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")


@dataclass
class PretrainResult:
    params: EncoderParams
    trace: list[tuple[int, float, float, float]]  # step, loss, pos mean, neg mean
    skipped: int
    used: int


def contract_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


def view_features(
    corpus: Sequence[str], aug: AugmentationConfig, enc: EncoderConfig
) -> tuple[np.ndarray, list[int]]:
    """Features of the (strong, weak, medium) views of every parseable source.

    Returns an ``(n, 3, feature_dim)`` array and the corpus indices kept.
    Each contract gets its own augmentation seed derived from ``aug.seed``.
    """
    feats, kept = [], []
    for i, source in enumerate(corpus):
        try:
            views = make_views(source, replace(aug, seed=contract_seed(aug.seed, i)))
        except (ParseError, LexError) as exc:
            log.info("skipping corpus item %d: %s", i, exc)
            continue
        strong, medium, weak = views.sources()
        feats.append([source_features(s, enc) for s in (strong, weak, medium)])
        kept.append(i)
    return np.array(feats).reshape(len(kept), 3, enc.feature_dim), kept


def _embed(features: np.ndarray, params: EncoderParams) -> ContrastiveBatch:
    return ContrastiveBatch(*(project(features[:, v], params) for v in range(3)))


def pretrain(
    corpus: Sequence[str],
    aug: AugmentationConfig,
    enc: EncoderConfig,
    cfg: PretrainConfig,
    params: Optional[EncoderParams] = None,
    features: Optional[np.ndarray] = None,
) -> PretrainResult:
    """Fit the projection head with plain gradient descent.

    The hashed featurization is frozen, so view features are computed once.
    A batch whose similarities are degenerate is re-drawn, at most
    ``MAX_BATCH_RETRIES`` times per step.
    """
    if features is None:
        features, kept = view_features(corpus, aug, enc)
        skipped = len(corpus) - len(kept)
    else:
        skipped = 0
    n = features.shape[0]
    if n < cfg.batch_size:
        raise ValueError(f"only {n} usable contracts for batch size {cfg.batch_size}")
    params = init_params(enc, cfg.seed) if params is None else params.copy()
    rng = np.random.default_rng(cfg.seed)
    trace = []
    for step in range(cfg.steps):
        for _ in range(MAX_BATCH_RETRIES + 1):
            idx = np.sort(rng.choice(n, size=cfg.batch_size, replace=False))
            batch_feats = features[idx]
            try:
                report, grads = batch_loss_and_grad(_embed(batch_feats, params), cfg.tau)
                break
            except (DegenerateGradient, ZeroVectorInput) as exc:
                log.debug("step %d: re-drawing degenerate batch (%s)", step, exc)
        else:
            raise DegenerateBatch(f"step {step}: {MAX_BATCH_RETRIES} re-drawn batches were all degenerate")
        total = None
        for v in range(3):
            g = project_backward(batch_feats[:, v], params, grads[v])
            total = g if total is None else EncoderParams(*(x + y for x, y in zip(total.arrays(), g.arrays())))
        params = EncoderParams(*(p - cfg.learning_rate * g for p, g in zip(params.arrays(), total.arrays())))
        neg = report.negative_sim_mean
        trace.append((step, report.loss, float(report.positive_sims.mean()), neg))
    return PretrainResult(params, trace, skipped, n)


def evaluate(features: np.ndarray, params: EncoderParams, tau: float) -> LossReport:
    """Loss report of a fixed feature batch under ``params``."""
    return batch_loss(_embed(features, params), tau)
