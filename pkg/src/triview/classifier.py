"""Linear softmax classifier with confidence-thresholded self-training.

Class 0 is non-ponzi, class 1 is ponzi. Losses are sums over samples; the
optimizer divides the step by the training-set size so one learning rate
works for pools of any size.

Each fit starts from the same seeded initialization, so a self-trained model
and a supervised-only model trained with the same config spend an identical
optimization budget on their final fit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import log_softmax, softmax

__all__ = [
    "SingleClassPool",
    "ClassifierParams",
    "SelfTrainConfig",
    "PseudoLabelSet",
    "SelfTrainResult",
    "init_classifier",
    "predict_proba",
    "supervised_loss",
    "select_pseudo",
    "pseudo_loss",
    "class_loss",
    "class_loss_grad",
    "fit",
    "self_train",
    "self_train_run",
]

LOG_FLOOR = 1e-300
NON_PONZI, PONZI = 0, 1


class SingleClassPool(ValueError):
    pass


@dataclass
class ClassifierParams:
    W: np.ndarray  # (2, d)
    b: np.ndarray  # (2,)

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        if self.W.ndim != 2 or self.W.shape[0] != 2 or self.b.shape != (2,):
            raise ValueError(f"bad classifier shapes W{self.W.shape} b{self.b.shape}")
        if not (np.all(np.isfinite(self.W)) and np.all(np.isfinite(self.b))):
            raise ValueError("classifier parameters must be finite")

    @property
    def dim(self) -> int:
        return self.W.shape[1]

    def copy(self) -> "ClassifierParams":
        return ClassifierParams(self.W.copy(), self.b.copy())

    def __eq__(self, other) -> bool:
        if not isinstance(other, ClassifierParams):
            return NotImplemented
        return np.array_equal(self.W, other.W) and np.array_equal(self.b, other.b)

    def to_dict(self) -> dict:
        return {"W": self.W.tolist(), "b": self.b.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "ClassifierParams":
        W = np.array(data["W"], dtype=np.float64).reshape(2, -1)
        return cls(W, np.array(data["b"], dtype=np.float64))


def init_classifier(dim: int, seed: int, scale: float = 0.01) -> ClassifierParams:
    rng = np.random.default_rng(seed)
    return ClassifierParams(rng.normal(0.0, scale, (2, dim)), np.zeros(2))


@dataclass(frozen=True)
class SelfTrainConfig:
    theta: float = 0.9
    lambda1: float = 1.0
    lambda2: float = 0.85
    max_iterations: int = 10
    inner_epochs: int = 300
    learning_rate: float = 0.5
    seed: int = 0
    pseudo_loss: str = "hard"  # "hard" | "entropy"

    def __post_init__(self):
        if not 0.5 < self.theta <= 1.0:
            raise ValueError("theta must lie in (0.5, 1]")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("lambda1 and lambda2 must be non-negative")
        if self.max_iterations < 0 or self.inner_epochs < 0:
            raise ValueError("iteration counts must be non-negative")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.pseudo_loss not in ("hard", "entropy"):
            raise ValueError("pseudo_loss must be 'hard' or 'entropy'")


@dataclass
class PseudoLabelSet:
    indices: np.ndarray
    labels: np.ndarray
    confidences: np.ndarray

    def __len__(self) -> int:
        return len(self.indices)

    @classmethod
    def empty(cls) -> "PseudoLabelSet":
        return cls(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0))

    def assignment(self, pool_size: int) -> np.ndarray:
        """Label per pool entry, -1 where unselected."""
        out = np.full(pool_size, -1, dtype=np.int64)
        out[self.indices] = self.labels
        return out


def _logits(Z: np.ndarray, p: ClassifierParams) -> np.ndarray:
    Z = np.asarray(Z, dtype=np.float64)
    if Z.shape[-1] != p.dim:
        raise ValueError(f"embedding has {Z.shape[-1]} dims, classifier expects {p.dim}")
    return Z @ p.W.T + p.b


def predict_proba(Z: np.ndarray, p: ClassifierParams) -> np.ndarray:
    """``softmax(W z + b)`` as (non-ponzi, ponzi); ``Z`` is one vector or a row batch."""
    return softmax(_logits(Z, p), axis=-1)


def _check_labels(y) -> np.ndarray:
    y = np.asarray(y, dtype=np.int64)
    if y.size and not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 or 1")
    return y


def supervised_loss(Z: np.ndarray, y, p: ClassifierParams) -> float:
    y = _check_labels(y)
    if y.size == 0:
        return 0.0
    probs = predict_proba(np.atleast_2d(Z), p)
    return float(-np.log(np.maximum(probs[np.arange(y.size), y], LOG_FLOOR)).sum())


def select_pseudo(probas: np.ndarray, theta: float) -> PseudoLabelSet:
    probas = np.asarray(probas, dtype=np.float64).reshape(-1, 2)
    conf = probas.max(axis=1)
    idx = np.flatnonzero(conf >= theta)
    return PseudoLabelSet(idx.astype(np.int64), probas[idx].argmax(axis=1).astype(np.int64), conf[idx])


def pseudo_loss(Z_unlabeled: np.ndarray, S: PseudoLabelSet, p: ClassifierParams, mode: str = "hard") -> float:
    if len(S) == 0:
        return 0.0
    Zs = np.atleast_2d(Z_unlabeled)[S.indices]
    if mode == "hard":
        return supervised_loss(Zs, S.labels, p)
    logp = log_softmax(_logits(Zs, p), axis=-1)
    return float(-(np.exp(logp) * logp).sum())


def class_loss(Z_lab, y, Z_unl, S: PseudoLabelSet, p: ClassifierParams, cfg: SelfTrainConfig) -> float:
    """``lambda1 * L_sup + lambda2 * L_pseudo``."""
    return cfg.lambda1 * supervised_loss(Z_lab, y, p) + cfg.lambda2 * pseudo_loss(Z_unl, S, p, cfg.pseudo_loss)


def _ce_logit_grad(Z, y, p):
    probs = predict_proba(Z, p)
    probs[np.arange(len(y)), y] -= 1.0
    return probs


def class_loss_grad(Z_lab, y, Z_unl, S: PseudoLabelSet, p: ClassifierParams, cfg: SelfTrainConfig) -> ClassifierParams:
    """Analytic gradient of :func:`class_loss` w.r.t. ``W`` and ``b``."""
    y = _check_labels(y)
    gW = np.zeros_like(p.W)
    gb = np.zeros_like(p.b)
    if y.size:
        Z = np.atleast_2d(Z_lab)
        G = cfg.lambda1 * _ce_logit_grad(Z, y, p)
        gW += G.T @ Z
        gb += G.sum(axis=0)
    if len(S):
        Zs = np.atleast_2d(Z_unl)[S.indices]
        if cfg.pseudo_loss == "hard":
            G = _ce_logit_grad(Zs, S.labels, p)
        else:
            logp = log_softmax(_logits(Zs, p), axis=-1)
            probs = np.exp(logp)
            H = -(probs * logp).sum(axis=1, keepdims=True)
            G = -probs * (logp + H)
        G = cfg.lambda2 * G
        gW += G.T @ Zs
        gb += G.sum(axis=0)
    return ClassifierParams(gW, gb)


def fit(
    Z_lab: np.ndarray,
    y,
    cfg: SelfTrainConfig,
    Z_unl: Optional[np.ndarray] = None,
    S: Optional[PseudoLabelSet] = None,
) -> ClassifierParams:
    """Full-batch gradient descent on ``L_class`` from the seeded initialization."""
    Z_lab = np.atleast_2d(np.asarray(Z_lab, dtype=np.float64))
    y = _check_labels(y)
    S = PseudoLabelSet.empty() if S is None else S
    p = init_classifier(Z_lab.shape[1], cfg.seed)
    step = cfg.learning_rate / max(1, y.size + len(S))
    for _ in range(cfg.inner_epochs):
        g = class_loss_grad(Z_lab, y, Z_unl, S, p, cfg)
        p = ClassifierParams(p.W - step * g.W, p.b - step * g.b)
    return p


@dataclass
class SelfTrainResult:
    params: ClassifierParams
    pseudo: PseudoLabelSet
    iterations: int
    converged: bool
    history: list[int] = field(default_factory=list)  # pseudo-set size per iteration


def self_train_run(Z_lab, y, Z_unl, cfg: SelfTrainConfig) -> SelfTrainResult:
    """Supervised fit, then alternate pseudo-label selection and refitting.

    Stops once the label assignment over the unlabeled pool (including which
    entries are unselected) repeats, or after ``max_iterations`` refits.
    """
    Z_lab = np.atleast_2d(np.asarray(Z_lab, dtype=np.float64))
    y = _check_labels(y)
    if y.size == 0 or np.unique(y).size < 2:
        raise SingleClassPool("the labeled pool must contain both classes")
    Z_unl = np.zeros((0, Z_lab.shape[1])) if Z_unl is None else np.asarray(Z_unl, dtype=np.float64).reshape(-1, Z_lab.shape[1])

    params = fit(Z_lab, y, cfg)
    S = PseudoLabelSet.empty()
    assignment = S.assignment(len(Z_unl))
    history: list[int] = []
    converged = False
    iterations = 0
    while iterations < cfg.max_iterations:
        candidate = select_pseudo(predict_proba(Z_unl, params), cfg.theta) if len(Z_unl) else PseudoLabelSet.empty()
        new_assignment = candidate.assignment(len(Z_unl))
        if np.array_equal(new_assignment, assignment):
            converged = True
            break
        S, assignment = candidate, new_assignment
        params = fit(Z_lab, y, cfg, Z_unl, S)
        history.append(len(S))
        iterations += 1
    return SelfTrainResult(params, S, iterations, converged, history)


def self_train(Z_lab, y, Z_unl, cfg: SelfTrainConfig) -> ClassifierParams:
    return self_train_run(Z_lab, y, Z_unl, cfg).params
