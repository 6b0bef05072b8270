import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from triview.classifier import (
    ClassifierParams,
    PseudoLabelSet,
    SelfTrainConfig,
    SingleClassPool,
    class_loss,
    class_loss_grad,
    fit,
    init_classifier,
    predict_proba,
    pseudo_loss,
    select_pseudo,
    self_train_run,
    supervised_loss,
)


def softmax_oracle(logits):
    exps = [math.exp(v - max(logits)) for v in logits]
    return [e / sum(exps) for e in exps]


def params_with_probs(probs):
    """1-d embeddings z_i = logit(p_i) with W=(0,1), b=0 give ponzi probability p_i."""
    Z = np.array([[math.log(p / (1 - p))] for p in probs])
    return Z, ClassifierParams(np.array([[0.0], [1.0]]), np.zeros(2))


def test_predict_proba_examples():
    p = ClassifierParams(np.zeros((2, 4)), np.zeros(2))
    assert np.array_equal(predict_proba(np.ones(4), p), [0.5, 0.5])
    p = ClassifierParams(np.zeros((2, 4)), np.array([0.0, 20.0]))
    assert predict_proba(np.ones(4), p)[1] > 0.9999


def test_predict_proba_matches_softmax_oracle():
    rng = np.random.default_rng(0)
    p = ClassifierParams(rng.normal(size=(2, 6)), rng.normal(size=2))
    Z = rng.normal(size=(20, 6))
    probs = predict_proba(Z, p)
    for z, got in zip(Z, probs):
        logits = [sum(p.W[k, j] * z[j] for j in range(6)) + p.b[k] for k in range(2)]
        assert np.allclose(got, softmax_oracle(logits), rtol=0, atol=1e-12)
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-12)


def test_supervised_loss_examples():
    Z, p = params_with_probs([0.9, 0.8, 0.6])
    assert supervised_loss(Z, [1, 1, 1], p) == pytest.approx(-(math.log(0.9) + math.log(0.8) + math.log(0.6)), abs=1e-12)
    # hand computation: 0.10536 + 0.22314 + 0.51083
    assert supervised_loss(Z, [1, 1, 1], p) == pytest.approx(0.83933, abs=1e-5)
    uniform = ClassifierParams(np.zeros((2, 3)), np.zeros(2))
    assert supervised_loss(np.ones((7, 3)), [0, 1] * 3 + [0], uniform) == pytest.approx(7 * math.log(2), abs=1e-12)
    confident = ClassifierParams(np.zeros((2, 1)), np.array([0.0, 800.0]))
    assert supervised_loss(np.ones((2, 1)), [1, 1], confident) == 0.0
    assert supervised_loss(np.zeros((0, 1)), [], confident) == 0.0


def test_select_pseudo_examples():
    probs = np.array([(0.95, 0.05), (0.6, 0.4), (0.08, 0.92)])
    S = select_pseudo(probs, 0.9)
    assert S.indices.tolist() == [0, 2] and S.labels.tolist() == [0, 1]
    assert np.all(S.confidences >= 0.9)
    assert len(select_pseudo(probs, 1.0)) == 0
    assert select_pseudo(probs, 0.51).indices.tolist() == [0, 1, 2]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=30), st.floats(0.51, 1.0), st.floats(0.51, 1.0))
def test_select_pseudo_is_monotone_in_theta(ps, t1, t2):
    lo, hi = sorted((t1, t2))
    probs = np.array([(1 - q, q) for q in ps])
    assert set(select_pseudo(probs, hi).indices) <= set(select_pseudo(probs, lo).indices)


def test_pseudo_loss_examples():
    Z, p = params_with_probs([0.9, 0.3])
    assert pseudo_loss(Z, PseudoLabelSet.empty(), p) == 0.0
    one = PseudoLabelSet(np.array([0]), np.array([1]), np.array([0.9]))
    assert pseudo_loss(Z, one, p) == pytest.approx(-math.log(0.9), abs=1e-12)
    two = PseudoLabelSet(np.array([0, 1]), np.array([1, 0]), np.array([0.9, 0.7]))
    assert pseudo_loss(Z, two, p) == supervised_loss(Z, [1, 0], p)
    # entropy variant ignores the labels
    flipped = PseudoLabelSet(np.array([0, 1]), np.array([0, 1]), np.array([0.9, 0.7]))
    assert pseudo_loss(Z, two, p, "entropy") == pseudo_loss(Z, flipped, p, "entropy")


def random_problem(seed, d=5):
    rng = np.random.default_rng(seed)
    Z_lab = rng.normal(size=(8, d))
    y = np.array([0, 1] * 4)
    Z_unl = rng.normal(size=(6, d))
    S = PseudoLabelSet(np.array([1, 3, 4]), np.array([1, 0, 1]), np.ones(3))
    p = ClassifierParams(rng.normal(size=(2, d)), rng.normal(size=2))
    return Z_lab, y, Z_unl, S, p


@pytest.mark.parametrize("mode", ["hard", "entropy"])
def test_class_loss_decomposition(mode):
    Z_lab, y, Z_unl, S, p = random_problem(1)
    cfg = SelfTrainConfig(lambda1=1.3, lambda2=0.85, pseudo_loss=mode)
    total = class_loss(Z_lab, y, Z_unl, S, p, cfg)
    parts = 1.3 * supervised_loss(Z_lab, y, p) + 0.85 * pseudo_loss(Z_unl, S, p, mode)
    assert abs(total - parts) < 1e-12


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("mode", ["hard", "entropy"])
def test_class_loss_gradient_matches_finite_differences(seed, mode):
    Z_lab, y, Z_unl, S, p = random_problem(seed)
    cfg = SelfTrainConfig(pseudo_loss=mode)
    g = class_loss_grad(Z_lab, y, Z_unl, S, p, cfg)
    h = 1e-6
    for name in ("W", "b"):
        arr, garr = getattr(p, name), getattr(g, name)
        for idx in np.ndindex(arr.shape):
            old = arr[idx]
            arr[idx] = old + h
            up = class_loss(Z_lab, y, Z_unl, S, p, cfg)
            arr[idx] = old - h
            down = class_loss(Z_lab, y, Z_unl, S, p, cfg)
            arr[idx] = old
            fd = (up - down) / (2 * h)
            assert abs(fd - garr[idx]) <= 1e-5 * max(abs(fd), 1e-3)


def blobs(seed, n, d=4, shift=2.5):
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 2
    Z = rng.normal(size=(n, d))
    Z[:, 0] += np.where(y == 1, shift, -shift)
    return Z, y


def test_single_class_pool():
    Z, _ = blobs(0, 6)
    with pytest.raises(SingleClassPool):
        self_train_run(Z, np.zeros(6, dtype=int), None, SelfTrainConfig())
    with pytest.raises(ValueError):
        supervised_loss(Z, [2] * 6, init_classifier(4, 0))


def test_empty_unlabeled_pool_reduces_to_supervised():
    Z, y = blobs(1, 20)
    cfg = SelfTrainConfig(inner_epochs=50)
    result = self_train_run(Z, y, np.zeros((0, 4)), cfg)
    assert result.params == fit(Z, y, cfg)
    assert len(result.pseudo) == 0 and result.converged


def test_zero_iterations_returns_initial_fit():
    Z, y = blobs(2, 20)
    Zu, _ = blobs(3, 30)
    cfg = SelfTrainConfig(max_iterations=0, inner_epochs=50)
    result = self_train_run(Z, y, Zu, cfg)
    assert result.params == fit(Z, y, cfg) and result.iterations == 0


def test_self_training_terminates_and_is_deterministic():
    Z, y = blobs(4, 16)
    Zu, _ = blobs(5, 80)
    cfg = SelfTrainConfig(max_iterations=6, inner_epochs=100)
    a = self_train_run(Z, y, Zu, cfg)
    b = self_train_run(Z, y, Zu, cfg)
    assert a.iterations <= 6 and len(a.history) == a.iterations
    assert a.params == b.params and a.history == b.history
    assert len(a.pseudo) > 0


def test_self_training_not_worse_on_separable_blobs():
    Z_all, y_all = blobs(6, 400, shift=1.5)
    lab = np.sort(np.random.default_rng(8).permutation(400)[:100])  # 25% labeled
    unl = np.setdiff1d(np.arange(400), lab)
    Z_test, y_test = blobs(7, 400, shift=1.5)
    cfg = SelfTrainConfig(inner_epochs=200)

    def f1(params):
        pred = predict_proba(Z_test, params).argmax(axis=1)
        tp = np.sum((pred == 1) & (y_test == 1))
        return 2 * tp / (np.sum(pred == 1) + np.sum(y_test == 1))

    supervised = fit(Z_all[lab], y_all[lab], cfg)
    selftrained = self_train_run(Z_all[lab], y_all[lab], Z_all[unl], cfg).params
    assert f1(selftrained) >= f1(supervised)


def test_params_serialization():
    p = init_classifier(3, 9)
    assert ClassifierParams.from_dict(p.to_dict()) == p
    with pytest.raises(ValueError):
        ClassifierParams(np.zeros((3, 2)), np.zeros(2))
    with pytest.raises(ValueError):
        SelfTrainConfig(theta=0.5)
