import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from triview.metrics import ConfusionMatrix, LengthMismatch, confusion, metrics, report

from oracles import count_confusion


def test_confusion_examples():
    assert confusion([1, 0, 1], [1, 0, 1]) == ConfusionMatrix(tp=2, fp=0, fn=0, tn=1)
    assert confusion([1, 1], [0, 0]) == ConfusionMatrix(fp=2)
    assert confusion([], []) == ConfusionMatrix()


def test_metric_examples():
    m = metrics(ConfusionMatrix(90, 10, 10, 890))
    assert (m.precision, m.recall, m.f1) == pytest.approx((0.9, 0.9, 0.9), abs=1e-12)
    assert m.accuracy == pytest.approx(0.98, abs=1e-12)
    m = metrics(ConfusionMatrix(3, 1, 2, 4))
    assert m.precision == pytest.approx(0.75) and m.recall == pytest.approx(0.6)
    assert m.f1 == pytest.approx(2 * 0.45 / 1.35, abs=1e-12)
    assert round(m.f1, 4) == 0.6667


def test_undefined_ratios():
    m = metrics(ConfusionMatrix(tn=5))
    assert m.precision is None and m.recall is None and m.f1 is None
    assert m.accuracy == 1.0
    m = metrics(ConfusionMatrix(fp=1, fn=1))
    assert m.precision == 0.0 and m.recall == 0.0 and m.f1 is None
    assert metrics(ConfusionMatrix()).accuracy is None


def test_length_mismatch_and_bad_values():
    with pytest.raises(LengthMismatch):
        confusion([1, 0], [1])
    with pytest.raises(ValueError):
        confusion([2], [1])
    with pytest.raises(ValueError):
        ConfusionMatrix(tp=-1)


def test_counting_oracle_on_random_vectors():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(0, 1001))
        pred, true = rng.integers(0, 2, n), rng.integers(0, 2, n)
        cm = confusion(pred, true)
        assert (cm.tp, cm.fp, cm.fn, cm.tn) == count_confusion(pred.tolist(), true.tolist())
        assert cm.total == n


@settings(max_examples=200, deadline=None)
@given(*(st.integers(0, 10_000) for _ in range(4)))
def test_f1_is_harmonic_mean(tp, fp, fn, tn):
    m = metrics(ConfusionMatrix(tp, fp, fn, tn))
    if m.f1 is not None:
        assert abs(1 / m.f1 - 0.5 * (1 / m.precision + 1 / m.recall)) < 1e-12 * (1 / m.f1)
        assert 0.0 <= m.f1 <= 1.0


def test_report_format():
    r = report(ConfusionMatrix(3, 1, 2, 4))
    assert r == {"precision": 75.0, "recall": 60.0, "f1": 66.7, "accuracy": 70.0, "tp": 3, "fp": 1, "fn": 2, "tn": 4}
    assert report(ConfusionMatrix(tn=3))["f1"] is None
