"""End-to-end acceptance criteria, one test per criterion.

Each test records a one-line summary; the conftest hook prints one
pass/fail line per criterion at the end of the run.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from triview.augment import AugmentationConfig, make_views
from triview.classifier import PseudoLabelSet, SelfTrainConfig, class_loss, class_loss_grad, ClassifierParams
from triview.contrastive import ContrastiveBatch, batch_loss, batch_loss_grad
from triview.equiangle import multi_cosine, multi_cosine_batch, multi_cosine_grad_batch, solve_batch
from triview.frontend import ast as A, emit, parse_source
from triview.metrics import ConfusionMatrix, confusion, metrics
from triview.pipeline import RunConfig, apply_overrides, load_dataset, pretrain_model, train_model
from triview.pipeline.cli import main

import conftest
from oracles import alpha_equivalent, count_confusion, equal_angle_oracle, naive_batch_loss


def record(record_property, n, ok, detail):
    record_property("detail", detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def residuals(a, b, c, l, seed):
    v, _, _, _ = solve_batch(a, b, c, l)
    unit = lambda x: x / np.linalg.norm(x, axis=1, keepdims=True)  # noqa: E731
    vu = unit(v)
    cos = np.stack([np.sum(vu * unit(x), axis=1) for x in (a, b, c)], axis=1)
    return np.max(np.ptp(cos, axis=1)), np.max(np.abs(np.linalg.norm(v, axis=1) - l) / l)


def test_criterion_01_equiangularity(record_property):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    cos3, norm3 = residuals(*rng.normal(size=(3, 10_000, 3)), 1.7, 1)
    cos32, norm32 = residuals(*rng.normal(size=(3, 1_000, 32)), 0.3, 2)
    elapsed = time.perf_counter() - start
    worst_cos, worst_norm = max(cos3, cos32), max(norm3, norm32)
    ok = worst_cos < 1e-9 and worst_norm < 1e-9 and elapsed < 5.0
    record(record_property, 1, ok, f"cos residual {worst_cos:.1e}, norm residual {worst_norm:.1e}·l, {elapsed:.2f}s")


def test_criterion_02_oracle_equivalence(record_property):
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    worst = 0.0
    for i in range(1000):
        d = (3, 8, 32)[i % 3]
        a, b, c = rng.normal(size=(3, d))
        worst = max(worst, abs(multi_cosine(a, b, c) - equal_angle_oracle(a, b, c)[0]))
    elapsed = time.perf_counter() - start
    record(record_property, 2, worst < 1e-8 and elapsed < 60.0, f"max |diff| {worst:.1e} over 1000 triples, {elapsed:.1f}s")


def test_criterion_03_symmetric_cases(record_property):
    ortho = multi_cosine(*np.eye(3))
    a = np.array([0.4, -2.0, 1.0])
    parallel = multi_cosine(a, 3 * a, 0.5 * a)
    err = max(abs(ortho - 1 / math.sqrt(3)), abs(parallel - 1.0))
    record(record_property, 3, err < 1e-12, f"orthonormal {ortho!r}, parallel {parallel!r}")


def _rel(got, fd):
    return np.max(np.abs(got - fd)) / np.max(np.abs(fd))


def _fd(f, arrays, h):
    out = []
    for arr in arrays:
        g = np.zeros_like(arr)
        for idx in np.ndindex(arr.shape):
            old = arr[idx]
            arr[idx] = old + h
            up = f()
            arr[idx] = old - h
            down = f()
            arr[idx] = old
            g[idx] = (up - down) / (2 * h)
        out.append(g)
    return out


def test_criterion_04_gradients(record_property):
    start = time.perf_counter()
    worst = {"multi_cosine": 0.0, "batch_loss": 0.0, "L_class": 0.0}
    for seed in range(50):
        rng = np.random.default_rng(1000 + seed)
        a, b, c = rng.normal(size=(3, 1, 7))
        got = multi_cosine_grad_batch(a, b, c)
        fd = _fd(lambda: multi_cosine(a[0], b[0], c[0]), [a, b, c], 1e-6)
        worst["multi_cosine"] = max(worst["multi_cosine"], max(_rel(g, f) for g, f in zip(got, fd)))

        batch = ContrastiveBatch(*rng.normal(size=(3, 3, 8)))
        got = batch_loss_grad(batch, 2.0)
        fd = _fd(lambda: batch_loss(batch, 2.0).loss, [batch.strong, batch.weak, batch.medium], 1e-6)
        worst["batch_loss"] = max(worst["batch_loss"], max(_rel(g, f) for g, f in zip(got, fd)))

        Z_lab, Z_unl = rng.normal(size=(8, 5)), rng.normal(size=(6, 5))
        y = np.array([0, 1] * 4)
        S = PseudoLabelSet(np.array([0, 2, 5]), np.array([1, 0, 1]), np.ones(3))
        p = ClassifierParams(rng.normal(size=(2, 5)), rng.normal(size=2))
        cfg = SelfTrainConfig()
        g = class_loss_grad(Z_lab, y, Z_unl, S, p, cfg)
        fd = _fd(lambda: class_loss(Z_lab, y, Z_unl, S, p, cfg), [p.W, p.b], 1e-6)
        worst["L_class"] = max(worst["L_class"], _rel(g.W, fd[0]), _rel(g.b, fd[1]))
    elapsed = time.perf_counter() - start
    ok = max(worst.values()) < 1e-4 and elapsed < 30.0
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f" (50 seeds, {elapsed:.1f}s)"
    record(record_property, 4, ok, detail)


def test_criterion_05_loss_oracle(record_property):
    rng = np.random.default_rng(5)
    worst, counts = 0.0, {}
    for N in (2, 3, 4, 5):
        S, W, M = rng.normal(size=(3, N, 3))
        report = batch_loss(ContrastiveBatch(S, W, M), 2.0)
        worst = max(worst, abs(report.loss - naive_batch_loss(S, W, M, 2.0)))
        counts[N] = report.negative_count
    ok = worst < 1e-12 and all(counts[N] == N**3 - N for N in counts) and counts[4] == 60
    record(record_property, 5, ok, f"max |diff| {worst:.1e}, negatives {counts}")


def test_criterion_06_log6(record_property):
    u = np.array([[1.0, 2.0, 2.0]] * 2)
    loss = batch_loss(ContrastiveBatch(u, u, u), 2.0).loss
    err = abs(loss - math.log(6))
    record(record_property, 6, err < 1e-12, f"loss {loss!r}, |loss - log 6| {err:.1e}")


@pytest.fixture(scope="module")
def pretrained():
    cfg = apply_overrides(RunConfig(), {"pretrain.steps": "200"})
    start = time.perf_counter()
    model, result = pretrain_model(load_dataset("bundled:corpus"), cfg)
    return cfg, model, result, time.perf_counter() - start


def test_criterion_07_contrastive_pressure(record_property, pretrained):
    # With similarities confined to [0, 1] the loss at tau=2 lies in
    # [log(N^3-N) - 1/tau, log(N^3-N) + 1/tau], so halving it is out of reach.
    cfg, _, result, elapsed = pretrained
    first, last = result.trace[0], result.trace[-1]
    halved = last[1] <= 0.5 * first[1]
    separated = last[2] > last[3]
    ok = halved and separated and elapsed < 120.0
    detail = (
        f"loss {first[1]:.4f} -> {last[1]:.4f} (needs <= {0.5 * first[1]:.4f}), "
        f"pos {last[2]:.4f} vs neg {last[3]:.4f}, {elapsed:.1f}s"
    )
    record(record_property, 7, ok, detail)


def _f1(rep):
    f1 = metrics(ConfusionMatrix(rep["tp"], rep["fp"], rep["fn"], rep["tn"])).f1
    return 0.0 if f1 is None else f1


def test_criterion_08_semi_supervision(record_property, pretrained):
    cfg, model, _, _ = pretrained
    cfg = apply_overrides(cfg, {"label_fraction": "0.25"})
    labeled = load_dataset("bundled:labeled")
    start = time.perf_counter()
    semi = train_model(model, labeled, None, cfg)
    sup = train_model(model, labeled, None, cfg, supervised_only=True)
    elapsed = time.perf_counter() - start
    f_semi, f_sup = _f1(semi.test_report), _f1(sup.test_report)
    ok = f_semi >= f_sup and elapsed < 120.0
    detail = (
        f"self-train F1 {100 * f_semi:.1f} vs supervised-only {100 * f_sup:.1f} "
        f"({semi.n_labeled} labeled, {semi.n_unlabeled} unlabeled, {elapsed:.1f}s)"
    )
    record(record_property, 8, ok, detail)


def test_criterion_09_metrics(record_property):
    rng = np.random.default_rng(9)
    mismatches = 0
    for _ in range(100):
        n = int(rng.integers(1, 1001))
        pred, true = rng.integers(0, 2, n), rng.integers(0, 2, n)
        cm = confusion(pred, true)
        mismatches += (cm.tp, cm.fp, cm.fn, cm.tn) != count_confusion(pred.tolist(), true.tolist())
    m1 = metrics(ConfusionMatrix(90, 10, 10, 890))
    m2 = metrics(ConfusionMatrix(3, 1, 2, 4))
    m3 = metrics(ConfusionMatrix(tn=4))
    hand = (
        (m1.precision, m1.recall, m1.f1, m1.accuracy) == (0.9, 0.9, 0.9, 0.98)
        and (m2.precision, m2.recall) == (0.75, 0.6)
        and abs(m2.f1 - 2 * 0.45 / 1.35) < 1e-15
        and (m3.precision, m3.recall, m3.f1, m3.accuracy) == (None, None, None, 1.0)
    )
    record(record_property, 9, mismatches == 0 and hand, f"{mismatches} oracle mismatches in 100 vectors, hand cases {'exact' if hand else 'WRONG'}")


def test_criterion_10_frontend_closure(record_property, corpus):
    cfg = AugmentationConfig(seed=10)
    failures = []
    for i, src in enumerate(corpus):
        unit = parse_source(src)
        if parse_source(emit(unit)) != unit:
            failures.append((i, "roundtrip"))
        views = make_views(src, cfg)
        for name, (text, view_unit) in zip(("strong", "medium", "weak"), (views.strong, views.medium, views.weak)):
            if parse_source(text) != view_unit:
                failures.append((i, f"{name} reparse"))
        for fn in (n for n in views.medium[1].walk() if isinstance(n, A.FunctionDef) and n.body is not None):
            stmts = fn.body.statements
            if not (len(stmts) == 0 or (len(stmts) == 1 and isinstance(stmts[0], A.Return))):
                failures.append((i, "medium shape"))
        if not alpha_equivalent(emit(unit), views.weak[0]):
            failures.append((i, "weak alpha"))
    record(record_property, 10, not failures and len(corpus) >= 40, f"{len(corpus)} contracts, failures {failures[:5]}")


def _end_to_end(d):
    d.mkdir()
    m = str(d / "model.json")
    fast = ["--pretrain.steps", "50", "--label_fraction", "0.25"]
    codes = [
        main(["pretrain", "bundled:corpus", "--out", m, *fast]),
        main(["train", "--model", m, "--labeled", "bundled:labeled", "--report", str(d / "train.json"), *fast]),
        main(["predict", "--model", m, "--data", "bundled:labeled", "--out", str(d / "pred.csv"), "--report", str(d / "report.json")]),
    ]
    return codes


def test_criterion_11_determinism(record_property, tmp_path):
    codes = _end_to_end(tmp_path / "a") + _end_to_end(tmp_path / "b")
    names = ("model.json", "train.json", "pred.csv", "report.json")
    differing = [n for n in names if (tmp_path / "a" / n).read_bytes() != (tmp_path / "b" / n).read_bytes()]
    ok = codes == [0] * 6 and not differing
    record(record_property, 11, ok, f"exit codes {codes}, differing artifacts {differing}")


def test_criterion_12_suite_runtime(record_property):
    elapsed = time.perf_counter() - conftest.SESSION_START
    record(record_property, 12, elapsed < 300.0, f"suite wall time {elapsed:.1f}s (limit 300s)")
