"""Line-delimited JSON datasets, splits and label subsampling."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Union

import numpy as np

__all__ = [
    "DataError",
    "MalformedRecord",
    "DuplicateIdx",
    "MissingLabel",
    "DatasetRecord",
    "load_dataset",
    "save_dataset",
    "bundled_path",
    "require_labels",
    "ingest_directory",
    "split_indices",
    "label_subset",
    "corpus_digest",
]

Idx = Union[str, int]


class DataError(ValueError):
    pass


class MalformedRecord(DataError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DuplicateIdx(DataError):
    def __init__(self, idx: Idx, line: int):
        super().__init__(f"line {line}: duplicate idx {idx!r}")
        self.idx = idx
        self.line = line


class MissingLabel(DataError):
    def __init__(self, idx: Idx):
        super().__init__(f"record {idx!r} has no label")
        self.idx = idx


@dataclass(frozen=True)
class DatasetRecord:
    idx: Idx
    source: str
    label: Optional[int] = None

    def to_json(self) -> str:
        data = {"idx": self.idx, "source": self.source}
        if self.label is not None:
            data["label"] = self.label
        return json.dumps(data, sort_keys=True)


def bundled_path(name: str) -> Path:
    """Path of a bundled dataset, e.g. ``bundled_path("corpus")``."""
    path = Path(str(resources.files("triview") / "data" / f"{name}.jsonl"))
    if not path.exists():
        raise FileNotFoundError(f"no bundled dataset named {name!r}")
    return path


def _resolve(path) -> Path:
    text = str(path)
    if text.startswith("bundled:"):
        return bundled_path(text.split(":", 1)[1])
    return Path(path)


def _record(obj, lineno: int) -> DatasetRecord:
    if not isinstance(obj, dict):
        raise MalformedRecord(lineno, "record is not an object")
    unknown = set(obj) - {"idx", "source", "label"}
    if unknown:
        raise MalformedRecord(lineno, f"unknown fields {sorted(unknown)}")
    idx = obj.get("idx")
    if isinstance(idx, bool) or not isinstance(idx, (str, int)):
        raise MalformedRecord(lineno, "idx must be a string or integer")
    source = obj.get("source")
    if not isinstance(source, str):
        raise MalformedRecord(lineno, "source must be a string")
    label = obj.get("label")
    if label is not None and (isinstance(label, bool) or label not in (0, 1)):
        raise MalformedRecord(lineno, "label must be 0, 1 or absent")
    return DatasetRecord(idx, source, label)


def load_dataset(path) -> list[DatasetRecord]:
    """Records in file order; blank lines are skipped. ``bundled:NAME`` is accepted."""
    records: list[DatasetRecord] = []
    seen: set = set()
    with open(_resolve(path), encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(lineno, f"invalid JSON ({exc.msg})") from None
            rec = _record(obj, lineno)
            key = (type(rec.idx).__name__, rec.idx)
            if key in seen:
                raise DuplicateIdx(rec.idx, lineno)
            seen.add(key)
            records.append(rec)
    return records


def save_dataset(records: list[DatasetRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def require_labels(records: list[DatasetRecord]) -> np.ndarray:
    for rec in records:
        if rec.label is None:
            raise MissingLabel(rec.idx)
    return np.array([rec.label for rec in records], dtype=np.int64)


def ingest_directory(directory, labels_csv=None) -> list[DatasetRecord]:
    """Turn ``DIR/*.sol`` plus an optional ``idx,label`` CSV into records.

    The idx of a file is its stem; files are taken in sorted name order.
    """
    labels: dict[str, int] = {}
    if labels_csv is not None:
        with open(labels_csv, newline="", encoding="utf-8") as fh:
            for lineno, row in enumerate(csv.DictReader(fh), 2):
                try:
                    idx, label = row["idx"].strip(), row["label"].strip()
                except (KeyError, AttributeError):
                    raise MalformedRecord(lineno, "label CSV needs idx and label columns") from None
                if label not in ("0", "1", ""):
                    raise MalformedRecord(lineno, f"bad label {label!r}")
                if label:
                    labels[idx] = int(label)
    return [
        DatasetRecord(p.stem, p.read_text(encoding="utf-8"), labels.get(p.stem))
        for p in sorted(Path(directory).glob("*.sol"))
    ]


def split_indices(n: int, fractions: tuple[float, float, float], seed: int):
    """Seeded disjoint, exhaustive (train, test, validation) index arrays."""
    perm = np.random.default_rng([seed, 0x53504C54]).permutation(n)
    n_train = int(np.floor(fractions[0] * n + 1e-9))
    n_test = int(np.floor(fractions[1] * n + 1e-9))
    return np.sort(perm[:n_train]), np.sort(perm[n_train:n_train + n_test]), np.sort(perm[n_train + n_test:])


def label_subset(labels: np.ndarray, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Positions that keep their labels and those moved to the unlabeled pool.

    Keeps ``floor(fraction * len(labels))`` positions, raised if needed so that
    every class present keeps at least one labeled example.
    """
    labels = np.asarray(labels)
    n = labels.size
    if fraction >= 1.0:
        return np.arange(n), np.zeros(0, dtype=np.int64)
    perm = np.random.default_rng([seed, 0x4C41424C]).permutation(n)
    classes = np.unique(labels)
    k = max(int(np.floor(fraction * n + 1e-9)), classes.size)
    chosen = list(perm[:k])
    for c in classes:
        if not np.any(labels[chosen] == c):
            first = next(i for i in perm[k:] if labels[i] == c)
            # give up the last slot held by a class that has more than one
            for j in range(len(chosen) - 1, -1, -1):
                if np.sum(labels[chosen] == labels[chosen[j]]) > 1:
                    chosen[j] = first
                    break
    keep = np.sort(np.array(chosen, dtype=np.int64))
    rest = np.setdiff1d(np.arange(n), keep)
    return keep, rest


def corpus_digest(records: list[DatasetRecord]) -> str:
    h = hashlib.sha256()
    for rec in records:
        h.update(rec.to_json().encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()
