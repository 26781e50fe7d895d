"""Dataset ingestion, normalization, fold planning, and label decoding.

CSV input is comma-separated UTF-8 with one header line; features must be
numeric, the target column is named by a schema, and class labels may be
strings or integers (mapped to 0..C-1 in first-appearance order).
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "CLASSIFICATION",
    "REGRESSION",
    "DataFormatError",
    "DecodeError",
    "Dataset",
    "DatasetSchema",
    "load_csv",
    "minmax_normalize",
    "apply_minmax",
    "invert_minmax",
    "kfold",
    "label_decode",
]

CLASSIFICATION = "classification"
REGRESSION = "regression"


class DataFormatError(ValueError):
    """Malformed dataset file: the message names the offending row/column."""


class DecodeError(ValueError):
    """A raw model output could not be decoded into a class label."""


@dataclass(frozen=True)
class DatasetSchema:
    """Binding of a CSV file to a learning task.

    ``features`` restricts and orders the feature columns; when omitted all
    non-target columns are used in file order.
    """

    target: str
    task: str
    features: tuple[str, ...] | None = None
    name: str = ""

    def __post_init__(self) -> None:
        if self.task not in (CLASSIFICATION, REGRESSION):
            raise ValueError(
                f"task must be {CLASSIFICATION!r} or {REGRESSION!r}, got {self.task!r}"
            )
        if not self.target:
            raise ValueError("schema needs a target column name")
        if self.features is not None:
            object.__setattr__(self, "features", tuple(self.features))

    @classmethod
    def from_json(cls, text: str) -> "DatasetSchema":
        raw = json.loads(text)
        if not isinstance(raw, dict):
            raise ValueError("schema JSON must be an object")
        return cls(
            target=raw.get("target", ""),
            task=raw.get("task", ""),
            features=tuple(raw["features"]) if raw.get("features") else None,
            name=raw.get("name", ""),
        )

    def to_json(self) -> str:
        out = {"target": self.target, "task": self.task}
        if self.features:
            out["features"] = list(self.features)
        if self.name:
            out["name"] = self.name
        return json.dumps(out, indent=2, sort_keys=True)


@dataclass
class Dataset:
    """In-memory dataset: numeric features plus a regression or label target."""

    features: np.ndarray
    targets: np.ndarray
    feature_names: list[str]
    target_name: str
    task: str
    label_names: list[str] | None = None
    name: str = ""

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        if self.task != CLASSIFICATION or self.label_names is None:
            raise ValueError("n_classes is only defined for classification data")
        return len(self.label_names)


def load_csv(path, schema: DatasetSchema, label_names=None) -> Dataset:
    """Parse a delimited dataset file against ``schema``.

    Class labels are mapped to 0..C-1 in first-appearance order unless a
    fixed ``label_names`` list is supplied (evaluation against a trained
    model), in which case an unseen label is an error. Parse failures name
    the file line and column.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if schema.target not in header:
            raise DataFormatError(
                f"{path}: target column {schema.target!r} not in header {header}"
            )
        feature_cols = (
            list(schema.features)
            if schema.features
            else [h for h in header if h != schema.target]
        )
        missing = [c for c in feature_cols if c not in header]
        if missing:
            raise DataFormatError(f"{path}: feature columns {missing} not in header")
        if not feature_cols:
            raise DataFormatError(f"{path}: no feature columns")
        fidx = [header.index(c) for c in feature_cols]
        tidx = header.index(schema.target)

        rows, raw_targets = [], []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DataFormatError(
                    f"{path}: line {line_no} has {len(row)} cells, expected {len(header)}"
                )
            values = []
            for c, j in zip(feature_cols, fidx):
                cell = row[j].strip()
                if not cell:
                    raise DataFormatError(
                        f"{path}: missing value at line {line_no}, column {c!r}"
                    )
                try:
                    values.append(float(cell))
                except ValueError:
                    raise DataFormatError(
                        f"{path}: non-numeric cell {cell!r} at line {line_no}, "
                        f"column {c!r}"
                    ) from None
            cell = row[tidx].strip()
            if not cell:
                raise DataFormatError(
                    f"{path}: missing target at line {line_no}"
                )
            rows.append(values)
            raw_targets.append(cell)

    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    features = np.array(rows, dtype=float)
    if not np.all(np.isfinite(features)):
        raise DataFormatError(f"{path}: non-finite feature values")

    if schema.task == REGRESSION:
        try:
            targets = np.array([float(t) for t in raw_targets])
        except ValueError as exc:
            raise DataFormatError(f"{path}: non-numeric regression target: {exc}") from None
        labels = None
    else:
        if label_names is None:
            labels = []
            mapping = {}
            for t in raw_targets:
                if t not in mapping:
                    mapping[t] = len(mapping)
                    labels.append(t)
        else:
            labels = list(label_names)
            mapping = {name: i for i, name in enumerate(labels)}
            unknown = sorted({t for t in raw_targets if t not in mapping})
            if unknown:
                raise DataFormatError(
                    f"{path}: labels {unknown} not among the known classes {labels}"
                )
        targets = np.array([mapping[t] for t in raw_targets], dtype=np.int64)

    return Dataset(
        features=features,
        targets=targets,
        feature_names=feature_cols,
        target_name=schema.target,
        task=schema.task,
        label_names=labels,
        name=schema.name or path.stem,
    )


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------


def minmax_normalize(X):
    """Scale columns of a training matrix to [0, 1]; returns (X', lo, hi).

    Constant columns map to 0.5 with a warning. The returned lo/hi are
    meant to be reapplied to held-out data, whose values may then fall
    outside [0, 1]: the map is affine and never clamps.
    """
    X = np.asarray(X, dtype=float)
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    flat = np.flatnonzero(hi - lo == 0.0)
    if flat.size:
        warnings.warn(
            f"constant feature column(s) {flat.tolist()} normalized to 0.5"
        )
    return apply_minmax(X, lo, hi), lo, hi


def apply_minmax(X, lo, hi):
    """Apply stored train-fold bounds to new data (affine, no clamping)."""
    X = np.asarray(X, dtype=float)
    span = hi - lo
    safe = np.where(span == 0.0, 1.0, span)
    out = (X - lo) / safe
    return np.where(span == 0.0, 0.5, out)


def invert_minmax(Xn, lo, hi):
    """Inverse of apply_minmax; constant columns recover their stored value."""
    Xn = np.asarray(Xn, dtype=float)
    span = hi - lo
    return np.where(span == 0.0, lo, Xn * span + lo)


# ---------------------------------------------------------------------------
# fold planning
# ---------------------------------------------------------------------------


def kfold(n: int, k: int = 5, seed: int = 0, labels=None) -> list[np.ndarray]:
    """Disjoint test folds covering 0..n-1 with sizes differing by <= 1.

    Classification folds (``labels`` given) are stratified: each class is
    shuffled and the classes are dealt onto folds in one continuous
    round-robin pass, which keeps both the overall and the per-class fold
    sizes within one of proportional. A class with fewer members than
    folds triggers an unstratified fallback with a warning. Deterministic
    under ``seed``.
    """
    if k < 2:
        raise ValueError(f"need at least 2 folds, got {k}")
    if n < k:
        raise ValueError(f"cannot split {n} samples into {k} folds")
    rng = np.random.default_rng(seed)
    if labels is not None:
        labels = np.asarray(labels)
        classes, counts = np.unique(labels, return_counts=True)
        if counts.min() < k:
            warnings.warn(
                f"class {classes[np.argmin(counts)]} has fewer than {k} members; "
                "falling back to unstratified folds"
            )
            labels = None
    if labels is None:
        order = rng.permutation(n)
    else:
        parts = []
        for cls in classes:
            idx = np.flatnonzero(labels == cls)
            parts.append(rng.permutation(idx))
        order = np.concatenate(parts)
    folds = [list() for _ in range(k)]
    for pos, sample in enumerate(order):
        folds[pos % k].append(int(sample))
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


# ---------------------------------------------------------------------------
# label decoding
# ---------------------------------------------------------------------------


def label_decode(raw, n_classes: int):
    """Round a raw regression output to the nearest class index and clamp.

    Ties at .5 round half-away-from-zero. Scalar in, int out; array in,
    int64 array out. Non-finite outputs cannot be decoded.
    """
    if n_classes < 2:
        raise ValueError(f"need at least 2 classes, got {n_classes}")
    arr = np.asarray(raw, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DecodeError("cannot decode non-finite model output")
    rounded = np.sign(arr) * np.floor(np.abs(arr) + 0.5)
    clamped = np.clip(rounded, 0, n_classes - 1).astype(np.int64)
    if np.isscalar(raw) or np.ndim(raw) == 0:
        return int(clamped)
    return clamped
