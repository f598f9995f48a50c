"""Dataset ingestion, [0, 1] normalization, N-bit quantization and train/test splitting."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

TRAIN_FRACTION_TENTHS = 7


class DatasetError(ValueError):
    """Raised for malformed or unusable dataset input."""


@dataclass(frozen=True)
class CsvSchema:
    """Column roles for a delimited text file.

    ``label_column`` and ``ignore_columns`` accept either 0-based indices or
    header names. ``delimiter=None`` splits on runs of whitespace.
    """

    label_column: int | str = -1
    delimiter: str | None = ","
    has_header: bool = False
    ignore_columns: tuple[int | str, ...] = ()
    feature_names: tuple[str, ...] | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "CsvSchema":
        return cls(
            label_column=d.get("label_column", -1),
            delimiter=d.get("delimiter", ","),
            has_header=bool(d.get("has_header", False)),
            ignore_columns=tuple(d.get("ignore_columns", ())),
            feature_names=tuple(d["feature_names"]) if d.get("feature_names") else None,
        )


@dataclass
class RawDataset:
    name: str
    features: np.ndarray
    labels: list[str]
    feature_names: list[str]

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise DatasetError("features must be a 2-D matrix")
        if self.features.shape[0] != len(self.labels):
            raise DatasetError(
                f"{self.features.shape[0]} feature rows but {len(self.labels)} labels"
            )
        if self.features.shape[1] < 1:
            raise DatasetError("dataset has no feature columns")
        if len(set(self.labels)) < 2:
            raise DatasetError("dataset needs at least 2 distinct class labels")
        if len(self.feature_names) != self.features.shape[1]:
            raise DatasetError("feature_names length does not match feature columns")

    @property
    def n_samples(self) -> int:
        return int(self.features.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])

    @property
    def classes(self) -> list[str]:
        return sorted(set(self.labels), key=_label_sort_key)


def _label_sort_key(label: str):
    # numeric labels sort numerically ("2" < "10"), others lexically after them
    try:
        return (0, float(label), label)
    except ValueError:
        return (1, 0.0, label)


@dataclass
class QuantizedDataset:
    """Features on the integer grid [0, 2**bits - 1] plus encoded labels.

    ``split`` holds one ``"train"``/``"test"`` tag per sample, or is empty
    before :func:`split_train_test` has been applied.
    """

    name: str
    bits: int
    features: np.ndarray
    labels: np.ndarray
    classes: list[str]
    feature_names: list[str]
    split: list[str] = field(default_factory=list)
    seed: int | None = None

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=np.int64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.bits < 1:
            raise DatasetError("bits must be >= 1")
        top = (1 << self.bits) - 1
        if self.features.size and (self.features.min() < 0 or self.features.max() > top):
            raise DatasetError(f"feature values outside [0, {top}]")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= len(self.classes)):
            raise DatasetError("label index outside [0, num_classes)")
        if self.split and len(self.split) != len(self.labels):
            raise DatasetError("split tags do not cover every sample")

    @property
    def n_samples(self) -> int:
        return int(self.features.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    @property
    def max_level(self) -> int:
        return (1 << self.bits) - 1

    def mask(self, partition: str) -> np.ndarray:
        if partition not in ("train", "test"):
            raise ValueError(f"unknown partition {partition!r}")
        if not self.split:
            raise DatasetError("dataset has not been split")
        return np.array([s == partition for s in self.split], dtype=bool)

    def partition(self, partition: str) -> tuple[np.ndarray, np.ndarray]:
        m = self.mask(partition)
        return self.features[m], self.labels[m]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "bits": self.bits,
            "classes": list(self.classes),
            "feature_names": list(self.feature_names),
            "features": self.features.tolist(),
            "labels": self.labels.tolist(),
            "split": list(self.split),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QuantizedDataset":
        n_features = len(d["feature_names"])
        feats = np.asarray(d["features"], dtype=np.int64).reshape(-1, n_features)
        return cls(
            name=d["name"],
            bits=int(d["bits"]),
            features=feats,
            labels=np.asarray(d["labels"], dtype=np.int64),
            classes=list(d["classes"]),
            feature_names=list(d["feature_names"]),
            split=list(d.get("split", [])),
            seed=d.get("seed"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def checksum(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()


def _resolve_column(spec: int | str, header: list[str] | None, n_cols: int) -> int:
    if isinstance(spec, str):
        if header is None or spec not in header:
            raise DatasetError(f"column {spec!r} not found in header")
        return header.index(spec)
    idx = spec + n_cols if spec < 0 else spec
    if not 0 <= idx < n_cols:
        raise DatasetError(f"column index {spec} out of range for {n_cols} columns")
    return idx


def _read_rows(path: Path, delimiter: str | None) -> list[list[str]]:
    with open(path, newline="") as fh:
        if delimiter is None:
            rows = [line.split() for line in fh]
        else:
            rows = [[c.strip() for c in row] for row in csv.reader(fh, delimiter=delimiter)]
    return [r for r in rows if r and any(c for c in r)]


def load_csv(path: str | Path, schema: CsvSchema | None = None, name: str | None = None) -> RawDataset:
    """Parse a delimited file into a :class:`RawDataset`, keeping file row order."""
    schema = schema or CsvSchema()
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"dataset file not found: {path}")
    rows = _read_rows(path, schema.delimiter)
    header = None
    if schema.has_header:
        if not rows:
            raise DatasetError(f"{path}: empty file")
        header, rows = rows[0], rows[1:]
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    n_cols = len(header) if header else len(rows[0])
    for lineno, row in enumerate(rows, start=2 if header else 1):
        if len(row) != n_cols:
            raise DatasetError(f"{path}: row {lineno} has {len(row)} cells, expected {n_cols}")

    label_idx = _resolve_column(schema.label_column, header, n_cols)
    ignored = {_resolve_column(c, header, n_cols) for c in schema.ignore_columns}
    feat_idx = [i for i in range(n_cols) if i != label_idx and i not in ignored]

    feats = np.empty((len(rows), len(feat_idx)), dtype=np.float64)
    for r, row in enumerate(rows):
        for j, c in enumerate(feat_idx):
            try:
                feats[r, j] = float(row[c])
            except ValueError:
                raise DatasetError(
                    f"{path}: non-numeric feature cell {row[c]!r} at row {r + 1}, column {c}"
                ) from None
    labels = [row[label_idx] for row in rows]

    if schema.feature_names is not None:
        names = list(schema.feature_names)
    elif header is not None:
        names = [header[i] for i in feat_idx]
    else:
        names = [f"x{i}" for i in range(len(feat_idx))]
    return RawDataset(name=name or path.stem, features=feats, labels=labels, feature_names=names)


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5)


def normalize_quantize(ds: RawDataset, bits: int) -> np.ndarray:
    """Min-max scale every column to [0, 1] and round onto the (2**bits - 1)-step grid.

    Statistics come from the whole dataset. Constant columns map to 0.
    """
    if bits < 1:
        raise DatasetError("bits must be >= 1")
    top = (1 << bits) - 1
    x = ds.features
    lo = x.min(axis=0)
    span = x.max(axis=0) - lo
    out = np.zeros(x.shape, dtype=np.int64)
    live = span > 0
    scaled = (x[:, live] - lo[live]) / span[live]
    out[:, live] = _round_half_up(scaled * top).astype(np.int64)
    return np.clip(out, 0, top)


def quantize(ds: RawDataset, bits: int = 4) -> QuantizedDataset:
    classes = ds.classes
    index = {c: i for i, c in enumerate(classes)}
    return QuantizedDataset(
        name=ds.name,
        bits=bits,
        features=normalize_quantize(ds, bits),
        labels=np.array([index[l] for l in ds.labels], dtype=np.int64),
        classes=classes,
        feature_names=list(ds.feature_names),
    )


def train_count(n: int) -> int:
    """Number of training samples for ``n`` total: 70% rounded half-up."""
    return (TRAIN_FRACTION_TENTHS * n + 5) // 10


def split_train_test(ds: QuantizedDataset, seed: int) -> QuantizedDataset:
    """Stratified, seeded 70/30 split.

    Per-class train quotas are allotted by largest remainder so they sum to
    :func:`train_count`; every class with two or more samples gets at least
    one training sample.
    """
    n = ds.n_samples
    if n < 10:
        raise DatasetError(f"dataset too small to split ({n} samples, need >= 10)")
    rng = np.random.Generator(np.random.PCG64(seed))
    target = train_count(n)

    members = [np.flatnonzero(ds.labels == c) for c in range(ds.num_classes)]
    sizes = np.array([len(m) for m in members])
    exact = sizes * target / n
    quota = np.floor(exact).astype(np.int64)
    order = sorted(range(len(sizes)), key=lambda c: (-(exact[c] - quota[c]), c))
    for c in order[: target - int(quota.sum())]:
        quota[c] += 1
    # enforce >= 1 train sample for classes with >= 2 members, taking from the largest quota
    for c in range(len(sizes)):
        if sizes[c] >= 2 and quota[c] == 0:
            donor = max((d for d in range(len(sizes)) if d != c), key=lambda d: (quota[d], -d))
            quota[donor] -= 1
            quota[c] += 1

    tags = ["test"] * n
    for c, idx in enumerate(members):
        picked = rng.permutation(idx)[: quota[c]]
        for i in picked:
            tags[int(i)] = "train"
    return QuantizedDataset(
        name=ds.name,
        bits=ds.bits,
        features=ds.features,
        labels=ds.labels,
        classes=list(ds.classes),
        feature_names=list(ds.feature_names),
        split=tags,
        seed=seed,
    )


def from_arrays(
    features: Sequence[Sequence[int]],
    labels: Sequence[int],
    bits: int = 4,
    name: str = "array",
    split: Sequence[str] | None = None,
) -> QuantizedDataset:
    """Wrap already-quantized integer data; every sample is training data unless ``split`` is given."""
    feats = np.asarray(features, dtype=np.int64)
    if feats.ndim == 1:
        feats = feats.reshape(-1, 1)
    labs = np.asarray(labels, dtype=np.int64)
    k = int(labs.max()) + 1 if labs.size else 1
    return QuantizedDataset(
        name=name,
        bits=bits,
        features=feats,
        labels=labs,
        classes=[str(i) for i in range(k)],
        feature_names=[f"x{i}" for i in range(feats.shape[1])],
        split=list(split) if split is not None else ["train"] * len(labs),
    )
