"""Dataset container, CSV ingestion, preprocessing and stratified splitting.

A :class:`Dataset` is the currency every other module trades in: an N x D
float matrix, binary labels in {0, 1} (1 conventionally the positive /
minority side), and stable integer sample ids.  Which class is the majority
is always *computed* from the counts, never assumed from the label value.
"""

from __future__ import annotations

import csv
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .rng import Rng

MISSING_MARKERS = {"", "nan", "?"}


def _atomic_write_text(path: str, text: str) -> None:
    """Write via temp file + rename so a failure never leaves a partial file."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass(frozen=True)
class Dataset:
    """Immutable feature matrix + binary labels + unique sample ids.

    Missing values may be present as NaN until :func:`impute_mean` runs.
    """

    features: np.ndarray
    labels: np.ndarray
    ids: np.ndarray
    feature_names: tuple = ()
    label_name: str = "label"
    label_values: tuple = ("0", "1")

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 2 or feats.shape[0] < 1 or feats.shape[1] < 1:
            raise ValueError("features must be a non-empty 2-D matrix")
        labels = np.asarray(self.labels, dtype=np.int64)
        ids = np.asarray(self.ids, dtype=np.int64)
        if labels.shape != (feats.shape[0],) or ids.shape != (feats.shape[0],):
            raise ValueError("features, labels and ids must have matching length")
        if not np.all((labels == 0) | (labels == 1)):
            raise ValueError("labels must be 0 or 1")
        if np.unique(ids).size != ids.size:
            raise ValueError("ids must be unique")
        names = tuple(self.feature_names) or tuple(f"f{i}" for i in range(feats.shape[1]))
        if len(names) != feats.shape[1]:
            raise ValueError("feature_names length must match feature count")
        for arr in (feats, labels, ids):
            arr.flags.writeable = False
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "label_values", tuple(str(v) for v in self.label_values))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> tuple:
        """(count of label 0, count of label 1)."""
        c1 = int(self.labels.sum())
        return self.n - c1, c1

    def majority_label(self) -> int:
        """The more frequent label; ties resolve to 0."""
        c0, c1 = self.class_counts()
        return 0 if c0 >= c1 else 1

    def minority_label(self) -> int:
        return 1 - self.majority_label()

    def has_missing(self) -> bool:
        return bool(np.isnan(self.features).any())

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices)
        return Dataset(
            self.features[indices],
            self.labels[indices],
            self.ids[indices],
            feature_names=self.feature_names,
            label_name=self.label_name,
            label_values=self.label_values,
        )

    def sorted_by_id(self) -> "Dataset":
        if np.all(np.diff(self.ids) > 0):
            return self
        return self.subset(np.argsort(self.ids))

    def replace(self, features=None) -> "Dataset":
        return Dataset(
            self.features if features is None else features,
            self.labels,
            self.ids,
            feature_names=self.feature_names,
            label_name=self.label_name,
            label_values=self.label_values,
        )


@dataclass(frozen=True)
class SplitSpec:
    """70/15/15 three-way split contract with an explicit seed."""

    train_fraction: float = 0.70
    val_fraction: float = 0.15
    test_fraction: float = 0.15
    seed: int = 0

    def __post_init__(self):
        total = self.train_fraction + self.val_fraction + self.test_fraction
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"fractions must sum to 1.0, got {total}")
        if min(self.train_fraction, self.val_fraction, self.test_fraction) <= 0:
            raise ValueError("all fractions must be positive")


def _parse_cell(raw: str, row: int, col: str) -> float:
    text = raw.strip()
    if text.lower() in MISSING_MARKERS:
        return np.nan
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"non-numeric feature cell {raw!r} at row {row}, column {col!r}") from None


def load_csv(path, label_column=None, label_map=None) -> Dataset:
    """Load a UTF-8 CSV with a header row into a Dataset.

    ``label_column`` is a column name or integer index (default: the last
    column).  The two distinct label values map to {0, 1} with the
    lexicographically smaller raw value becoming 0, unless ``label_map``
    (raw value -> 0/1) overrides.  Empty cells, "NaN" and "?" (any case)
    are recorded as missing.  A column literally named "synthetic" is
    treated as row metadata and skipped.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        rows = [r for r in reader if r]

    if not rows:
        raise ValueError(f"{path}: no data rows")

    if label_column is None:
        # default: last column, skipping a trailing "synthetic" marker
        label_idx = max(i for i, name in enumerate(header) if name != "synthetic")
    elif isinstance(label_column, int):
        label_idx = label_column if label_column >= 0 else len(header) + label_column
    else:
        try:
            label_idx = header.index(str(label_column))
        except ValueError:
            raise ValueError(f"{path}: no column named {label_column!r}") from None
    if not 0 <= label_idx < len(header):
        raise ValueError(f"{path}: label column index {label_column} out of range")

    feature_idx = [
        i for i, name in enumerate(header) if i != label_idx and name != "synthetic"
    ]
    if not feature_idx:
        raise ValueError(f"{path}: no feature columns")

    raw_labels = []
    feats = np.empty((len(rows), len(feature_idx)), dtype=np.float64)
    for r, row in enumerate(rows):
        if len(row) != len(header):
            raise ValueError(f"{path}: row {r + 1} has {len(row)} cells, expected {len(header)}")
        raw_labels.append(row[label_idx].strip())
        for j, i in enumerate(feature_idx):
            feats[r, j] = _parse_cell(row[i], r + 1, header[i])

    distinct = sorted(set(raw_labels))
    if len(distinct) != 2:
        raise ValueError(f"{path}: expected exactly 2 label values, found {len(distinct)}: {distinct}")
    if label_map is None:
        mapping = {distinct[0]: 0, distinct[1]: 1}
    else:
        mapping = {str(k): int(v) for k, v in label_map.items()}
        if sorted(mapping.keys()) != distinct or sorted(mapping.values()) != [0, 1]:
            raise ValueError(f"{path}: label_map must map {distinct} onto {{0, 1}}")

    labels = np.array([mapping[v] for v in raw_labels], dtype=np.int64)
    value_for = {v: k for k, v in mapping.items()}
    return Dataset(
        feats,
        labels,
        np.arange(len(rows), dtype=np.int64),
        feature_names=tuple(header[i] for i in feature_idx),
        label_name=header[label_idx],
        label_values=(value_for[0], value_for[1]),
    )


def write_csv(ds: Dataset, path, synthetic_mask=None) -> None:
    """Write a Dataset back to CSV (atomically).

    Floats are written with ``repr`` so a reload reproduces them exactly.
    ``synthetic_mask`` adds a boolean "synthetic" column.
    """
    lines = []
    header = list(ds.feature_names) + [ds.label_name]
    if synthetic_mask is not None:
        synthetic_mask = np.asarray(synthetic_mask, dtype=bool)
        header.append("synthetic")
    lines.append(",".join(header))
    for i in range(ds.n):
        cells = [repr(float(v)) if not np.isnan(v) else "" for v in ds.features[i]]
        cells.append(ds.label_values[ds.labels[i]])
        if synthetic_mask is not None:
            cells.append("true" if synthetic_mask[i] else "false")
        lines.append(",".join(cells))
    _atomic_write_text(str(path), "\n".join(lines) + "\n")


def impute_mean(ds: Dataset) -> Dataset:
    """Replace each missing cell with its column mean over the whole dataset."""
    feats = np.array(ds.features, dtype=np.float64)
    missing = np.isnan(feats)
    if not missing.any():
        return ds
    all_missing = missing.all(axis=0)
    if all_missing.any():
        cols = [ds.feature_names[i] for i in np.flatnonzero(all_missing)]
        raise ValueError(f"cannot impute all-missing column(s): {cols}")
    means = np.nanmean(feats, axis=0)
    rows, cols = np.nonzero(missing)
    feats[rows, cols] = means[cols]
    return ds.replace(features=feats)


def standard_scale(fit_on: Dataset, apply_to: Dataset) -> Dataset:
    """Center/scale ``apply_to`` columns by ``fit_on``'s mean and population std.

    Zero-variance columns are centered only (never divided by 0).
    """
    if fit_on.n < 2:
        raise ValueError("standard_scale needs at least 2 samples to fit")
    mu = fit_on.features.mean(axis=0)
    sigma = fit_on.features.std(axis=0)  # population std (ddof=0)
    safe = np.where(sigma == 0.0, 1.0, sigma)
    return apply_to.replace(features=(apply_to.features - mu) / safe)


def _apportion(counts: np.ndarray, total: int, taken: np.ndarray) -> np.ndarray:
    """Largest-remainder split of ``total`` across classes, proportional to counts.

    Remainder ties prefer the class with the larger still-unallocated pool,
    then the smaller class label; this keeps per-class train counts at their
    proportional targets once every partition has been carved.
    """
    n = counts.sum()
    quota = counts * (total / n)
    base = np.floor(quota).astype(np.int64)
    remainder = int(total - base.sum())
    if remainder > 0:
        frac = quota - base
        pool = counts - taken - base
        order = sorted(range(len(counts)), key=lambda c: (-frac[c], -pool[c], c))
        for c in order[:remainder]:
            base[c] += 1
    return base


def split(ds: Dataset, spec: SplitSpec, rng: Rng = None):
    """Stratified random 3-way split; returns (train, val, test).

    Partition totals are ``round(N * fraction)`` with rounding remainders
    going to train; each total is then apportioned across the two classes by
    largest remainder, so every partition keeps both classes whenever the
    class sizes allow it.
    """
    if ds.n < 10:
        raise ValueError("split requires at least 10 samples")
    c0, c1 = ds.class_counts()
    if c0 == 0 or c1 == 0:
        raise ValueError("split requires both classes present")

    n_val = round(ds.n * spec.val_fraction)
    n_test = round(ds.n * spec.test_fraction)
    n_train = ds.n - n_val - n_test

    counts = np.array([c0, c1], dtype=np.int64)
    val_c = _apportion(counts, n_val, np.zeros(2, dtype=np.int64))
    test_c = _apportion(counts, n_test, val_c)
    train_c = counts - val_c - test_c
    for name, alloc in (("train", train_c), ("val", val_c), ("test", test_c)):
        if (alloc <= 0).any():
            raise ValueError(
                f"stratified split leaves the {name} partition without one class "
                f"(class counts {counts.tolist()}, fractions {spec})"
            )
    assert n_train == int(train_c.sum())

    if rng is None:
        rng = Rng(spec.seed)
    parts = {"train": [], "val": [], "test": []}
    for c in (0, 1):
        positions = np.flatnonzero(ds.labels == c)
        rng.shuffle(positions)
        a, b = int(train_c[c]), int(train_c[c] + val_c[c])
        parts["train"].append(positions[:a])
        parts["val"].append(positions[a:b])
        parts["test"].append(positions[b:])

    def take(key):
        idx = np.concatenate(parts[key])
        sub = ds.subset(idx)
        return sub.sorted_by_id()

    return take("train"), take("val"), take("test")


def split_validation(ds: Dataset, fraction: float, rng: Rng):
    """Stratified 2-way carve-out; returns (rest, val).

    Used where a score-based method needs an internal validation slice.
    """
    if not 0 < fraction < 1:
        raise ValueError("validation fraction must be in (0, 1)")
    c0, c1 = ds.class_counts()
    if c0 == 0 or c1 == 0:
        raise ValueError("validation carve-out requires both classes present")
    counts = np.array([c0, c1], dtype=np.int64)
    n_val = round(ds.n * fraction)
    val_c = _apportion(counts, n_val, np.zeros(2, dtype=np.int64))
    if (val_c <= 0).any() or ((counts - val_c) <= 0).any():
        raise ValueError("validation carve-out would empty a class")
    rest_parts, val_parts = [], []
    for c in (0, 1):
        positions = np.flatnonzero(ds.labels == c)
        rng.shuffle(positions)
        val_parts.append(positions[: int(val_c[c])])
        rest_parts.append(positions[int(val_c[c]):])
    rest = ds.subset(np.concatenate(rest_parts)).sorted_by_id()
    val = ds.subset(np.concatenate(val_parts)).sorted_by_id()
    return rest, val
