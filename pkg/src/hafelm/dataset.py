"""Labeled feature-vector datasets: CSV ingestion, splitting, synthetic blob generators."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional, Sequence

import numpy as np

from .errors import (
    ConfigError,
    DataError,
    DegenerateSplitError,
    EmptyInputError,
    ParseError,
)


class Sample(NamedTuple):
    features: np.ndarray
    label: int


@dataclass(frozen=True)
class Dataset:
    """Immutable collection of N feature vectors with dense class labels in [0, m).

    Sample order is stable: index i identifies the same sample everywhere
    downstream (membership values, cluster assignments align by index).
    """

    features: np.ndarray  # (N, d) float64
    labels: np.ndarray    # (N,) int64
    m: int
    class_names: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        feats = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        labs = np.asarray(self.labels, dtype=np.int64)
        if feats.ndim != 2 or feats.shape[0] < 1 or feats.shape[1] < 1:
            raise DataError(f"features must be a non-empty 2-D array, got shape {feats.shape}")
        if labs.shape != (feats.shape[0],):
            raise DataError(f"labels shape {labs.shape} does not match {feats.shape[0]} samples")
        if not np.all(np.isfinite(feats)):
            raise DataError("features contain non-finite values")
        if self.m < 1:
            raise DataError(f"class count must be >= 1, got {self.m}")
        if labs.min() < 0 or labs.max() >= self.m:
            raise DataError(f"labels must lie in [0, {self.m})")
        if self.class_names is not None and len(self.class_names) != self.m:
            raise DataError(f"class_names has {len(self.class_names)} entries for m={self.m}")
        feats.flags.writeable = False
        labs.flags.writeable = False
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labs)
        if self.class_names is not None:
            object.__setattr__(self, "class_names", tuple(str(c) for c in self.class_names))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def sample(self, i: int) -> Sample:
        return Sample(self.features[i], int(self.labels[i]))

    def __len__(self) -> int:
        return self.n

    def __iter__(self) -> Iterator[Sample]:
        return (self.sample(i) for i in range(self.n))

    def class_indices(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.labels == c)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.m)

    def subset(self, indices: Sequence[int]) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx].copy(), self.labels[idx].copy(), self.m, self.class_names)

    def feature_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-dimension (min, max) over all samples."""
        return self.features.min(axis=0), self.features.max(axis=0)

    def label_name(self, c: int) -> str:
        if self.class_names is not None:
            return self.class_names[c]
        return str(c)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    seed: int
    stratified: bool = False

    def __post_init__(self):
        if not (0.0 < self.train_fraction < 1.0):
            raise ConfigError(f"train_fraction must be in (0, 1), got {self.train_fraction}")


def load_csv(path, has_header: bool = False) -> Dataset:
    """Read a dataset from CSV: d numeric feature columns, then one label column.

    Labels are remapped to dense indices in order of first appearance; the
    original label strings are kept as class_names.
    """
    rows = []
    line_numbers = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if has_header and lineno == 1:
                continue
            if not row or all(field.strip() == "" for field in row):
                continue
            rows.append(row)
            line_numbers.append(lineno)
    if not rows:
        raise EmptyInputError(f"{path}: no data rows")

    width = len(rows[0])
    if width < 2:
        raise ParseError("expected at least one feature column and a label column",
                         line=line_numbers[0])
    d = width - 1

    features = np.empty((len(rows), d), dtype=np.float64)
    name_to_index: dict[str, int] = {}
    labels = np.empty(len(rows), dtype=np.int64)
    for i, (row, lineno) in enumerate(zip(rows, line_numbers)):
        if len(row) != width:
            raise ParseError(f"expected {width} fields, got {len(row)}", line=lineno)
        for j in range(d):
            try:
                features[i, j] = float(row[j])
            except ValueError:
                raise ParseError(f"non-numeric feature value {row[j]!r}", line=lineno) from None
        name = row[d].strip()
        if name not in name_to_index:
            name_to_index[name] = len(name_to_index)
        labels[i] = name_to_index[name]

    class_names = tuple(name_to_index)
    return Dataset(features, labels, m=len(class_names), class_names=class_names)


def save_csv(ds: Dataset, path, header: bool = False) -> None:
    """Write a dataset in the load_csv format. Floats use shortest round-trip repr."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow([f"f{j}" for j in range(ds.d)] + ["label"])
        for i in range(ds.n):
            row = [repr(float(v)) for v in ds.features[i]]
            row.append(ds.label_name(int(ds.labels[i])))
            writer.writerow(row)


def _floor_fraction(fraction: float, n: int) -> int:
    # Nudge compensates for decimal fractions that are not exact binary floats
    # (0.7 * 10 evaluates to 6.999...96 and must still floor to 7).
    return int(math.floor(fraction * n + 1e-9))


def split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Partition a dataset into (train, test); deterministic for a fixed seed.

    Stratified mode draws floor(fraction * n_c) per class and hands the
    remaining deficit to the largest classes first (ties by class index).
    """
    if ds.n < 2:
        raise DegenerateSplitError(f"cannot split {ds.n} sample(s)")
    rng = np.random.default_rng(spec.seed)

    if spec.stratified:
        counts = ds.class_counts()
        for c in range(ds.m):
            if counts[c] < 2:
                raise DegenerateSplitError(
                    f"stratified split needs >= 2 samples per class, class {c} has {counts[c]}")
        total_target = _floor_fraction(spec.train_fraction, ds.n)
        per_class = np.array([_floor_fraction(spec.train_fraction, int(c)) for c in counts])
        deficit = total_target - int(per_class.sum())
        order = sorted(range(ds.m), key=lambda c: (-counts[c], c))
        for c in order:
            if deficit <= 0:
                break
            if per_class[c] < counts[c]:
                per_class[c] += 1
                deficit -= 1
        train_parts = []
        for c in range(ds.m):
            idx = ds.class_indices(c)
            perm = rng.permutation(idx)
            train_parts.append(perm[: per_class[c]])
        train_idx = np.sort(np.concatenate(train_parts))
    else:
        perm = rng.permutation(ds.n)
        k = _floor_fraction(spec.train_fraction, ds.n)
        train_idx = np.sort(perm[:k])

    mask = np.zeros(ds.n, dtype=bool)
    mask[train_idx] = True
    test_idx = np.flatnonzero(~mask)
    if len(train_idx) == 0 or len(test_idx) == 0:
        raise DegenerateSplitError(
            f"train_fraction {spec.train_fraction} leaves an empty side for N={ds.n}")
    return ds.subset(train_idx), ds.subset(test_idx)


def synth_blobs_with_origin(
    centers: Sequence[Sequence[float]],
    counts: Sequence[int],
    stddev: float,
    outlier_fraction: float,
    seed: int,
) -> tuple[Dataset, np.ndarray]:
    """Gaussian blob generator that also returns the pre-flip labels.

    Class c receives counts[c] isotropic draws around centers[c]. Then
    round(outlier_fraction * counts[c]) samples per class (round half to even)
    get their label flipped to a uniformly random other class. Samples are
    ordered class by class; flips change labels only, never positions.
    """
    centers_arr = np.asarray(centers, dtype=np.float64)
    counts_arr = np.asarray(counts, dtype=np.int64)
    if centers_arr.ndim != 2 or centers_arr.shape[0] < 1:
        raise ConfigError("centers must be a non-empty sequence of equal-length vectors")
    if counts_arr.shape != (centers_arr.shape[0],):
        raise ConfigError("centers and counts must have the same length")
    if np.any(counts_arr < 1):
        raise ConfigError("every class count must be >= 1")
    if stddev <= 0:
        raise ConfigError(f"stddev must be > 0, got {stddev}")
    if not (0.0 <= outlier_fraction < 1.0):
        raise ConfigError(f"outlier_fraction must be in [0, 1), got {outlier_fraction}")
    m = centers_arr.shape[0]
    if outlier_fraction > 0 and m == 1:
        raise ConfigError("cannot flip labels with a single class")

    rng = np.random.default_rng(seed)
    blocks = [rng.normal(loc=centers_arr[c], scale=stddev, size=(counts_arr[c], centers_arr.shape[1]))
              for c in range(m)]
    features = np.vstack(blocks)
    origin = np.repeat(np.arange(m, dtype=np.int64), counts_arr)
    labels = origin.copy()

    offset = 0
    for c in range(m):
        n_c = int(counts_arr[c])
        n_flip = round(outlier_fraction * n_c)
        if n_flip > 0:
            flip_local = rng.choice(n_c, size=n_flip, replace=False)
            draws = rng.integers(0, m - 1, size=n_flip)
            draws[draws >= c] += 1  # uniform over the other m-1 classes
            labels[offset + flip_local] = draws
        offset += n_c

    return Dataset(features, labels, m=m), origin


def synth_blobs(
    centers: Sequence[Sequence[float]],
    counts: Sequence[int],
    stddev: float,
    outlier_fraction: float,
    seed: int,
) -> Dataset:
    """See synth_blobs_with_origin; this drops the pre-flip labels."""
    ds, _ = synth_blobs_with_origin(centers, counts, stddev, outlier_fraction, seed)
    return ds


def minmax_fit(ds: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Per-dimension (lo, hi) scaling bounds from this dataset."""
    return ds.feature_bounds()


def minmax_apply(ds: Dataset, lo: np.ndarray, hi: np.ndarray) -> Dataset:
    """Affine map sending [lo, hi] to [0, 1] per dimension; flat dimensions map to 0."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    if lo.shape != (ds.d,) or hi.shape != (ds.d,):
        raise ConfigError(f"scaling bounds must have shape ({ds.d},)")
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    scaled = (ds.features - lo) / safe
    scaled[:, span <= 0] = 0.0
    return Dataset(scaled, ds.labels.copy(), ds.m, ds.class_names)
