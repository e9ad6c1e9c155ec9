"""Shared domain types plus class-count and Gini arithmetic."""

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

STD_EPS = 1e-8


class TsChiefError(ValueError):
    """Base class for every error raised on bad input or configuration."""


class ConfigError(TsChiefError):
    pass


def znormalize(series):
    """Scale to zero mean and unit population standard deviation.

    Series whose standard deviation is below 1e-8 become all zeros.
    Accepts a single series or a 2-D array of series (normalized row-wise).
    """
    x = np.asarray(series, dtype=np.float64)
    if x.shape[-1] < 2:
        raise TsChiefError("series length must be at least 2")
    mean = x.mean(axis=-1, keepdims=True)
    std = x.std(axis=-1, keepdims=True)
    flat = std < STD_EPS
    out = (x - mean) / np.where(flat, 1.0, std)
    return np.where(flat, 0.0, out)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Fixed-length series ``X`` (n, length) with labels ``y`` in ``0..n_classes-1``.

    ``classes`` holds the original label for each class index, so a test
    split loaded against a training split shares its mapping.
    """

    X: np.ndarray
    y: np.ndarray
    n_classes: int
    classes: tuple = field(default=())
    name: str = ""

    def __post_init__(self):
        X = np.ascontiguousarray(self.X, dtype=np.float64)
        y = np.asarray(self.y)
        if X.ndim != 2:
            raise TsChiefError("series must form a 2-D array (n, length)")
        if X.shape[0] < 1:
            raise TsChiefError("dataset is empty")
        if X.shape[1] < 2:
            raise TsChiefError("series length must be at least 2")
        if not np.isfinite(X).all():
            raise TsChiefError("series contain NaN or infinite values")
        if y.shape != (X.shape[0],):
            raise TsChiefError("series and labels differ in count")
        if not np.issubdtype(y.dtype, np.integer):
            raise TsChiefError("labels must be integer class indices")
        y = y.astype(np.int64)
        if self.n_classes < 1 or y.min() < 0 or y.max() >= self.n_classes:
            raise TsChiefError("label outside 0..n_classes-1")
        classes = tuple(self.classes) or tuple(range(self.n_classes))
        if len(classes) != self.n_classes:
            raise TsChiefError("class table size differs from n_classes")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "classes", classes)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def length(self):
        return self.X.shape[1]

    def class_counts(self):
        return class_counts(self.y, self.n_classes)

    def require_all_classes(self):
        """Raise unless every class occurs at least once (training sets)."""
        missing = np.flatnonzero(self.class_counts() == 0)
        if missing.size:
            raise TsChiefError(f"classes without instances: {missing.tolist()}")

    def subset(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        return LabeledDataset(self.X[idx], self.y[idx], self.n_classes,
                              self.classes, self.name)


@dataclass(frozen=True)
class ClassDistribution:
    counts: tuple

    @classmethod
    def from_labels(cls, labels, n_classes):
        return cls(tuple(int(v) for v in class_counts(labels, n_classes)))

    @property
    def total(self):
        return sum(self.counts)


def class_counts(labels, n_classes):
    return np.bincount(np.asarray(labels, dtype=np.int64), minlength=n_classes)


def _as_counts(dist):
    if isinstance(dist, ClassDistribution):
        return np.asarray(dist.counts, dtype=np.float64)
    if isinstance(dist, Mapping):
        return np.asarray(list(dist.values()), dtype=np.float64)
    return np.asarray(dist, dtype=np.float64)


def gini(dist):
    """``1 - sum(p_c^2)`` for a class distribution (counts, mapping or ClassDistribution)."""
    counts = _as_counts(dist)
    total = counts.sum()
    if total <= 0:
        raise TsChiefError("empty partition")
    p = counts / total
    return float(1.0 - (p * p).sum())


def weighted_gini(parent_total, partitions):
    """Size-weighted Gini over branches; empty branches contribute nothing."""
    acc = 0.0
    for part in partitions:
        counts = _as_counts(part)
        total = counts.sum()
        if total > 0:
            acc += total / parent_total * gini(counts)
    return acc


def split_gini(counts):
    """Weighted Gini of a (branches, classes) count matrix, or of a stack of them.

    This is the single scoring path used for every candidate split, so the
    winning value can be compared exactly against the recorded ones.
    """
    counts = np.asarray(counts, dtype=np.float64)
    if counts.ndim == 2:
        return float(split_gini(counts[None])[0])
    sizes = counts.sum(axis=-1)
    used = sizes > 0
    sq = np.where(used, (counts ** 2).sum(axis=-1) / np.where(used, sizes, 1.0), 0.0)
    return (sizes.sum(axis=-1) - sq.sum(axis=-1)) / sizes.sum(axis=-1)


def majority(counts):
    """Index of the largest count; ties go to the lowest index."""
    return int(np.argmax(counts))
