"""Forest training over a shared BOSS pool, majority-vote prediction and evaluation."""

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import dictionary, spectral
from .core import ConfigError, LabeledDataset, TsChiefError
from .tree import (DICTIONARY, INTERVAL, SIMILARITY, SPLITTER_TYPES, DictionarySplitter,
                   QueryBatch, TrainingContext, build_tree, iter_nodes, predict_tree)

PREDICT_CHUNK = 2048


@dataclass(frozen=True)
class ForestConfig:
    k: int = 500
    t: int = 1000
    Ce: int = 5
    Cb: int = 100
    Cr: int = 100
    seed: int = 0
    threads: int | None = None

    def validate(self):
        if self.k < 1:
            raise ConfigError(f"k must be >= 1 (got {self.k})")
        for name in ("Ce", "Cb", "Cr"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0 (got {getattr(self, name)})")
        if self.Ce + self.Cb + self.Cr < 1:
            raise ConfigError("Ce + Cb + Cr must be >= 1")
        if self.Cb > 0 and self.t < 1:
            raise ConfigError(f"t must be >= 1 when Cb > 0 (got {self.t})")
        if self.threads is not None and self.threads < 1:
            raise ConfigError(f"threads must be >= 1 (got {self.threads})")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        return self

    def to_dict(self):
        return asdict(self)

    @property
    def candidate_counts(self):
        return {SIMILARITY: self.Ce, DICTIONARY: self.Cb, INTERVAL: self.Cr}


def _rng(seed, *key):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


@dataclass
class Evaluation:
    accuracy: float
    predictions: np.ndarray
    seconds: float


@dataclass(eq=False)
class TsChiefForest:
    """A trained forest.

    ``transforms`` maps pool index to the fitted ``BossTransform`` for every
    transform some dictionary splitter uses; the training histograms are not
    kept after fitting.
    """

    config: ForestConfig
    trees: list
    transforms: dict
    n_classes: int
    length: int
    classes: tuple = ()
    stats: list = field(default_factory=list)
    train_seconds: float = 0.0

    def node_counts(self):
        totals = dict.fromkeys(SPLITTER_TYPES, 0)
        for s in self.stats:
            for kind, v in s.nodes.items():
                totals[kind] += v
        return totals

    def _check(self, X):
        X = np.asarray(X, dtype=np.float64)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.length:
            raise TsChiefError(f"length mismatch: expected {self.length}, got {X.shape[1]}")
        if X.shape[0] == 0:
            raise TsChiefError("no queries")
        return X, single

    def votes(self, X, threads=None):
        """(queries, classes) vote counts."""
        X, _ = self._check(X)
        out = np.zeros((X.shape[0], self.n_classes), dtype=np.int64)
        workers = threads or self.config.threads or os.cpu_count() or 1
        for lo in range(0, X.shape[0], PREDICT_CHUNK):
            batch = QueryBatch(X[lo:lo + PREDICT_CHUNK], self.transforms)
            if workers == 1:
                preds = [predict_tree(t, batch) for t in self.trees]
            else:
                with ThreadPoolExecutor(workers) as ex:
                    preds = list(ex.map(lambda t: predict_tree(t, batch), self.trees))
            rows = np.arange(batch.X.shape[0])
            for p in preds:
                np.add.at(out, (lo + rows, p), 1)
        return out

    def predict_proba(self, X, threads=None):
        X, single = self._check(X)
        v = self.votes(X, threads)
        p = v / v.sum(axis=1, keepdims=True)
        return p[0] if single else p

    def predict(self, X, threads=None):
        """Plurality vote; ties go to the lowest class index."""
        X, single = self._check(X)
        p = np.argmax(self.votes(X, threads), axis=1)
        return int(p[0]) if single else p

    def evaluate(self, test, threads=None):
        if test.n == 0:
            raise TsChiefError("empty test set")
        if test.length != self.length:
            raise TsChiefError(f"length mismatch: expected {self.length}, got {test.length}")
        t0 = time.perf_counter()
        pred = self.predict(test.X, threads)
        return Evaluation(float((pred == test.y).mean()), pred, time.perf_counter() - t0)


def train(dataset, config=ForestConfig(), instrument=False, check_invariants=False):
    """Fit a forest; the result does not depend on ``config.threads``."""
    config.validate()
    if not isinstance(dataset, LabeledDataset):
        raise TsChiefError("expected a LabeledDataset")
    dataset.require_all_classes()
    if config.Cr > 0 and dataset.length < spectral.MIN_INTERVAL:
        raise ConfigError(f"Cr > 0 needs series length >= {spectral.MIN_INTERVAL}")
    if config.Cb > 0 and dataset.length < dictionary.MIN_WINDOW:
        raise ConfigError(f"Cb > 0 needs series length >= {dictionary.MIN_WINDOW}")
    t0 = time.perf_counter()
    pool = None
    if config.Cb > 0:
        pool = dictionary.precompute_transforms(dataset.X, config.t, _rng(config.seed, 0))
    ctx = TrainingContext(dataset.X, dataset.y, dataset.n_classes, pool)
    counts = config.candidate_counts
    idx = np.arange(dataset.n)

    def grow(i):
        return build_tree(ctx, idx, counts, _rng(config.seed, 1, i), instrument, check_invariants)

    workers = config.threads or os.cpu_count() or 1
    if workers == 1:
        grown = [grow(i) for i in range(config.k)]
    else:
        with ThreadPoolExecutor(workers) as ex:
            grown = list(ex.map(grow, range(config.k)))
    trees = [g[0] for g in grown]
    used = sorted({n.splitter.transform for t in trees for n in iter_nodes(t)
                   if isinstance(getattr(n, "splitter", None), DictionarySplitter)})
    transforms = {k: pool.transforms[k] for k in used}
    return TsChiefForest(config, trees, transforms, dataset.n_classes, dataset.length,
                         dataset.classes, [g[1] for g in grown], time.perf_counter() - t0)
