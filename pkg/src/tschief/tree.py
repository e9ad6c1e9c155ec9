"""Candidate splitter generation, Gini-based selection, tree construction and
single-tree classification."""

import hashlib
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from . import dictionary, distances, spectral
from .core import TsChiefError, class_counts, majority, split_gini

SIMILARITY = "similarity"
DICTIONARY = "dictionary"
INTERVAL = "interval"
SPLITTER_TYPES = (SIMILARITY, DICTIONARY, INTERVAL)

_SALT_BOUND = 2 ** 63


def _mix64(v):
    """splitmix64 finalizer on a uint64 array."""
    v = np.asarray(v, dtype=np.uint64)
    with np.errstate(over="ignore"):
        v = v ^ (v >> np.uint64(30))
        v = v * np.uint64(0xBF58476D1CE4E5B9)
        v = v ^ (v >> np.uint64(27))
        v = v * np.uint64(0x94D049BB133111EB)
        return v ^ (v >> np.uint64(31))


def fingerprints(X):
    """A 64-bit content hash per row, used to break distance ties reproducibly."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    return np.array([int.from_bytes(hashlib.blake2b(row.tobytes(), digest_size=8).digest(), "little")
                     for row in X], dtype=np.uint64)


def nearest(D, salt, fps):
    """Column of the row minimum; ties resolved by hashing (salt, series).

    The same series always takes the same branch of a given splitter, at
    training and at prediction time, while different splitters break ties
    independently.  ``D`` may carry leading candidate axes, with ``salt``
    holding one value per candidate.
    """
    ties = D == D.min(axis=-1, keepdims=True)
    choice = np.argmax(ties, axis=-1)
    n_ties = ties.sum(axis=-1)
    multi = np.nonzero(n_ties > 1)
    if multi[0].size:
        salts = np.broadcast_to(np.asarray(salt, dtype=np.uint64), D.shape[:-2])[multi[:-1]]
        r = _mix64(fps[multi[-1]] ^ salts) % n_ties[multi].astype(np.uint64)
        rank = np.cumsum(ties[multi], axis=1)
        choice[multi] = np.argmax(rank > r[:, None].astype(np.int64), axis=1)
    return choice


@dataclass(eq=False)
class SimilaritySplitter:
    measure: distances.Measure
    exemplars: np.ndarray
    classes: tuple
    salt: int
    kind = SIMILARITY

    @property
    def n_branches(self):
        return len(self.exemplars)

    def route(self, batch, rows):
        if self.measure.uses_derivative:
            A, E = batch.derived[rows], distances.derivative(self.exemplars)
        else:
            A, E = batch.X[rows], self.exemplars
        D = distances.distance_matrix(self.measure, A, E, early_abandon=True, derived=True)
        return nearest(D, self.salt, batch.fps[rows])


@dataclass(eq=False)
class DictionarySplitter:
    transform: int
    exemplars: dictionary.Histograms
    classes: tuple
    salt: int
    kind = DICTIONARY

    @property
    def n_branches(self):
        return len(self.exemplars)

    def route(self, batch, rows):
        D = dictionary.boss_distance_matrix(batch.histograms(self.transform), self.exemplars, rows)
        return nearest(D, self.salt, batch.fps[rows])


@dataclass(eq=False)
class IntervalSplitter:
    interval: spectral.Interval
    feature: str
    attribute: int
    threshold: float
    kind = INTERVAL
    n_branches = 2

    def route(self, batch, rows):
        values = spectral.transform_rows(batch.X[rows], self.interval, self.feature)
        return (values[:, self.attribute] > self.threshold).astype(np.int64)


@dataclass(eq=False)
class Leaf:
    label: int
    forced: bool = False


@dataclass(eq=False)
class Internal:
    splitter: object
    children: list
    fallback: int


class TrainingContext:
    """Read-only data shared by every tree of one training run."""

    def __init__(self, X, y, n_classes, pool=None):
        self.X = np.ascontiguousarray(X, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.int64)
        self.n_classes = n_classes
        self.length = self.X.shape[1]
        self.derived = distances.derivative(self.X) if self.length >= 3 else self.X
        self.sigma = float(self.X.std())
        self.fps = fingerprints(self.X)
        self.pool = pool


class QueryBatch:
    """Queries to classify, with lazily computed views shared across trees.

    BOSS histograms are memoized per transform, so each transform is applied
    to a query at most once per batch.
    """

    def __init__(self, X, transforms):
        self.X = np.ascontiguousarray(X, dtype=np.float64)
        self.fps = fingerprints(self.X)
        self.transforms = transforms
        self._derived = None
        self._memo = {}
        self._lock = threading.Lock()

    @property
    def derived(self):
        if self._derived is None:
            self._derived = distances.derivative(self.X) if self.X.shape[1] >= 3 else self.X
        return self._derived

    def histograms(self, k):
        with self._lock:
            if k not in self._memo:
                self._memo[k] = self.transforms[k].apply(self.X)
            return self._memo[k]


def best_thresholds(F, labels, n_classes):
    """Best ``<=`` / ``>`` cut for every column of ``F`` (instances, attributes).

    Midpoints between consecutive distinct sorted values are scored by
    weighted Gini; the lowest-scoring one wins (first on ties).  Columns whose
    values are all equal get a NaN threshold and the parent Gini.
    """
    F = np.asarray(F, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n, n_attrs = F.shape
    order = np.argsort(F, axis=0, kind="stable")
    v = np.take_along_axis(F, order, axis=0)
    total = class_counts(labels, n_classes)
    left = np.cumsum(np.eye(n_classes, dtype=np.int64)[labels[order]], axis=0)[:-1]
    right = total - left
    nl = np.arange(1, n, dtype=np.float64)[:, None]
    nr = n - nl
    with np.errstate(invalid="ignore", divide="ignore"):
        g = (nl - (left ** 2).sum(axis=2) / nl + nr - (right ** 2).sum(axis=2) / nr) / n
    g[~(v[:-1] < v[1:])] = np.inf
    best = np.argmin(g, axis=0)
    cols = np.arange(n_attrs)
    score = g[best, cols]
    lo, hi = v[best, cols], v[best + 1, cols]
    thr = (lo + hi) / 2.0
    thr = np.where(thr < hi, thr, lo)
    flat = np.isinf(score)
    thr[flat] = np.nan
    score[flat] = split_gini(total[None, :])
    return thr, score


def find_best_threshold(values, labels, n_classes=None):
    """Single-attribute ``best_thresholds``; returns ``(None, parent_gini)`` when flat."""
    values = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if values.shape[0] < 2:
        raise TsChiefError("need at least two instances")
    c = int(labels.max()) + 1 if n_classes is None else n_classes
    thr, g = best_thresholds(values[:, None], labels, c)
    return (None if np.isnan(thr[0]) else float(thr[0])), float(g[0])


class Candidate:
    """A scored split.  The splitter object is built on first access, so
    losing candidates never materialize their exemplars."""

    __slots__ = ("kind", "n_branches", "assign", "gini", "splittable", "_make", "_splitter")

    def __init__(self, kind, n_branches, assign, gini, splittable, make):
        self.kind, self.n_branches = kind, n_branches
        self.assign, self.gini, self.splittable = assign, gini, splittable
        self._make, self._splitter = make, None

    @property
    def splitter(self):
        if self._splitter is None:
            self._splitter = self._make()
        return self._splitter


def _score(assign, y, n_branches, n_classes):
    """(gini, splittable) for candidate assignments of shape (candidates, instances)."""
    n_cand = assign.shape[0]
    cells = n_branches * n_classes
    key = (np.arange(n_cand)[:, None] * cells + assign * n_classes + y[None, :]).ravel()
    counts = np.bincount(key, minlength=n_cand * cells).reshape(n_cand, n_branches, n_classes)
    nonempty = (counts.sum(axis=2) > 0).sum(axis=1)
    return split_gini(counts), nonempty >= 2


def _candidates(kind, n_branches, assign, y, n_classes, makers):
    ginis, ok = _score(assign, y, n_branches, n_classes)
    return [Candidate(kind, n_branches, assign[j], float(ginis[j]), bool(ok[j]), makers[j])
            for j in range(assign.shape[0])]


def _pick_exemplars(rng, members, size):
    """One random instance per class for each of ``size`` candidates: (size, classes)."""
    return np.stack([m[rng.integers(len(m), size=size)] for m in members], axis=1)


def similarity_candidates(ctx, idx, count, rng):
    y = ctx.y[idx]
    present = np.flatnonzero(class_counts(y, ctx.n_classes))
    members = [idx[y == c] for c in present]
    classes = tuple(present.tolist())
    X, dX = ctx.X[idx], None
    out = []
    for _ in range(count):
        measure = distances.sample_measure(rng, ctx.length, ctx.sigma)
        ex = _pick_exemplars(rng, members, 1)[0]
        salt = int(rng.integers(_SALT_BOUND))
        if measure.uses_derivative:
            if dX is None:
                dX = ctx.derived[idx]
            D = distances.distance_matrix(measure, dX, ctx.derived[ex], True, derived=True)
        else:
            D = distances.distance_matrix(measure, X, ctx.X[ex], True, derived=True)

        def make(measure=measure, ex=ex, salt=salt):
            return SimilaritySplitter(measure, ctx.X[ex].copy(), classes, salt)
        out += _candidates(SIMILARITY, len(present), nearest(D, salt, ctx.fps[idx])[None, :],
                           y, ctx.n_classes, [make])
    return out


def dictionary_candidates(ctx, idx, count, rng):
    if count == 0 or ctx.pool is None:
        return []
    y = ctx.y[idx]
    present = np.flatnonzero(class_counts(y, ctx.n_classes))
    members = [idx[y == c] for c in present]
    ks = rng.integers(len(ctx.pool), size=count)
    ex = _pick_exemplars(rng, members, count)
    salts = rng.integers(_SALT_BOUND, size=count)
    D = ctx.pool.candidate_distances(ks, idx, ex)
    assign = nearest(D, salts.astype(np.uint64), ctx.fps[idx])
    classes = tuple(present.tolist())

    def maker(j):
        k = int(ks[j])
        return lambda: DictionarySplitter(k, ctx.pool.training_histograms(k, ex[j]), classes,
                                          int(salts[j]))
    return _candidates(DICTIONARY, len(present), assign, y, ctx.n_classes,
                       [maker(j) for j in range(count)])


def interval_plan(count):
    """(intervals, attributes per interval and transform) for ``count`` candidates."""
    per_kind = count // len(spectral.KINDS)
    if per_kind == 0:
        return 0, 0
    intervals = -(-per_kind // 16)
    return intervals, per_kind // intervals


def interval_candidates(ctx, idx, count, rng):
    if ctx.length < spectral.MIN_INTERVAL:
        return []
    n_intervals, n_attrs = interval_plan(count)
    y = ctx.y[idx]
    X = ctx.X[idx]
    out = []
    for _ in range(n_intervals):
        iv = spectral.sample_interval(rng, ctx.length)
        for kind in spectral.KINDS:
            F = spectral.transform_rows(X, iv, kind)
            attrs = rng.choice(F.shape[1], size=min(n_attrs, F.shape[1]), replace=False)
            cols = F[:, attrs]
            thr, _ = best_thresholds(cols, y, ctx.n_classes)
            thr = np.where(np.isnan(thr), cols[0], thr)
            assign = (cols > thr[None, :]).astype(np.int64).T

            def maker(a, t, iv=iv, kind=kind):
                return lambda: IntervalSplitter(iv, kind, int(a), float(t))
            out += _candidates(INTERVAL, 2, assign, y, ctx.n_classes,
                               [maker(a, t) for a, t in zip(attrs, thr)])
    return out


_GENERATORS = {
    SIMILARITY: similarity_candidates,
    DICTIONARY: dictionary_candidates,
    INTERVAL: interval_candidates,
}


@dataclass
class TreeStats:
    """Per-tree counters; ``seconds`` and ``nodes_log`` are filled only when instrumented."""

    nodes: dict = field(default_factory=lambda: dict.fromkeys(SPLITTER_TYPES, 0))
    leaves: int = 0
    forced_leaves: int = 0
    depth: int = 0
    seconds: dict = field(default_factory=lambda: dict.fromkeys(SPLITTER_TYPES, 0.0))
    nodes_log: list = field(default_factory=list)
    leaf_sizes: list = field(default_factory=list)


class GiniInvariantError(AssertionError):
    pass


def build_tree(ctx, idx, counts, rng, instrument=False, check_invariants=False):
    """Grow one tree to purity from the instances ``idx``.

    ``counts`` maps splitter type to candidates per node.  Returns the root and
    a ``TreeStats``.  With ``instrument`` each internal node logs the winner's
    type, Gini and partition sizes plus ``(type, gini)`` for every splittable
    candidate; ``check_invariants`` asserts the winner attains the minimum.
    """
    stats = TreeStats()
    root = [None]
    stack = [(np.asarray(idx, dtype=np.int64), 0, root, 0)]
    while stack:
        node_idx, depth, slot, pos = stack.pop()
        stats.depth = max(stats.depth, depth)
        dist = class_counts(ctx.y[node_idx], ctx.n_classes)
        label = majority(dist)
        if (dist > 0).sum() <= 1:
            slot[pos] = Leaf(label)
            stats.leaves += 1
            stats.leaf_sizes.append(len(node_idx))
            continue
        cands = []
        for kind in SPLITTER_TYPES:
            n = counts.get(kind, 0)
            if n <= 0:
                continue
            t0 = time.perf_counter() if instrument else 0.0
            cands.extend(_GENERATORS[kind](ctx, node_idx, n, rng))
            if instrument:
                stats.seconds[kind] += time.perf_counter() - t0
        valid = [c for c in cands if c.splittable]
        if not valid:
            slot[pos] = Leaf(label, forced=True)
            stats.leaves += 1
            stats.leaf_sizes.append(len(node_idx))
            stats.forced_leaves += 1
            continue
        ginis = np.array([c.gini for c in valid])
        ties = np.flatnonzero(ginis == ginis.min())
        best = valid[ties[rng.integers(len(ties))]] if len(ties) > 1 else valid[ties[0]]
        if check_invariants:
            parts = [class_counts(ctx.y[node_idx[best.assign == b]], ctx.n_classes)
                     for b in range(best.n_branches)]
            if split_gini(np.array(parts)) > ginis.min():
                raise GiniInvariantError("stored splitter is not the Gini minimum")
        if instrument:
            stats.nodes_log.append({
                "kind": best.kind, "gini": best.gini, "size": len(node_idx),
                "branch_sizes": np.bincount(best.assign, minlength=best.n_branches).tolist(),
                "candidates": [(c.kind, c.gini) for c in valid],
            })
        node = Internal(best.splitter, [None] * best.n_branches, label)
        slot[pos] = node
        stats.nodes[best.kind] += 1
        for b in reversed(range(best.n_branches)):
            sub = node_idx[best.assign == b]
            if sub.size:
                stack.append((sub, depth + 1, node.children, b))
    return root[0], stats


def predict_tree(root, batch):
    """Class index for every query in ``batch``; subsets are routed together."""
    out = np.empty(batch.X.shape[0], dtype=np.int64)
    stack = [(root, np.arange(batch.X.shape[0]))]
    while stack:
        node, rows = stack.pop()
        if isinstance(node, Leaf):
            out[rows] = node.label
            continue
        assign = node.splitter.route(batch, rows)
        for b, child in enumerate(node.children):
            sel = rows[assign == b]
            if not sel.size:
                continue
            if child is None:
                out[sel] = node.fallback
            else:
                stack.append((child, sel))
    return out


def classify(series, root, batch_factory):
    """Single-query convenience wrapper around ``predict_tree``."""
    return int(predict_tree(root, batch_factory(np.asarray(series)[None, :]))[0])


def iter_nodes(root):
    stack = [root]
    while stack:
        node = stack.pop()
        if node is None:
            continue
        yield node
        if isinstance(node, Internal):
            stack.extend(node.children)
