import numpy as np
import pytest

from tschief.core import ConfigError, LabeledDataset, TsChiefError
from tschief.forest import ForestConfig, TsChiefForest, train
from tschief.tree import Leaf

from .test_tree import make_data

SMALL = dict(k=5, t=20, Ce=3, Cb=10, Cr=8)


@pytest.fixture(scope="module")
def dataset():
    X, y = make_data(0, n=30, length=40)
    return LabeledDataset(X, y, 3)


@pytest.fixture(scope="module")
def forest(dataset):
    return train(dataset, ForestConfig(seed=1, threads=1, **SMALL))


def test_paper_defaults():
    c = ForestConfig()
    assert (c.k, c.t, c.Ce, c.Cb, c.Cr) == (500, 1000, 5, 100, 100)


@pytest.mark.parametrize("bad, field", [
    (dict(k=0), "k"), (dict(Ce=-1), "Ce"), (dict(Ce=0, Cb=0, Cr=0), "Ce \\+ Cb \\+ Cr"),
    (dict(t=0), "t"), (dict(threads=0), "threads"),
])
def test_config_errors_name_the_bound(bad, field):
    with pytest.raises(ConfigError, match=field):
        ForestConfig(**bad).validate()


def test_short_series_rejected_for_interval_and_dictionary():
    d = LabeledDataset(np.random.default_rng(0).normal(size=(4, 12)), [0, 1, 0, 1], 2)
    with pytest.raises(ConfigError, match="Cr"):
        train(d, ForestConfig(k=1, t=2))
    train(d, ForestConfig(k=1, t=2, Cr=0))
    with pytest.raises(ConfigError, match="Cb"):
        train(LabeledDataset(d.X[:, :8], d.y, 2), ForestConfig(k=1, Cr=0))


def test_single_tree_fits_training_set(dataset):
    f = train(dataset, ForestConfig(k=1, seed=0, threads=1, **{k: v for k, v in SMALL.items() if k != "k"}))
    assert len(f.trees) == 1
    assert np.array_equal(f.predict(dataset.X), dataset.y)


def test_evaluate_training_set_is_perfect(forest, dataset):
    ev = forest.evaluate(dataset)
    assert ev.accuracy == 1.0 and ev.predictions.shape == (dataset.n,)


def test_equal_seeds_equal_predictions(dataset):
    Q = np.random.default_rng(5).normal(size=(40, 40))
    a = train(dataset, ForestConfig(seed=3, threads=1, **SMALL)).predict(Q)
    b = train(dataset, ForestConfig(seed=3, threads=3, **SMALL)).predict(Q, threads=2)
    assert np.array_equal(a, b)


def _fixed_votes(labels, n_classes):
    return TsChiefForest(ForestConfig(k=len(labels)), [Leaf(l) for l in labels], {},
                         n_classes, 20)


@pytest.mark.parametrize("labels, expected", [([1, 1, 2], 1), ([0, 0, 1, 1], 0), ([2], 2),
                                              ([2, 1, 1, 2], 1)])
def test_vote_and_tie_rule(labels, expected):
    f = _fixed_votes(labels, 3)
    assert f.predict(np.zeros(20)) == expected


def test_proba_examples():
    f = _fixed_votes([0, 0, 0, 1], 2)
    assert f.predict_proba(np.zeros(20)).tolist() == [0.75, 0.25]
    assert _fixed_votes([1, 1], 3).predict_proba(np.zeros(20)).tolist() == [0.0, 1.0, 0.0]


def test_proba_consistent_with_predict(forest):
    Q = np.random.default_rng(8).normal(size=(60, 40))
    p = forest.predict_proba(Q)
    assert np.allclose(p.sum(axis=1), 1.0, atol=1e-12)
    assert np.array_equal(np.argmax(p, axis=1), forest.predict(Q))


def test_length_mismatch_and_empty(forest, dataset):
    with pytest.raises(TsChiefError, match="length mismatch"):
        forest.predict(np.zeros(39))
    with pytest.raises(TsChiefError):
        forest.predict(np.zeros((0, 40)))
    with pytest.raises(TsChiefError, match="length mismatch"):
        forest.evaluate(LabeledDataset(np.zeros((2, 10)), [0, 1], 3))


def test_node_counts_and_instrumentation(dataset):
    f = train(dataset, ForestConfig(seed=2, threads=1, **SMALL), instrument=True,
              check_invariants=True)
    counts = f.node_counts()
    assert sum(counts.values()) == sum(len(s.nodes_log) for s in f.stats) > 0
    assert all(s.seconds["similarity"] > 0 for s in f.stats if s.nodes_log)


def test_only_used_transforms_are_kept(forest):
    from tschief.tree import DictionarySplitter, iter_nodes
    used = {n.splitter.transform for t in forest.trees for n in iter_nodes(t)
            if isinstance(getattr(n, "splitter", None), DictionarySplitter)}
    assert set(forest.transforms) == used
