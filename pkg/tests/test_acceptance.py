"""End-to-end acceptance checks, one test per criterion.

Every test records a PASS/FAIL line that is repeated in the terminal summary.
The desk-scale accuracy and scaling checks are marked ``slow``.
"""

import statistics
import time

import numpy as np
import pytest

from tschief.core import LabeledDataset
from tschief.dictionary import fit_transform, sample_params, transform_series
from tschief.distances import Measure, distance
from tschief.forest import ForestConfig, train
from tschief.io import load_model, load_ucr_split, save_model
from tschief.spectral import (acf, ar_coefficients, max_lag, pacf, power_spectrum,
                              sample_interval, transform_interval)
from tschief.tree import DictionarySplitter, IntervalSplitter, iter_nodes

from .conftest import record_criterion, ucr_paths
from .oracles import brute_dtw, keogh_derivative, logistic_weight, naive_fit, naive_histogram

SMALL_UCR = ("Coffee", "GunPoint", "ItalyPowerDemand", "Chinatown", "CBF")


def load(name):
    paths = ucr_paths(name)
    if paths is None:
        return None
    return load_ucr_split(*paths)


def small_ucr():
    found = {name: load(name) for name in SMALL_UCR}
    missing = [n for n, d in found.items() if d is None]
    if missing:
        pytest.skip(f"datasets not available: {missing}")
    return found


def test_distance_oracle_equivalence():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst, checks = 0.0, 0
    for _ in range(200):
        n = int(rng.integers(3, 9))
        a, b = rng.normal(size=n), rng.normal(size=n)
        da, db = keogh_derivative(list(a)), keogh_derivative(list(b))
        g = float(rng.uniform(0, 1))
        pairs = []
        for r in range(n):
            pairs.append((distance(Measure("dtw_window", window=r), a, b), brute_dtw(a, b, r)))
            pairs.append((distance(Measure("ddtw_window", window=r), a, b), brute_dtw(da, db, r)))
        weight = logistic_weight(g, n)
        pairs.append((distance(Measure("wdtw", g=g), a, b), brute_dtw(a, b, n, weight)))
        pairs.append((distance(Measure("wddtw", g=g), a, b), brute_dtw(da, db, n, weight)))
        for got, want in pairs:
            worst = max(worst, abs(got - want))
        checks += len(pairs)
    seconds = time.perf_counter() - t0
    ok = worst <= 1e-9 and seconds < 60
    record_criterion(1, ok, f"DTW/DDTW/WDTW vs path enumeration: {checks} checks, "
                            f"max error {worst:.2e}, {seconds:.1f}s")
    assert ok


def test_boss_pipeline_oracle():
    rng = np.random.default_rng(77)
    t0 = time.perf_counter()
    mismatches, combos = 0, set()
    for _ in range(100):
        length = int(rng.integers(10, 65))
        X = rng.normal(size=(3, length))
        params = sample_params(rng, length)
        combos.add((params.window, params.word_length, params.norm))
        tr, _ = fit_transform(X, params)
        table = naive_fit([list(r) for r in X], params.window, params.word_length, params.norm)
        want = naive_histogram(list(X[0]), params.window, params.word_length, params.norm, table)
        got = transform_series(X[0], params, tr.mcb)
        if got != want or not np.allclose(tr.mcb, table, atol=1e-9):
            mismatches += 1
    seconds = time.perf_counter() - t0
    ok = mismatches == 0 and seconds < 120
    record_criterion(2, ok, f"BOSS histograms vs naive pipeline: {mismatches}/100 mismatches, "
                            f"{len(combos)} parameter sets, {seconds:.1f}s")
    assert ok


def test_spectral_checks():
    rng = np.random.default_rng(5)
    worst_rel, pacf_equal = 0.0, True
    for _ in range(100):
        series = rng.normal(size=int(rng.integers(16, 200))) * rng.uniform(0.1, 10)
        iv = sample_interval(rng, len(series))
        sub = series[iv.start:iv.stop]
        ps = transform_interval(series, iv, "ps")
        m = iv.length
        # one-sided spectrum: every bin except Nyquist is mirrored
        two_sided = 2 * ps.sum() - (ps[-1] if m % 2 == 0 else 0.0)
        energy = m * ((sub - sub.mean()) ** 2).sum()
        worst_rel = max(worst_rel, abs(two_sided - energy) / energy)
        r = acf(sub, max_lag(m))
        pacf_equal &= bool(pacf(r)[0] == r[0])
    x = np.zeros(512)
    e = rng.normal(size=512)
    for i in range(1, 512):
        x[i] = 0.5 * x[i - 1] + e[i]
    phi = float(ar_coefficients(x, 5)[0])
    assert np.array_equal(power_spectrum(np.full(16, 2.0)), np.zeros(8))
    ok = worst_rel <= 1e-6 and pacf_equal and abs(phi - 0.5) < 0.1
    record_criterion(3, ok, f"Parseval max rel error {worst_rel:.1e}; pacf[1]==acf[1]: "
                            f"{pacf_equal}; AR(1) estimate {phi:.3f} for 0.5")
    assert ok


def test_gini_argmin_instrumentation():
    data = small_ucr()
    checked = 0
    for name, (tr, _) in data.items():
        forest = train(tr, ForestConfig(k=10, seed=0), instrument=True, check_invariants=True)
        for stats in forest.stats:
            for node in stats.nodes_log:
                assert node["gini"] == min(g for _, g in node["candidates"])
                checked += 1
    record_criterion(4, True, f"stored splitter attains the candidate Gini minimum at all "
                              f"{checked} internal nodes over {len(data)} datasets (k=10)")


def test_proximity_forest_reduction():
    tr, _ = load("GunPoint") or pytest.skip("GunPoint not available")
    forest = train(tr, ForestConfig(k=10, Cb=0, Cr=0, seed=1))
    bad = sum(isinstance(getattr(n, "splitter", None), (DictionarySplitter, IntervalSplitter))
              for t in forest.trees for n in iter_nodes(t))
    counts = forest.node_counts()
    ok = bad == 0 and counts["dictionary"] == counts["interval"] == 0 and counts["similarity"] > 0
    record_criterion(5, ok, f"Cb=Cr=0: {bad} dictionary/interval splitters, "
                            f"{counts['similarity']} similarity nodes")
    assert ok


def test_determinism():
    tr, te = load("ItalyPowerDemand") or pytest.skip("ItalyPowerDemand not available")
    cfg = dict(k=10, seed=11)
    runs = [train(tr, ForestConfig(threads=1, **cfg)).predict(te.X, threads=1),
            train(tr, ForestConfig(threads=1, **cfg)).predict(te.X, threads=1),
            train(tr, ForestConfig(threads=4, **cfg)).predict(te.X, threads=4)]
    same = all(r.tobytes() == runs[0].tobytes() for r in runs)
    record_criterion(6, same, f"prediction vectors byte-identical over 2 runs and threads {{1, 4}}: "
                              f"{same}")
    assert same


DESK_TARGETS = {"Coffee": 0.96, "GunPoint": 0.98, "ItalyPowerDemand": 0.94,
                "SonyAIBORobotSurface2": 0.87}


@pytest.mark.slow
def test_desk_scale_accuracy():
    t0 = time.perf_counter()
    results, missing = {}, []
    for name, target in DESK_TARGETS.items():
        split = load(name)
        if split is None:
            missing.append(name)
            continue
        tr, te = split
        accs = [train(tr, ForestConfig(k=100, seed=s)).evaluate(te).accuracy for s in range(3)]
        results[name] = statistics.fmean(accs)
    seconds = time.perf_counter() - t0
    below = {n: a for n, a in results.items() if a < DESK_TARGETS[n]}
    parts = [f"{n} {a:.4f} (>= {DESK_TARGETS[n]})" for n, a in results.items()]
    parts += [f"{n} not available" for n in missing]
    ok = not below and not missing and seconds < 1800
    record_criterion(7, ok, "mean of 3 seeds at k=100: " + "; ".join(parts)
                            + f"; {seconds / 60:.1f} min")
    assert not below, f"below target: {below}"
    assert seconds < 1800
    if missing:
        pytest.skip(f"no data for {missing}; set UCR_ARCHIVE_DIR to a UCR archive copy")


@pytest.mark.slow
def test_quasi_linear_scaling():
    rng = np.random.default_rng(46)
    t0 = time.perf_counter()
    medians = {}
    for n in (1000, 2000, 4000):
        X = rng.normal(size=(n, 46))
        y = np.arange(n) % 4
        data = LabeledDataset(X, rng.permutation(y), 4)
        times = []
        for rep in range(3):
            start = time.perf_counter()
            train(data, ForestConfig(k=10, seed=rep))
            times.append(time.perf_counter() - start)
        medians[n] = statistics.median(times)
    ratios = [medians[2000] / medians[1000], medians[4000] / medians[2000]]
    seconds = time.perf_counter() - t0
    ok = all(r <= 2.8 for r in ratios) and seconds < 1200
    record_criterion(8, ok, "median train seconds "
                            + ", ".join(f"n={n}: {s:.1f}" for n, s in medians.items())
                            + f"; ratios {ratios[0]:.2f}, {ratios[1]:.2f} (<= 2.8); "
                            f"{seconds / 60:.1f} min")
    assert ok


def test_model_round_trip(tmp_path):
    tr, _ = load("ItalyPowerDemand") or pytest.skip("ItalyPowerDemand not available")
    forest = train(tr, ForestConfig(k=10, seed=3))
    path = tmp_path / "model.tscf"
    save_model(forest, path)
    queries = np.random.default_rng(9).normal(size=(100, tr.length))
    same = np.array_equal(load_model(path).predict(queries), forest.predict(queries))
    record_criterion(9, same, f"save/load predictions identical on 100 random queries: {same}")
    assert same


def test_ablation_direction():
    data = small_ucr()
    arms = {"sim+dict": dict(Cr=0), "int": dict(Ce=0, Cb=0)}
    acc = {arm: [] for arm in arms}
    for tr, te in data.values():
        for arm, off in arms.items():
            acc[arm].append(train(tr, ForestConfig(k=10, seed=0, **off)).evaluate(te).accuracy)
    means = {arm: statistics.fmean(v) for arm, v in acc.items()}
    holds = means["sim+dict"] >= means["int"]
    # reported, not asserted
    record_criterion(10, holds, f"mean accuracy sim+dict {means['sim+dict']:.4f} vs int "
                                f"{means['int']:.4f} over {len(data)} datasets (soft check)")
