from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tschief import _kernels
from tschief.core import TsChiefError
from tschief.distances import (KINDS, MSM_COSTS, TWE_LAMBDAS, TWE_NUS, Measure, derivative,
                               distance, distance_matrix, sample_measure)

from .oracles import brute_dtw, keogh_derivative, logistic_weight

MEASURES = [
    Measure("euclidean"), Measure("dtw"), Measure("dtw_window", window=2),
    Measure("ddtw"), Measure("ddtw_window", window=1), Measure("wdtw", g=0.3),
    Measure("wddtw", g=0.7), Measure("lcss", window=3, epsilon=0.4),
    Measure("erp", window=2, gap_value=0.5), Measure("msm", cost=0.5),
    Measure("twe", nu=0.01, lam=0.05),
]

values = st.floats(-10, 10, allow_nan=False)


@st.composite
def series_pair(draw, min_len=3, max_len=12):
    n = draw(st.integers(min_len, max_len))
    a = draw(st.lists(values, min_size=n, max_size=n))
    b = draw(st.lists(values, min_size=n, max_size=n))
    return np.array(a), np.array(b)


def test_sample_euclidean_has_no_parameters(rng):
    m = sample_measure(rng, 50, 1.0, kind="euclidean")
    assert m.to_dict() == {"kind": "euclidean"}


def test_sampled_parameter_ranges(rng):
    length, sigma = 40, 2.0
    for _ in range(3000):
        m = sample_measure(rng, length, sigma)
        d = m.to_dict()
        if m.kind in ("dtw_window", "ddtw_window", "lcss", "erp"):
            assert 0 <= m.window <= length // 4
        if m.kind in ("wdtw", "wddtw"):
            assert 0.0 <= m.g <= 1.0
        if m.kind == "lcss":
            assert sigma / 5 <= m.epsilon <= sigma
        if m.kind == "erp":
            assert sigma / 5 <= m.gap_value <= sigma
        if m.kind == "msm":
            assert m.cost in MSM_COSTS
        if m.kind == "twe":
            assert m.nu in TWE_NUS and m.lam in TWE_LAMBDAS
        if m.kind in ("euclidean", "dtw", "ddtw"):
            assert set(d) == {"kind"}


def test_msm_grid_spans_range():
    assert len(MSM_COSTS) == 100
    assert MSM_COSTS[0] == pytest.approx(0.01) and MSM_COSTS[-1] == pytest.approx(100.0)
    assert np.allclose(np.diff(np.log(MSM_COSTS)), np.log(10) * 4 / 99)
    assert len(TWE_LAMBDAS) == 10 and TWE_LAMBDAS[-1] == pytest.approx(0.1)


def test_kind_frequencies_are_uniform(rng):
    counts = Counter(sample_measure(rng, 30, 1.0).kind for _ in range(11000))
    assert set(counts) == set(KINDS)
    assert all(850 <= c <= 1150 for c in counts.values()), counts


def test_derivative_examples():
    assert np.allclose(derivative([0, 1, 2, 3]), 1.0)
    assert np.array_equal(derivative([4, 4, 4]), np.zeros(3))
    assert derivative([0, 1, 0, 1])[1] == pytest.approx(0.5)
    with pytest.raises(TsChiefError, match="too short"):
        derivative([1, 2])


@given(st.lists(values, min_size=3, max_size=30))
def test_derivative_matches_literal_formula(x):
    assert np.allclose(derivative(x), keogh_derivative(x), atol=1e-12)


def test_dtw_examples(backend):
    x = np.array([0.3, -1.0, 2.0, 0.5, 0.0])
    assert distance(Measure("dtw"), x, x) == 0.0
    assert distance(Measure("msm", cost=1.0), x, x) == 0.0
    assert distance(Measure("dtw"), [1.0, 2, 3], [2.0, 2, 2]) == pytest.approx(2.0, abs=1e-12)
    y = x[::-1].copy()
    assert distance(Measure("dtw_window", window=0), x, y) == pytest.approx(((x - y) ** 2).sum())


def test_length_mismatch():
    with pytest.raises(TsChiefError, match="length mismatch"):
        distance(Measure("dtw"), [1.0, 2, 3], [1.0, 2])
    with pytest.raises(TsChiefError, match="length mismatch"):
        distance_matrix(Measure("dtw"), np.zeros((2, 3)), np.zeros((2, 4)))


@pytest.mark.parametrize("measure", MEASURES, ids=lambda m: m.kind)
@given(pair=series_pair())
def test_identity_and_symmetry(measure, pair):
    a, b = pair
    assert distance(measure, a, a) == pytest.approx(0.0, abs=1e-9)
    d_ab, d_ba = distance(measure, a, b), distance(measure, b, a)
    assert d_ab >= 0.0
    if _kernels.BACKEND == "compiled":
        assert d_ab == d_ba
    else:
        assert d_ab == pytest.approx(d_ba, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("measure", MEASURES, ids=lambda m: m.kind)
@given(pair=series_pair(), frac=st.floats(0.0, 1.5))
def test_early_abandon_agrees_below_cutoff(measure, pair, frac):
    a, b = pair
    exact = distance(measure, a, b)
    cutoff = exact * frac
    got = distance(measure, a, b, cutoff=cutoff)
    if exact < cutoff:
        assert got == exact
    else:
        assert got >= cutoff or got == exact


@given(pair=series_pair(max_len=16))
def test_dtw_monotone_in_band(pair):
    a, b = pair
    d = [distance(Measure("dtw_window", window=r), a, b) for r in range(len(a) + 1)]
    assert all(d[r + 1] <= d[r] for r in range(len(d) - 1))
    assert d[-1] == distance(Measure("dtw"), a, b)


@settings(max_examples=40, deadline=None)
@given(pair=series_pair(min_len=3, max_len=7), g=st.floats(0.0, 1.0))
def test_dtw_family_matches_path_enumeration(backend, pair, g):
    a, b = pair
    n = len(a)
    da, db = keogh_derivative(list(a)), keogh_derivative(list(b))
    for r in range(n + 1):
        assert distance(Measure("dtw_window", window=r), a, b) == pytest.approx(
            brute_dtw(a, b, r), abs=1e-9)
        assert distance(Measure("ddtw_window", window=r), a, b) == pytest.approx(
            brute_dtw(da, db, r), abs=1e-9)
    assert distance(Measure("wdtw", g=g), a, b) == pytest.approx(
        brute_dtw(a, b, n, logistic_weight(g, n)), abs=1e-9)
    assert distance(Measure("wddtw", g=g), a, b) == pytest.approx(
        brute_dtw(da, db, n, logistic_weight(g, n)), abs=1e-9)


def test_lcss_counts_matches_in_band():
    m = Measure("lcss", window=0, epsilon=0.1)
    assert distance(m, [0.0, 1, 2, 3], [0.0, 1, 2, 3]) == 0.0
    assert distance(m, [0.0, 1, 2, 3], [1.0, 2, 3, 9]) == 1.0
    assert distance(Measure("lcss", window=1, epsilon=0.1),
                    [0.0, 1, 2, 3], [1.0, 2, 3, 9]) == pytest.approx(0.25)


def test_erp_msm_twe_hand_values():
    # ERP: gap a0, match a1 with b0, gap b1 -> 0.25 + 0 + 0.25
    assert distance(Measure("erp", window=2, gap_value=0.5), [0.0, 1.0], [1.0, 0.0]) == 0.5
    # MSM: split/merge of a repeated value costs c each
    assert distance(Measure("msm", cost=0.1), [1.0, 1.0, 2.0], [1.0, 2.0, 2.0]) == pytest.approx(0.2)
    # TWE with nu=lam=0: both diagonal matches, costing |0-0| + |0-0| then |1-2| + |0-0|
    assert distance(Measure("twe", nu=0.0, lam=0.0), [0.0, 1.0], [0.0, 2.0]) == pytest.approx(1.0)


def test_distance_matrix_matches_pairwise(backend, rng):
    A, B = rng.normal(size=(4, 15)), rng.normal(size=(3, 15))
    for m in MEASURES:
        D = distance_matrix(m, A, B)
        ref = [[distance(m, a, b) for b in B] for a in A]
        assert np.allclose(D, ref, rtol=1e-12, atol=1e-12)
        E = distance_matrix(m, A, B, early_abandon=True)
        assert np.array_equal(E.min(axis=1), D.min(axis=1)) or np.allclose(
            E.min(axis=1), D.min(axis=1), rtol=1e-12)
        assert np.all((E == D) | (E >= D.min(axis=1, keepdims=True)))
