"""BOSS transform: sliding-window SFA words, MCB quantization, word histograms
and the asymmetric BOSS distance."""

from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import TsChiefError

ALPHABET = 4
WORD_LENGTHS = (6, 8, 10, 12, 14, 16)
MIN_WINDOW = 10


def usable_coefficients(window, norm):
    """Interleaved real/imaginary values available from a window's DFT."""
    return 2 * (window // 2 + 1) - (2 if norm else 0)


@dataclass(frozen=True)
class BossParams:
    window: int
    word_length: int
    norm: bool
    alphabet: int = ALPHABET

    def validate(self, length=None):
        if self.window < 2:
            raise TsChiefError("window too short")
        if length is not None and self.window > length:
            raise TsChiefError("window longer than series")
        if self.word_length > usable_coefficients(self.window, self.norm):
            raise TsChiefError(
                f"word length {self.word_length} too large for window {self.window}")
        return self


def sample_params(rng, length):
    """norm, then window in [10, length], then an even word length the window supports."""
    norm = bool(rng.integers(2))
    window = int(rng.integers(MIN_WINDOW, length + 1))
    usable = usable_coefficients(window, norm)
    choices = [f for f in WORD_LENGTHS if f <= usable]
    word_length = choices[rng.integers(len(choices))]
    return BossParams(window, word_length, norm)


def sfa_coefficients(window, f, norm):
    """Low-frequency DFT values of one window, real/imag interleaved, scaled by 1/std."""
    w = np.ascontiguousarray(window, dtype=np.float64)
    if f > usable_coefficients(len(w), norm):
        raise TsChiefError(f"word length {f} too large for window {len(w)}")
    return _kernels.sfa_windows(w[None, :], len(w), f, norm)[0, 0]


def window_coefficients(X, params):
    """Coefficients of every sliding window: shape (n, length - w + 1, f)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.shape[1] < params.window:
        raise TsChiefError("series shorter than window")
    return _kernels.sfa_windows(X, params.window, params.word_length, params.norm)


def fit_mcb(columns, alphabet=ALPHABET):
    """Equi-depth breakpoints per coefficient position.

    ``columns`` is (samples, f).  Breakpoint k is the midpoint between the
    order statistics at ranks ``floor(k*N/alphabet) - 1`` and ``floor(k*N/alphabet)``
    (clamped to the sample range when there are fewer samples than symbols).
    """
    cols = np.asarray(columns, dtype=np.float64)
    if cols.ndim == 1:
        cols = cols[:, None]
    n = cols.shape[0]
    if n == 0:
        raise TsChiefError("no samples to fit breakpoints")
    ranks = np.array([k * n // alphabet for k in range(1, alphabet)])
    lo, hi = np.maximum(ranks - 1, 0), np.minimum(ranks, n - 1)
    part = np.sort(cols.T, axis=1)
    return np.ascontiguousarray((part[:, lo] + part[:, hi]) / 2.0)


def quantize(coeffs, mcb):
    """Word ids for coefficient vectors of shape (n, windows, f)."""
    return _kernels.sfa_words(np.ascontiguousarray(coeffs, dtype=np.float64),
                              np.ascontiguousarray(mcb, dtype=np.float64))


@dataclass(frozen=True, eq=False)
class Histograms:
    """Word histograms for a batch of series in CSR layout, words sorted per row."""

    ptr: np.ndarray
    words: np.ndarray
    counts: np.ndarray

    def __len__(self):
        return len(self.ptr) - 1

    def row(self, i):
        lo, hi = self.ptr[i], self.ptr[i + 1]
        return dict(zip(self.words[lo:hi].tolist(), self.counts[lo:hi].tolist()))

    def take(self, rows):
        rows = np.asarray(rows, dtype=np.int64)
        lo, hi = self.ptr[rows], self.ptr[rows + 1]
        sizes = hi - lo
        ptr = np.zeros(len(rows) + 1, dtype=np.int64)
        np.cumsum(sizes, out=ptr[1:])
        sel = np.repeat(lo - ptr[:-1], sizes) + np.arange(ptr[-1])
        return Histograms(ptr, self.words[sel], self.counts[sel])


def histograms(X, params, mcb):
    words = quantize(window_coefficients(X, params), mcb)
    return Histograms(*_kernels.histograms(words))


def transform_series(series, params, mcb):
    """Numerosity-reduced word histogram of one series as ``{word: count}``."""
    x = np.asarray(series, dtype=np.float64)
    if x.shape[0] < params.window:
        raise TsChiefError("series shorter than window")
    return histograms(x[None, :], params, mcb).row(0)


def boss_dist(a, b):
    """Sum over words of ``a`` of the squared count difference; words only in ``b`` are ignored."""
    if not isinstance(b, Mapping):
        b = dict(b)
    return float(sum((c - b.get(w, 0)) ** 2 for w, c in a.items()))


def boss_distance_matrix(A, B, rows_a=None, rows_b=None):
    """BOSS distances between selected rows of two ``Histograms`` batches."""
    rows_a = np.arange(len(A), dtype=np.int64) if rows_a is None else np.asarray(rows_a, np.int64)
    rows_b = np.arange(len(B), dtype=np.int64) if rows_b is None else np.asarray(rows_b, np.int64)
    return _kernels.boss_distance_matrix(A.ptr, A.words, A.counts, rows_a,
                                         B.ptr, B.words, B.counts, rows_b)


@dataclass(frozen=True, eq=False)
class BossTransform:
    params: BossParams
    mcb: np.ndarray

    def apply(self, X):
        return histograms(X, self.params, self.mcb)


def fit_transform(X, params):
    """Fit MCB on all training windows, returning the transform and training histograms."""
    coeffs = window_coefficients(X, params)
    mcb = fit_mcb(coeffs.reshape(-1, coeffs.shape[2]), params.alphabet)
    hist = Histograms(*_kernels.histograms(quantize(coeffs, mcb)))
    return BossTransform(params, mcb), hist


class BossPool:
    """``t`` fitted transforms plus every training histogram, stored in one CSR.

    Row ``k * n + i`` holds the histogram of training series ``i`` under
    transform ``k``.
    """

    def __init__(self, transforms, hists, n):
        self.transforms = list(transforms)
        self.n = n
        sizes = np.array([len(h.words) for h in hists], dtype=np.int64)
        offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
        self.ptr = np.empty(len(hists) * n + 1, dtype=np.int64)
        for k, h in enumerate(hists):
            self.ptr[k * n:(k + 1) * n] = h.ptr[:-1] + offsets[k]
        self.ptr[-1] = sizes.sum()
        self.words = np.concatenate([h.words for h in hists])
        self.counts = np.concatenate([h.counts for h in hists])

    def __len__(self):
        return len(self.transforms)

    def rows(self, k, idx):
        return k * self.n + np.asarray(idx, dtype=np.int64)

    def training_histograms(self, k, idx):
        view = Histograms(self.ptr, self.words, self.counts)
        return view.take(self.rows(k, idx))

    def candidate_distances(self, transform_idx, inst_idx, exemplar_idx):
        """BOSS distances (candidates, instances, exemplars) for a batch of candidates."""
        t = np.asarray(transform_idx, dtype=np.int64)[:, None] * self.n
        inst = np.ascontiguousarray(t + np.asarray(inst_idx, dtype=np.int64)[None, :])
        ex = np.ascontiguousarray(t + np.asarray(exemplar_idx, dtype=np.int64))
        return _kernels.boss_candidate_distances(self.ptr, self.words, self.counts, inst, ex)


def precompute_transforms(X, t, rng):
    """Sample ``t`` parameter sets, fit each on ``X`` and materialize all histograms."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if t < 1:
        raise TsChiefError("pool size must be at least 1")
    if X.shape[1] < MIN_WINDOW:
        raise TsChiefError("series too short for BOSS")
    transforms, hists = [], []
    for _ in range(t):
        tr, h = fit_transform(X, sample_params(rng, X.shape[1]))
        transforms.append(tr)
        hists.append(h)
    return BossPool(transforms, hists, X.shape[0])
