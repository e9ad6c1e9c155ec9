"""Elastic similarity measures, their parameter samplers and the derivative transform."""

from dataclasses import asdict, dataclass

import numpy as np

from . import _kernels
from .core import TsChiefError

KINDS = (
    "euclidean", "dtw", "dtw_window", "ddtw", "ddtw_window",
    "wdtw", "wddtw", "lcss", "erp", "msm", "twe",
)

_CODES = {
    "euclidean": 0, "dtw": 1, "dtw_window": 1, "ddtw": 1, "ddtw_window": 1,
    "wdtw": 2, "wddtw": 2, "lcss": 3, "erp": 4, "msm": 5, "twe": 6,
}
_DERIVATIVE = frozenset({"ddtw", "ddtw_window", "wddtw"})
_WINDOWED = frozenset({"dtw_window", "ddtw_window", "lcss", "erp"})

MSM_COSTS = np.geomspace(0.01, 100.0, 100)
TWE_NUS = (1e-5, 1e-4, 5e-4, 1e-3, 5e-3, 1e-2, 5e-2, 0.1, 0.5, 1.0)
TWE_LAMBDAS = np.linspace(0.0, 0.1, 10)

_NO_WEIGHTS = np.empty(0, dtype=np.float64)


@dataclass(frozen=True)
class Measure:
    """One elastic measure with its sampled parameters.

    ``window`` is the Sakoe-Chiba radius (``None`` means unconstrained).
    Only the fields relevant to ``kind`` are set.
    """

    kind: str
    window: int | None = None
    g: float | None = None
    epsilon: float | None = None
    gap_value: float | None = None
    cost: float | None = None
    nu: float | None = None
    lam: float | None = None

    def __post_init__(self):
        if self.kind not in _CODES:
            raise TsChiefError(f"unknown measure {self.kind!r}")

    @property
    def uses_derivative(self):
        return self.kind in _DERIVATIVE

    def to_dict(self):
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    def _kernel_args(self, length):
        window = length if self.window is None else min(self.window, length)
        p1 = p2 = 0.0
        weights = _NO_WEIGHTS
        if self.kind in ("wdtw", "wddtw"):
            weights = wdtw_weights(length, self.g)
        elif self.kind == "lcss":
            p1 = self.epsilon
        elif self.kind == "erp":
            p1 = self.gap_value
        elif self.kind == "msm":
            p1 = self.cost
        elif self.kind == "twe":
            p1, p2 = self.nu, self.lam
        return _CODES[self.kind], window, p1, p2, weights


def wdtw_weights(length, g):
    """Logistic weight for each warp amount ``0..length-1``."""
    k = np.arange(length, dtype=np.float64)
    return 1.0 / (1.0 + np.exp(-g * (k - length / 2.0)))


def sample_measure(rng, length, sigma, kind=None):
    """Draw a measure uniformly over the 11 kinds, then its parameters.

    ``sigma`` is the standard deviation of all training values; it scales the
    LCSS threshold and the ERP gap value.  Passing ``kind`` skips the first draw.
    """
    if kind is None:
        kind = KINDS[rng.integers(len(KINDS))]
    params = {}
    if kind in _WINDOWED:
        params["window"] = int(rng.integers(0, length // 4 + 1))
    if kind in ("wdtw", "wddtw"):
        params["g"] = float(rng.uniform(0.0, 1.0))
    elif kind == "lcss":
        params["epsilon"] = float(rng.uniform(sigma / 5.0, sigma))
    elif kind == "erp":
        params["gap_value"] = float(rng.uniform(sigma / 5.0, sigma))
    elif kind == "msm":
        params["cost"] = float(MSM_COSTS[rng.integers(len(MSM_COSTS))])
    elif kind == "twe":
        params["nu"] = float(TWE_NUS[rng.integers(len(TWE_NUS))])
        params["lam"] = float(TWE_LAMBDAS[rng.integers(len(TWE_LAMBDAS))])
    return Measure(kind, **params)


def derivative(series):
    """Keogh-Pazzani derivative; endpoints copy their nearest interior value.

    Works on one series or row-wise on a 2-D array.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.shape[-1] < 3:
        raise TsChiefError("series too short for derivative")
    out = np.empty_like(x)
    out[..., 1:-1] = ((x[..., 1:-1] - x[..., :-2]) + (x[..., 2:] - x[..., :-2]) / 2.0) / 2.0
    out[..., 0] = out[..., 1]
    out[..., -1] = out[..., -2]
    return out


def distance(measure, a, b, cutoff=None):
    """Distance between two equal-length series.

    With ``cutoff`` the computation may stop early and return ``inf`` once the
    result provably exceeds it; below the cutoff the value is exact.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise TsChiefError("length mismatch")
    if measure.uses_derivative:
        a, b = derivative(a), derivative(b)
    code, window, p1, p2, weights = measure._kernel_args(a.shape[0])
    return _kernels.pair_distance(code, a, b, window, p1, p2, weights,
                                  np.inf if cutoff is None else float(cutoff))


def distance_matrix(measure, A, B, early_abandon=False, derived=False):
    """Distances from each row of ``A`` to each row of ``B``.

    ``derived=True`` means the inputs are already derivative-transformed when
    the measure needs it.  With ``early_abandon`` an entry may be ``inf`` when
    it exceeds the smallest value seen earlier in its row; row minima and
    their ties are always exact.
    """
    A = np.ascontiguousarray(A, dtype=np.float64)
    B = np.ascontiguousarray(B, dtype=np.float64)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[1]:
        raise TsChiefError("length mismatch")
    if measure.uses_derivative and not derived:
        A, B = derivative(A), derivative(B)
    code, window, p1, p2, weights = measure._kernel_args(A.shape[1])
    return _kernels.distance_matrix(code, A, B, window, p1, p2, weights, early_abandon)
