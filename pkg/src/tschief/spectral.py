"""Interval features: autocorrelation, partial autocorrelation, AR coefficients
and power spectrum of random subseries."""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import TsChiefError

KINDS = ("acf", "pacf", "ar", "ps")
MIN_INTERVAL = 16
LAG_CAP = 100


@dataclass(frozen=True)
class Interval:
    start: int
    length: int

    @property
    def stop(self):
        return self.start + self.length


def sample_interval(rng, length):
    """Length uniform in [16, length], then start uniform over legal positions."""
    if length < MIN_INTERVAL:
        raise TsChiefError("series shorter than m_min")
    m = int(rng.integers(MIN_INTERVAL, length + 1))
    s = int(rng.integers(0, length - m + 1))
    return Interval(s, m)


def max_lag(m):
    """Lag cap for ACF/PACF and order cap for AR on a subseries of length m."""
    return max(1, min(m // 4, LAG_CAP))


def _rows(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    return x[None, :] if x.ndim == 1 else x


def _unbatch(x, out):
    return out[0] if np.ndim(x) == 1 else out


def acf(x, lags):
    """Autocorrelation at lags 1..lags (zeros for flat input)."""
    if lags >= np.shape(x)[-1]:
        raise TsChiefError("lag must be smaller than the subseries length")
    return _unbatch(x, _kernels.acf(_rows(x), lags))


def pacf(acf_values):
    """Partial autocorrelation from autocorrelations at lags 1..p via Durbin-Levinson."""
    r = _rows(acf_values)
    if r.shape[1] == 0:
        raise TsChiefError("empty autocorrelation input")
    return _unbatch(acf_values, _kernels.durbin_levinson(r)[0])


def ar_coefficients(x, order):
    """Yule-Walker AR(order) coefficients solved by Durbin-Levinson."""
    r = _kernels.acf(_rows(x), order)
    return _unbatch(x, _kernels.durbin_levinson(r)[1])


def power_spectrum(x):
    """``|DFT_k|^2`` for k = 1..floor(m/2)."""
    spec = np.fft.rfft(np.asarray(x, dtype=np.float64), axis=-1)[..., 1:]
    return spec.real ** 2 + spec.imag ** 2


def transform_rows(X, interval, kind):
    """Apply one interval transform to every row: shape (n, features)."""
    sub = np.ascontiguousarray(np.asarray(X)[:, interval.start:interval.stop])
    lags = max_lag(interval.length)
    if kind == "acf":
        return _kernels.acf(sub, lags)
    if kind == "pacf":
        return _kernels.durbin_levinson(_kernels.acf(sub, lags))[0]
    if kind == "ar":
        return _kernels.durbin_levinson(_kernels.acf(sub, lags))[1]
    if kind == "ps":
        return power_spectrum(sub)
    raise TsChiefError(f"unknown interval transform {kind!r}")


def transform_interval(series, interval, kind):
    x = np.asarray(series, dtype=np.float64)
    if interval.start < 0 or interval.stop > x.shape[0]:
        raise TsChiefError("interval outside series")
    return transform_rows(x[None, :], interval, kind)[0]
