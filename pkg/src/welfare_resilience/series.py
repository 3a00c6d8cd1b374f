"""Time-series containers and the descriptive statistics everything else builds on."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import rankdata

from ._validation import as_float_array, check_int, frozen
from .exceptions import (
    DegenerateInput,
    EmptyInput,
    InvalidInput,
    LagTooLarge,
    LengthMismatch,
    SeriesTooShort,
)

__all__ = [
    "LevelSeries",
    "IncrementSeries",
    "DescriptiveStats",
    "AcfResult",
    "difference",
    "describe",
    "acf",
    "spearman",
]


def _check_times(times, n):
    times = np.asarray(times)
    if times.ndim != 1 or times.size != n:
        raise LengthMismatch(f"times has {times.size} entries, values has {n}")
    if times.size and not np.issubdtype(times.dtype, np.integer):
        as_int = times.astype(np.int64)
        if not np.array_equal(as_int, times):
            raise InvalidInput("times must be integers")
        times = as_int
    times = times.astype(np.int64, copy=True)
    steps = np.diff(times)
    if np.any(steps <= 0):
        raise InvalidInput("times must be strictly increasing")
    if np.any(steps != 1):
        at = int(times[:-1][steps != 1][0])
        raise InvalidInput(f"times must be contiguous; gap after {at}")
    return frozen(times)


@dataclass(frozen=True)
class LevelSeries:
    """Welfare levels ``k_t`` of one unit on a contiguous integer time index."""

    unit_id: str
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        values = as_float_array(self.values, "values", allow_empty=True)
        if values.size < 2:
            raise SeriesTooShort(
                f"unit {self.unit_id!r}: need at least 2 levels, got {values.size}"
            )
        object.__setattr__(self, "times", _check_times(self.times, values.size))
        object.__setattr__(self, "values", frozen(values))

    @classmethod
    def from_values(cls, values, unit_id="unit", start=0):
        values = np.asarray(values, dtype=float)
        return cls(unit_id, np.arange(start, start + values.size), values)

    def __len__(self):
        return self.values.size

    def window(self, start=None, end=None):
        """Restrict to ``start <= t <= end`` (inclusive; ``None`` leaves a side open)."""
        mask = np.ones(len(self), dtype=bool)
        if start is not None:
            mask &= self.times >= start
        if end is not None:
            mask &= self.times <= end
        return LevelSeries(self.unit_id, self.times[mask], self.values[mask])


@dataclass(frozen=True)
class IncrementSeries:
    """First differences; ``times[i]`` is the later endpoint of difference ``i``."""

    unit_id: str
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        values = as_float_array(self.values, "values", allow_empty=True)
        if values.size < 1:
            raise SeriesTooShort(f"unit {self.unit_id!r}: no increments")
        object.__setattr__(self, "times", _check_times(self.times, values.size))
        object.__setattr__(self, "values", frozen(values))

    @classmethod
    def from_values(cls, values, unit_id="unit", start=1):
        values = np.asarray(values, dtype=float)
        return cls(unit_id, np.arange(start, start + values.size), values)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class DescriptiveStats:
    """Sample moments. ``skewness`` / ``excess_kurtosis`` are ``None`` when undefined."""

    n: int
    mean: float
    sd: float
    skewness: Optional[float]
    excess_kurtosis: Optional[float]


@dataclass(frozen=True)
class AcfResult:
    lags: np.ndarray
    coefficients: np.ndarray

    def __getitem__(self, lag):
        return float(self.coefficients[lag])


def difference(series):
    """Return the increments ``k_t - k_{t-1}`` of a :class:`LevelSeries`."""
    if len(series.values) < 2:
        raise SeriesTooShort("need at least 2 levels to difference")
    return IncrementSeries(series.unit_id, series.times[1:], np.diff(series.values))


def describe(values):
    """Mean, sample sd (n-1), moment skewness and excess kurtosis.

    Skewness is ``m3 / m2**1.5`` and excess kurtosis ``m4 / m2**2 - 3`` with
    biased central moments. They are reported as ``None`` for ``n < 3`` and
    ``n < 4`` respectively, and for constant samples.
    """
    x = as_float_array(values, allow_empty=True)
    n = x.size
    if n == 0:
        raise EmptyInput("cannot describe an empty sample")
    if np.all(x == x[0]):
        return DescriptiveStats(n, float(x[0]), 0.0, None, None)
    mean = float(x.mean())
    dev = x - mean
    m2 = float(np.mean(dev**2))
    sd = float(np.sqrt(np.sum(dev**2) / (n - 1)))
    skew = float(np.mean(dev**3) / m2**1.5) if n >= 3 else None
    kurt = float(np.mean(dev**4) / m2**2 - 3.0) if n >= 4 else None
    return DescriptiveStats(n, mean, sd, skew, kurt)


def acf(values, max_lag):
    """Sample autocorrelations for lags ``0..max_lag``.

    Uses overall-mean centering and the lag-0 sum of squares as the common
    denominator, so the sequence is positive semi-definite.
    """
    x = as_float_array(values)
    max_lag = check_int(max_lag, "max_lag", minimum=0)
    n = x.size
    if max_lag > n - 2:
        raise LagTooLarge(f"max_lag={max_lag} needs at least {max_lag + 2} points, got {n}")
    dev = x - x.mean()
    c0 = float(dev @ dev)
    if c0 == 0.0:
        raise DegenerateInput("autocorrelation of a constant series is undefined")
    coef = np.empty(max_lag + 1)
    coef[0] = 1.0
    for s in range(1, max_lag + 1):
        coef[s] = (dev[s:] @ dev[:-s]) / c0
    np.clip(coef, -1.0, 1.0, out=coef)
    return AcfResult(frozen(np.arange(max_lag + 1)), frozen(coef))


def spearman(x, y):
    """Spearman rank correlation with average ranks for ties."""
    x = as_float_array(x, "x")
    y = as_float_array(y, "y")
    if x.size != y.size:
        raise LengthMismatch(f"x has {x.size} entries, y has {y.size}")
    if x.size < 3:
        raise SeriesTooShort("spearman needs at least 3 pairs")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DegenerateInput("spearman is undefined for a constant sequence")
    return _pearson(rankdata(x), rankdata(y))


def _pearson(a, b):
    a = a - a.mean()
    b = b - b.mean()
    r = float((a @ b) / np.sqrt((a @ a) * (b @ b)))
    return min(1.0, max(-1.0, r))
